"""Provenance sidecars: every CSV output gets a JSON twin carrying the config digest."""

from __future__ import annotations

import hashlib
import json

from . import __version__

SIDECAR_SUFFIX = ".provenance.json"


def digest_of(payload) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def sidecar_path(path: str) -> str:
    return path + SIDECAR_SUFFIX


def write_sidecar(path: str, config: dict, **extra) -> str:
    doc = {"output": path, "version": __version__, "config_digest": digest_of(config),
           "config": config}
    doc.update(extra)
    out = sidecar_path(path)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return out


def read_sidecar(path: str) -> dict | None:
    try:
        with open(sidecar_path(path), encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        return None
