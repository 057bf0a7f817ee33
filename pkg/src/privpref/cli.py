"""Command-line entry point: ``privpref <gen|prep|train|eval|rl|sweep|report> ...``.

Outputs are files. Errors print one JSON line to stderr and map onto exit
codes: 1 usage, 2 data or configuration, 3 internal invariant.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace

from . import __version__
from .core import FeatureSchema, load_dataset, save_dataset
from .datagen import GeneratorConfig, default_config, generate
from .errors import ConfigInvalid, PrivPrefError
from .evaluation import (DEFAULT_MODELS, DEFAULT_SIZES, MetricsReport, SweepConfig, compute_metrics,
                         kfold, make_model, run_sweep, write_plot_data, write_sweep)
from .evaluation.report import reports_in
from .evaluation.splits import complement
from .modelio import load_model, model_to_json
from .preprocess import GeneralizationHierarchy, PreprocessConfig, default_hierarchy, run_pipeline
from .provenance import digest_of, read_sidecar, write_sidecar
from .rl import PersonaEnvironment, RlConfig, train_q
from .seeding import derive_seed

SEED_ENV = "PRIVPREF_SEED"
DEFAULT_SEED = 42
EXIT_USAGE = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# resolution helpers


def _seed(args, fallback: int | None = None) -> int:
    """Flag, then environment, then config file, then the shipped default."""
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigInvalid(f"{SEED_ENV}={env!r} is not an integer") from None
    return DEFAULT_SEED if fallback is None else fallback


def _generator(args) -> GeneratorConfig:
    cfg = GeneratorConfig.load(args.config) if args.config else default_config()
    return cfg.with_(master_seed=_seed(args, cfg.master_seed if args.config else None))


def _preprocess(args) -> PreprocessConfig:
    path = getattr(args, "preprocess_config", None)
    cfg = PreprocessConfig.load(path) if path else PreprocessConfig()
    overrides = {}
    for flag, key in (("dp_epsilon", "dp_epsilon"), ("anonymity_k", "anonymity_k"), ("knn_k", "knn_k")):
        if getattr(args, flag, None) is not None:
            overrides[key] = getattr(args, flag)
    if getattr(args, "no_dp", False):
        overrides["dp_enabled"] = False
    return replace(cfg, **overrides)


def _hierarchy(args) -> GeneralizationHierarchy:
    path = getattr(args, "hierarchy", None)
    return GeneralizationHierarchy.load(path) if path else default_hierarchy()


def _rl(args, base: RlConfig | None = None) -> RlConfig:
    cfg = base or RlConfig()
    overrides = {}
    for flag, key in (("episodes", "episodes"), ("alpha", "alpha"), ("gamma", "gamma"),
                      ("epsilon_decay", "epsilon_decay"), ("steps", "steps_per_episode")):
        if getattr(args, flag, None) is not None:
            overrides[key] = getattr(args, flag)
    return replace(cfg, **overrides)


def _schema_for(path: str, args) -> FeatureSchema:
    side = read_sidecar(path)
    if side is not None and "schema" in side:
        return FeatureSchema.from_json(side["schema"])
    if getattr(args, "config", None):
        return GeneratorConfig.load(args.config).schema
    return default_config().schema


def _load(path: str, args):
    if not os.path.exists(path):
        raise ConfigInvalid(f"{path}: no such file")
    return load_dataset(path, _schema_for(path, args))


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _dump_json(path: str, doc: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> None:
    cfg = _generator(args)
    if args.volume is not None:
        cfg = cfg.with_(volume=args.volume)
    cfg.validate()
    ds = generate(cfg)
    save_dataset(ds, args.out)
    write_sidecar(args.out, {"generator": cfg.to_json()}, stage="gen",
                  schema=ds.schema.to_json(), records=len(ds))


def cmd_prep(args) -> None:
    ds = _load(args.data, args)
    cfg = _preprocess(args)
    cfg = replace(cfg, seed=derive_seed(_seed(args, cfg.seed), "preprocess"))
    hierarchy = _hierarchy(args)
    out, log = run_pipeline(ds, cfg, hierarchy)
    save_dataset(out, args.out)
    upstream = read_sidecar(args.data)
    config = {"preprocess": cfg.to_json(), "hierarchy": hierarchy.to_json(),
              "input_digest": upstream.get("config_digest") if upstream else None}
    write_sidecar(args.out, config, stage="prep", schema=out.schema.to_json(), log=log)


def _train_one(name: str, train, seed: int, args):
    model = make_model(name)
    if name == "q" and any(getattr(args, f, None) is not None
                           for f in ("episodes", "alpha", "gamma", "epsilon_decay")):
        model.cfg = _rl(args, model.cfg)
    return model.fit(train, seed=seed)


def cmd_train(args) -> None:
    ds = _load(args.data, args)
    seed = derive_seed(_seed(args), "train", args.model)
    model = _train_one(args.model, ds, seed, args)
    doc = model_to_json(model, ds.schema)
    doc["provenance"] = {"data": os.path.basename(args.data), "seed": seed,
                         "data_digest": (read_sidecar(args.data) or {}).get("config_digest")}
    _dump_json(args.out, doc)


def cmd_eval(args) -> None:
    ds = _load(args.data, args)
    master = _seed(args)
    start = time.perf_counter()
    config = {"model": args.model, "folds": args.folds, "seed": master,
              "data_digest": (read_sidecar(args.data) or {}).get("config_digest")}
    if args.model_file:
        model = load_model(args.model_file, ds.schema)
        metrics = [compute_metrics([r.label for r in ds.records], model.predict_many(ds.records))]
        config["model_file"] = os.path.basename(args.model_file)
        name = model.name
    else:
        name = args.model
        folds = kfold(ds, args.folds, seed=derive_seed(master, "kfold"))
        metrics = []
        for i, held in enumerate(folds):
            train = ds.subset(complement(len(ds), held))
            test = ds.subset(held)
            model = _train_one(name, train, derive_seed(master, "fit", name, i), args)
            metrics.append(compute_metrics([r.label for r in test.records],
                                           model.predict_many(test.records)))
    report = MetricsReport(name, len(ds), metrics, None, master, digest_of(config),
                           time.perf_counter() - start)
    _dump_json(args.out, report.to_json())


def cmd_rl(args) -> None:
    gen = _generator(args)
    cfg = _rl(args)
    cfg = replace(cfg, seed=derive_seed(gen.master_seed, "rl"))
    env = PersonaEnvironment(gen.personas, gen.mixture_weights, gen.schema,
                             single_user=args.single_user)
    q, log = train_q(env, cfg, space=env.space)
    os.makedirs(args.out, exist_ok=True)
    config = {"generator": gen.to_json(), "rl": {k: getattr(cfg, k) for k in cfg.__dataclass_fields__},
              "single_user": args.single_user}
    _dump_json(os.path.join(args.out, "q_table.json"),
               {"actions": [a.label for a in q.actions], "q": q.to_json(),
                "config_digest": digest_of(config)})
    path = os.path.join(args.out, "episode_log.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(log.to_csv())
    write_sidecar(path, config, stage="rl")


def cmd_sweep(args) -> None:
    gen = _generator(args)
    pp = _preprocess(args)
    cfg = SweepConfig(
        sizes=_int_list(args.sizes) if args.sizes else DEFAULT_SIZES,
        models=tuple(m.strip() for m in args.models.split(",")) if args.models else DEFAULT_MODELS,
        folds=args.folds, master_seed=gen.master_seed, generator=gen, preprocess=pp,
        hierarchy=_hierarchy(args), rl=_rl(args), workers=args.workers)
    result = run_sweep(cfg)
    write_sweep(result, args.out)


def cmd_report(args) -> None:
    paths = reports_in(args.input)
    log = os.path.join(args.input, "episode_log.csv")
    write_plot_data(paths, args.out, log if os.path.exists(log) else None)


# ---------------------------------------------------------------------------
# parser


def _common(p, config_help="generator config JSON"):
    p.add_argument("--seed", type=int, default=None, help=f"master seed (default ${SEED_ENV} or 42)")
    p.add_argument("--config", default=None, help=config_help)


def _prep_flags(p):
    p.add_argument("--preprocess-config", default=None, help="preprocess config JSON")
    p.add_argument("--hierarchy", default=None, help="generalization hierarchy JSON")
    p.add_argument("--dp-epsilon", type=float, default=None)
    p.add_argument("--anonymity-k", type=int, default=None)
    p.add_argument("--knn-k", type=int, default=None)
    p.add_argument("--no-dp", action="store_true", help="skip the randomization step")


def _rl_flags(p):
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--epsilon-decay", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="privpref", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("gen", help="generate a synthetic labeled dataset")
    _common(p)
    p.add_argument("--volume", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("prep", help="dedup, impute, anonymize, randomize, augment")
    _common(p, "generator config JSON (schema source when the input has no sidecar)")
    _prep_flags(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("train", help="fit one model and write it as JSON")
    _common(p, "generator config JSON (schema source)")
    _rl_flags(p)
    p.add_argument("--model", required=True, choices=sorted(DEFAULT_MODELS))
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="k-fold cross-validation, or score a saved model")
    _common(p, "generator config JSON (schema source)")
    _rl_flags(p)
    p.add_argument("--model", choices=sorted(DEFAULT_MODELS), default="nb")
    p.add_argument("--model-file", default=None, help="score this fitted model instead of CV")
    p.add_argument("--data", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("rl", help="train Q-learning in the persona environment")
    _common(p)
    _rl_flags(p)
    p.add_argument("--steps", type=int, default=None, help="steps per episode")
    p.add_argument("--single-user", action="store_true", help="one persona per episode")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_rl)

    p = sub.add_parser("sweep", help="every model x size x fold, plus the reward curve")
    _common(p)
    _prep_flags(p)
    _rl_flags(p)
    p.add_argument("--sizes", default=None, help="comma-separated, ascending")
    p.add_argument("--models", default=None, help="comma-separated subset of nb,mlp,q,rule")
    p.add_argument("--model", dest="models", help=argparse.SUPPRESS)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--workers", type=int, default=1, help="parallel cells; results do not change")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="plot-data CSVs from a sweep directory")
    p.add_argument("--in", dest="input", required=True, help="sweep output directory")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def _diagnose(code: int, kind: str, message: str) -> int:
    line = json.dumps({"error": kind, "exit_code": code, "message": " ".join(str(message).split())})
    print(line, file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except UsageError as exc:
        return _diagnose(EXIT_USAGE, "UsageError", exc)
    except PrivPrefError as exc:
        return _diagnose(exc.exit_code, type(exc).__name__, exc)
    except (OSError, json.JSONDecodeError) as exc:
        return _diagnose(2, type(exc).__name__, exc)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - anything else is a bug
        return _diagnose(3, type(exc).__name__, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
