"""Data-scale sweep: every model x size x fold, plus the RL reward curve.

One dataset is generated at the largest size and each smaller size is a
prefix of it, so scale effects are not confounded by resampling. Every
(model, size, fold) cell derives its own seed from the master seed and its
coordinates; results do not depend on execution order or worker count.
"""

from __future__ import annotations

import json
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from ..core import LabeledDataset
from ..datagen import GeneratorConfig, default_config, generate
from ..errors import ConfigInvalid
from ..models import MlpClassifier, NaiveBayesClassifier, RuleClassifier
from ..preprocess import GeneralizationHierarchy, PreprocessConfig, default_hierarchy, run_pipeline
from ..rl import PersonaEnvironment, QPolicyClassifier, RlConfig, train_q
from ..provenance import digest_of, write_sidecar
from ..rl.qlearning import EpisodeLog
from ..seeding import derive_seed
from .metrics import Metrics, compute_metrics, mean_metrics
from .splits import SplitSpec, complement, kfold, make_split

MODEL_FACTORIES = {
    "nb": NaiveBayesClassifier,
    "mlp": MlpClassifier,
    "q": QPolicyClassifier,
    "rule": RuleClassifier,
}
DEFAULT_SIZES = (1000, 5000, 10000, 20000)
DEFAULT_MODELS = ("nb", "mlp", "q", "rule")
HOLDOUT = "holdout"


def make_model(name: str):
    try:
        return MODEL_FACTORIES[name]()
    except KeyError:
        raise ConfigInvalid(f"unknown model {name!r}; choose from {sorted(MODEL_FACTORIES)}") from None


@dataclass(frozen=True)
class SweepConfig:
    sizes: tuple[int, ...] = DEFAULT_SIZES
    models: tuple[str, ...] = DEFAULT_MODELS
    folds: int = 5
    master_seed: int = 42
    generator: GeneratorConfig = field(default_factory=default_config)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    hierarchy: GeneralizationHierarchy = field(default_factory=default_hierarchy)
    rl: RlConfig = field(default_factory=RlConfig)
    workers: int = 1

    def __post_init__(self):
        if not self.sizes or list(self.sizes) != sorted(self.sizes) or len(set(self.sizes)) != len(self.sizes):
            raise ConfigInvalid("sizes must be strictly ascending")
        for m in self.models:
            if m not in MODEL_FACTORIES:
                raise ConfigInvalid(f"unknown model {m!r}")
        if self.folds < 2:
            raise ConfigInvalid("folds must be >= 2")

    def to_json(self) -> dict:
        """Resolved configuration; worker count is excluded (it cannot change results)."""
        return {
            "sizes": list(self.sizes),
            "models": list(self.models),
            "folds": self.folds,
            "master_seed": self.master_seed,
            "generator": self.generator.to_json(),
            "preprocess": self.preprocess.to_json(),
            "hierarchy": self.hierarchy.to_json(),
            "rl": {k: getattr(self.rl, k) for k in self.rl.__dataclass_fields__},
        }

    def digest(self) -> str:
        return digest_of(self.to_json())


@dataclass
class MetricsReport:
    model: str
    size: int
    folds: list[Metrics]
    holdout: Metrics | None
    seed: int
    config_digest: str
    wall_clock: float = 0.0
    cumulative_reward: list[float] | None = None

    @property
    def aggregate(self) -> dict:
        return mean_metrics(self.folds)

    @property
    def accuracy(self) -> float:
        return self.aggregate["accuracy"]

    def to_json(self, wall_clock: bool = True) -> dict:
        d = {
            "model": self.model,
            "size": self.size,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "folds": [dict(fold=i, **m.to_json()) for i, m in enumerate(self.folds)],
            "aggregate": self.aggregate,
            "holdout": None if self.holdout is None else self.holdout.to_json(),
        }
        if self.cumulative_reward is not None:
            d["cumulative_reward"] = self.cumulative_reward
        if wall_clock:
            d["wall_clock_seconds"] = round(self.wall_clock, 3)
        return d


@dataclass
class SweepResult:
    config: SweepConfig
    reports: list[MetricsReport]
    episode_log: EpisodeLog
    provenance: dict

    def report(self, model: str, size: int) -> MetricsReport:
        for r in self.reports:
            if r.model == model and r.size == size:
                return r
        raise KeyError((model, size))

    def comparison_rows(self) -> list[tuple]:
        return [(r.model, r.size, "cv-mean", r.aggregate["accuracy"], r.aggregate["macro_recall"],
                 r.aggregate["macro_f1"]) for r in self.reports]

    def comparison_csv(self) -> str:
        lines = ["model,size,fold,accuracy,macro_recall,macro_f1"]
        for m, s, f, a, rec, f1 in self.comparison_rows():
            lines.append(f"{m},{s},{f},{a:.6f},{rec:.6f},{f1:.6f}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# preparation and cells


@dataclass
class PreparedSize:
    size: int
    pool: LabeledDataset      # train+val, used for cross-validation
    test: LabeledDataset      # held out
    folds: list[list[int]]
    provenance: dict


def prepare(cfg: SweepConfig) -> dict[int, PreparedSize]:
    gen_cfg = cfg.generator.with_(volume=max(cfg.sizes), master_seed=cfg.master_seed)
    full = generate(gen_cfg)
    prepared = {}
    for size in cfg.sizes:
        prefix = full.subset(range(size))
        pp_cfg = replace(cfg.preprocess, seed=derive_seed(cfg.master_seed, "preprocess", size))
        clean, log = run_pipeline(prefix, pp_cfg, cfg.hierarchy)
        train, val, test = make_split(
            clean, SplitSpec(seed=derive_seed(cfg.master_seed, "split", size)))
        pool = clean.subset(sorted(_positions(clean, train) + _positions(clean, val)))
        folds = kfold(pool, cfg.folds, seed=derive_seed(cfg.master_seed, "kfold", size))
        prepared[size] = PreparedSize(size, pool, test, folds, log)
    return prepared


def _positions(whole: LabeledDataset, part: LabeledDataset) -> list[int]:
    ids = {r.record_id for r in part.records}
    return [i for i, r in enumerate(whole.records) if r.record_id in ids]


def fit_and_score(model_name: str, train: LabeledDataset, test: LabeledDataset, seed: int) -> Metrics:
    model = make_model(model_name).fit(train, seed=seed)
    predicted = model.predict_many(test.records)
    return compute_metrics([r.label for r in test.records], predicted)


def cell_seed(master_seed: int, model: str, size: int, fold) -> int:
    return derive_seed(master_seed, "fit", model, size, fold)


_PREPARED: dict[int, PreparedSize] = {}


def _run_cell(task: tuple) -> tuple:
    model, size, fold, master_seed = task
    prep = _PREPARED[size]
    start = time.perf_counter()
    seed = cell_seed(master_seed, model, size, fold)
    if fold == HOLDOUT:
        metrics = fit_and_score(model, prep.pool, prep.test, seed)
    else:
        held = prep.folds[fold]
        train = prep.pool.subset(complement(len(prep.pool), held))
        metrics = fit_and_score(model, train, prep.pool.subset(held), seed)
    return (model, size, fold), metrics, time.perf_counter() - start


def run_sweep(cfg: SweepConfig, holdout: bool = True) -> SweepResult:
    global _PREPARED
    _PREPARED = prepare(cfg)
    fold_ids: list = list(range(cfg.folds)) + ([HOLDOUT] if holdout else [])
    tasks = [(m, s, f, cfg.master_seed) for m in cfg.models for s in cfg.sizes for f in fold_ids]

    if cfg.workers > 1:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=cfg.workers, mp_context=ctx) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]
    by_cell = {key: (metrics, secs) for key, metrics, secs in results}

    digest = cfg.digest()
    reports = []
    for m in cfg.models:
        for s in cfg.sizes:
            folds = [by_cell[(m, s, f)][0] for f in range(cfg.folds)]
            hold = by_cell[(m, s, HOLDOUT)][0] if holdout else None
            secs = sum(by_cell[(m, s, f)][1] for f in fold_ids)
            reports.append(MetricsReport(m, s, folds, hold, cfg.master_seed, digest, secs))

    env = PersonaEnvironment(cfg.generator.personas, cfg.generator.mixture_weights,
                             cfg.generator.schema)
    rl_cfg = replace(cfg.rl, seed=derive_seed(cfg.master_seed, "rl"))
    _, log = train_q(env, rl_cfg, space=env.space)
    provenance = {
        "config_digest": digest,
        "preprocess": {str(s): p.provenance for s, p in _PREPARED.items()},
        "pool_sizes": {str(s): len(p.pool) for s, p in _PREPARED.items()},
        "test_sizes": {str(s): len(p.test) for s, p in _PREPARED.items()},
    }
    return SweepResult(cfg, reports, log, provenance)


# ---------------------------------------------------------------------------
# output


def write_sweep(result: SweepResult, outdir: str) -> dict[str, str]:
    os.makedirs(os.path.join(outdir, "reports"), exist_ok=True)
    paths = {}
    for r in result.reports:
        p = os.path.join(outdir, "reports", f"{r.model}_{r.size}.json")
        with open(p, "w", encoding="utf-8") as fh:
            json.dump(r.to_json(), fh, indent=1, sort_keys=True)
            fh.write("\n")
    paths["comparison"] = os.path.join(outdir, "comparison.csv")
    with open(paths["comparison"], "w", encoding="utf-8", newline="") as fh:
        fh.write(result.comparison_csv())
    write_sidecar(paths["comparison"], result.config.to_json())
    paths["episodes"] = os.path.join(outdir, "episode_log.csv")
    with open(paths["episodes"], "w", encoding="utf-8", newline="") as fh:
        fh.write(result.episode_log.to_csv())
    write_sidecar(paths["episodes"], result.config.to_json())
    paths["manifest"] = os.path.join(outdir, "sweep.json")
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump({"config": result.config.to_json(), "provenance": result.provenance},
                  fh, indent=1, sort_keys=True)
        fh.write("\n")
    return paths
