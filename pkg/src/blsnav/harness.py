"""Experiment orchestration and result files.

The traversal experiment runs every (method, alpha) combination over the same
seeded (initial code, direction) pairs, records per-iteration metrics, and
tracks a Frechet distance between proxy features of the current W population
and those of a reference population ``M(z), z ~ N(0, I)``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import fixtures as fx
from . import mapnet, metrics
from .errors import BlsError, ConfigurationError, InputError
from .optimize import Driver, FeatureMatch, LatentDistance, ScoreMatch, run_optimization
from .traversal import Method, TraversalConfig, iter_traversal

log = logging.getLogger(__name__)

CSV_HEADER = ("method", "alpha", "trajectory", "iter", "cos_sim", "step_len", "cum_dist")
METRICS = ("cos_sim", "step_len", "cum_dist")


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


# --- traversal experiment ----------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    network_file: Optional[str] = None
    fixture: Optional[fx.FixtureConfig] = None
    methods: tuple = (Method.BOUNDED, Method.LINEAR, Method.RANDOM, Method.ICT)
    trajectories: int = 1000
    steps: int = 500
    step_length: float = 2.0
    alpha_values: tuple = (1.0,)
    sv_threshold: float = 0.05
    fid_interval: int = 10
    feature_seed: int = 0
    master_seed: int = 0

    def __post_init__(self):
        if self.network_file is not None and self.fixture is not None:
            raise ConfigurationError("give either network_file or fixture, not both")
        if self.network_file is None and self.fixture is None:
            object.__setattr__(self, "fixture", fx.FixtureConfig())
        try:
            methods = tuple(Method(m) for m in self.methods)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        if not methods:
            raise ConfigurationError("methods must not be empty")
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "alpha_values", tuple(float(a) for a in self.alpha_values))
        if self.trajectories < 1:
            raise ConfigurationError(f"trajectories must be >= 1, got {self.trajectories}")
        if self.steps < 1:
            raise ConfigurationError(f"steps must be >= 1, got {self.steps}")
        if not self.step_length > 0.0:
            raise ConfigurationError(f"step_length must be positive, got {self.step_length}")
        if not self.alpha_values or not all(a > 0.0 for a in self.alpha_values):
            raise ConfigurationError(f"alpha_values must be non-empty and positive, got {self.alpha_values}")
        if not self.sv_threshold >= 0.0:
            raise ConfigurationError(f"sv_threshold must be non-negative, got {self.sv_threshold}")
        if self.fid_interval < 1:
            raise ConfigurationError(f"fid_interval must be >= 1, got {self.fid_interval}")
        for name in ("feature_seed", "master_seed"):
            if not 0 <= getattr(self, name) < 2**64:
                raise ConfigurationError(f"{name} must be an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, d: dict, base_dir: Optional[Path] = None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigurationError("experiment config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown experiment config fields: {sorted(unknown)}")
        d = dict(d)
        if d.get("fixture") is not None:
            d["fixture"] = fx.FixtureConfig.from_dict(d["fixture"])
        if d.get("network_file") is not None and base_dir is not None:
            d["network_file"] = str(Path(base_dir) / d["network_file"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None

    def to_dict(self) -> dict:
        return {
            "network_file": self.network_file,
            "fixture": self.fixture.to_dict() if self.fixture else None,
            "methods": [m.value for m in self.methods],
            "trajectories": self.trajectories,
            "steps": self.steps,
            "step_length": self.step_length,
            "alpha_values": list(self.alpha_values),
            "sv_threshold": self.sv_threshold,
            "fid_interval": self.fid_interval,
            "feature_seed": self.feature_seed,
            "master_seed": self.master_seed,
        }


PRESETS = {
    "desk": dict(trajectories=50, steps=100, fid_interval=10),
    "alpha-sweep": dict(
        methods=["bounded"], trajectories=100, steps=200, alpha_values=[0.5, 1.0, 2.0], fid_interval=10
    ),
    "full": dict(trajectories=1000, steps=500, fid_interval=10),
}


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig(**PRESETS[name])


def load_experiment_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    try:
        return ExperimentConfig.from_dict(data, base_dir=path.parent)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def load_net(cfg: ExperimentConfig) -> mapnet.MappingNetwork:
    if cfg.network_file is not None:
        return mapnet.load_network(cfg.network_file)
    return fx.gen_mapping_network(cfg.fixture)


@dataclass(frozen=True)
class ResultRow:
    method: str
    alpha: float
    trajectory: int
    iter: int
    cos_sim: float
    step_len: float
    cum_dist: float

    @property
    def failed(self) -> bool:
        return math.isnan(self.cos_sim)


def trajectory_pairs(dim: int, master_seed: int, count: int):
    """Initial codes and unit directions shared by every method of an experiment."""
    pairs = []
    for i in range(count):
        rng = fx.trajectory_rng(master_seed, i)
        z = fx.sample_z(dim, rng)
        d = fx.sample_direction(dim, rng)
        pairs.append((z, d))
    return pairs


def reference_features(net, extractor, feature_seed: int, count: int) -> np.ndarray:
    rng = fx.make_rng(feature_seed, fx.STREAM_REFERENCE)
    zs = [fx.sample_z(net.input_dim, rng) for _ in range(count)]
    return np.array([mapnet.forward(extractor, mapnet.forward(net, z)) for z in zs])


def fid_iterations(steps: int, interval: int) -> list[int]:
    return list(range(0, steps + 1, interval))


def run_experiment(cfg: ExperimentConfig, strict: bool = False):
    """Run the traversal experiment.

    Returns ``(rows, frechet_series)`` where ``frechet_series`` is a list of
    ``{"method", "alpha", "series": [[iter, value], ...]}`` dicts. A trajectory
    that hits a numeric failure stops there and contributes one row whose
    metrics are NaN; with ``strict=True`` the error propagates instead.
    """
    net = load_net(cfg)
    n = net.input_dim
    extractor = fx.gen_feature_extractor(fx.FixtureConfig(dim=n, seed=cfg.feature_seed))
    pairs = trajectory_pairs(n, cfg.master_seed, cfg.trajectories)
    init_ws = [mapnet.forward(net, z) for z, _ in pairs]
    fid_iters = fid_iterations(cfg.steps, cfg.fid_interval)

    reference = None
    if cfg.trajectories >= 2:
        reference = metrics.fit_gaussian(
            reference_features(net, extractor, cfg.feature_seed, cfg.trajectories)
        )

    rows, series = [], []
    for method in cfg.methods:
        for alpha in cfg.alpha_values:
            populations = {it: [] for it in fid_iters}
            for i, (z, d) in enumerate(pairs):
                tcfg = TraversalConfig(
                    method=method,
                    steps=cfg.steps,
                    step_length=cfg.step_length,
                    alpha=alpha,
                    sv_threshold=cfg.sv_threshold,
                    seed=fx.step_seed(cfg.master_seed, i),
                )
                try:
                    for state, r in iter_traversal(net, tcfg, z, d, init_w=init_ws[i]):
                        if r is not None:
                            rows.append(
                                ResultRow(method.value, alpha, i, r.iter, r.cos_sim, r.step_len, r.cum_dist)
                            )
                        if state.iter in populations:
                            populations[state.iter].append(mapnet.forward(extractor, state.pair.w))
                except BlsError as exc:
                    if strict:
                        raise
                    failed_at = getattr(exc, "iteration", None) or 0
                    log.warning("%s alpha=%g trajectory %d failed: %s", method.value, alpha, i, exc)
                    nan = float("nan")
                    rows.append(ResultRow(method.value, alpha, i, failed_at, nan, nan, nan))
            values = []
            if reference is not None:
                for it in fid_iters:
                    if len(populations[it]) >= 2:
                        pop = metrics.fit_gaussian(np.array(populations[it]))
                        values.append([it, metrics.frechet_distance(pop, reference)])
            series.append({"method": method.value, "alpha": alpha, "series": values})
            log.info("finished %s alpha=%g", method.value, alpha)
    return rows, series


# --- result files ------------------------------------------------------------


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    [
                        r.method,
                        fmt_float(r.alpha),
                        str(r.trajectory),
                        str(r.iter),
                        fmt_float(r.cos_sim),
                        fmt_float(r.step_len),
                        fmt_float(r.cum_dist),
                    ]
                )
                + "\n"
            )


def read_csv(path) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise InputError(f"{path}: unexpected header {header}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            try:
                m, a, t, it, c, s, cd = rec
                rows.append(ResultRow(m, float(a), int(t), int(it), float(c), float(s), float(cd)))
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: malformed row ({exc})") from None
    return rows


def write_frechet_json(series, path) -> None:
    Path(path).write_text(json.dumps(series, indent=2) + "\n")


@dataclass(frozen=True)
class SummaryRow:
    method: str
    alpha: float
    iter: int
    count: int
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)


def summarize(rows) -> list[SummaryRow]:
    """Mean and (population) standard deviation per (method, alpha, iter).

    Flagged failure rows are skipped.
    """
    groups: dict = {}
    for r in rows:
        if r.failed:
            continue
        groups.setdefault((r.method, r.alpha, r.iter), []).append(r)
    out = []
    for (method, alpha, it), members in groups.items():
        table = np.array([[getattr(r, k) for k in METRICS] for r in members])
        out.append(
            SummaryRow(
                method,
                alpha,
                it,
                len(members),
                dict(zip(METRICS, table.mean(axis=0).tolist())),
                dict(zip(METRICS, table.std(axis=0).tolist())),
            )
        )
    return out


def format_summary(summary) -> str:
    head = ["method", "alpha", "iter", "n"]
    for k in METRICS:
        head += [f"{k}_mean", f"{k}_std"]
    lines = [",".join(head)]
    for s in summary:
        cells = [s.method, f"{s.alpha:g}", str(s.iter), str(s.count)]
        for k in METRICS:
            cells += [f"{s.mean[k]:.6g}", f"{s.std[k]:.6g}"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# --- optimization demos ------------------------------------------------------

TASKS = ("latent-distance", "score-match", "feature-match")

# Bounded runs use a larger rate than plain descent: the box already limits
# each move, so a bigger nominal step is safe.
LR_PRESETS = {
    "latent-distance": {Driver.SGD: 1e-3, Driver.BOUNDED: 5e-3},
    "score-match": {Driver.SGD: 1e-2, Driver.BOUNDED: 5e-2},
    "feature-match": {Driver.SGD: 5e-2, Driver.BOUNDED: 1e-1},
}

TARGET_SQ_DISTANCE = 100.0
SCORE_REFERENCE_COUNT = 1000


@dataclass(frozen=True)
class OptimizeConfig:
    task: str = "latent-distance"
    driver: Driver = Driver.SGD
    fixture: fx.FixtureConfig = field(default_factory=fx.FixtureConfig)
    network_file: Optional[str] = None
    iters: int = 500
    lr: Optional[float] = None
    alpha: float = 1.0
    sv_threshold: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigurationError(f"task must be one of {TASKS}, got {self.task!r}")
        object.__setattr__(self, "driver", Driver(self.driver))
        if self.iters < 1:
            raise ConfigurationError(f"iters must be >= 1, got {self.iters}")
        if self.lr is not None and not self.lr > 0.0:
            raise ConfigurationError(f"lr must be positive, got {self.lr}")

    @property
    def learning_rate(self) -> float:
        return self.lr if self.lr is not None else LR_PRESETS[self.task][self.driver]

    @classmethod
    def from_dict(cls, d: dict, base_dir: Optional[Path] = None) -> "OptimizeConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigurationError(f"unknown optimize config fields: {sorted(unknown)}")
        d = dict(d)
        if "fixture" in d:
            d["fixture"] = fx.FixtureConfig.from_dict(d["fixture"])
        if d.get("network_file") is not None and base_dir is not None:
            d["network_file"] = str(Path(base_dir) / d["network_file"])
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from None


def build_task(task: str, net, cfg: fx.FixtureConfig, seed: int):
    """Loss spec and starting code for one of the optimization demos.

    * latent-distance: hold ``|w - w0|^2`` at 100 around an anchor ``w0 = M(z_a)``;
    * score-match: push a fixed scorer to the highest score it gives any of
      1000 reference codes;
    * feature-match: match a random half of the extractor features of
      ``M(z_target)``.
    """
    n = net.input_dim
    rng = fx.make_rng(seed, fx.STREAM_TASK)
    aux = fx.sample_z(n, rng)
    init_z = fx.sample_z(n, rng)
    net_cfg = fx.FixtureConfig(dim=n, depth=cfg.depth, hidden_dim=cfg.hidden_dim, seed=cfg.seed)
    if task == "latent-distance":
        return LatentDistance(mapnet.forward(net, aux), TARGET_SQ_DISTANCE), init_z
    if task == "score-match":
        scorer = fx.gen_scorer(net_cfg)
        ref_rng = fx.make_rng(seed, fx.STREAM_REFERENCE)
        best = max(
            mapnet.forward(scorer, mapnet.forward(net, fx.sample_z(n, ref_rng)))[0]
            for _ in range(SCORE_REFERENCE_COUNT)
        )
        return ScoreMatch(scorer, float(best)), init_z
    if task == "feature-match":
        extractor = fx.gen_feature_extractor(net_cfg)
        target = mapnet.forward(extractor, mapnet.forward(net, aux))
        mask = (rng.random(extractor.output_dim) < 0.5).astype(np.float64)
        if not mask.any():
            mask[0] = 1.0
        return FeatureMatch(extractor, target, mask), init_z
    raise ConfigurationError(f"unknown task {task!r}")


def run_optimize(cfg: OptimizeConfig):
    if cfg.network_file is not None:
        net = mapnet.load_network(cfg.network_file)
    else:
        net = fx.gen_mapping_network(cfg.fixture)
    spec, init_z = build_task(cfg.task, net, cfg.fixture, cfg.seed)
    return run_optimization(
        net, spec, init_z, cfg.iters, cfg.learning_rate, cfg.driver, cfg.alpha, cfg.sv_threshold
    )


def write_loss_csv(states, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("iter,loss\n")
        for s in states:
            fh.write(f"{s.iter},{fmt_float(s.loss)}\n")
