"""Experiment sweeps over algorithms and budgets, with CSV output."""

from __future__ import annotations

import csv
import io
import sys
import time
import zlib
from dataclasses import dataclass, field, fields, replace

from .combined import Exact, MonteCarlo, Objective
from .data import ConfigError, generate_synthetic, load_instance
from .diffusion import model_from_name
from .optimizers import ALGORITHMS, run_algorithm

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

RESULT_HEADER = [
    "algorithm",
    "budget",
    "phi_total",
    "phi_billboard",
    "phi_social",
    "phi_interaction",
    "split_pct_billboard",
    "split_pct_social",
    "wall_time_ms",
    "rng_seed",
]
PLOT_KINDS = ("influence_vs_budget", "split_vs_algo", "time_vs_budget")


@dataclass(frozen=True)
class SyntheticSpec:
    users: int = 50
    billboards: int = 5
    edges: int = 100
    seed: int = 0
    extent: float = 1000.0


@dataclass(frozen=True)
class ExperimentConfig:
    budgets: tuple = (1000.0,)
    algorithms: tuple = ALGORITHMS
    instance_path: str | None = None
    synthetic: SyntheticSpec | None = field(default_factory=SyntheticSpec)
    prob_model: str | None = None
    pc: float = 0.1
    epsilon: float = 0.01
    lam: float = 100.0
    R: int = 1000
    exact: bool = False
    merge: str = "rank"
    rng_seed: int = 0
    output: str | None = None
    trace: str | None = None

    def __post_init__(self):
        if not self.budgets:
            raise ConfigError("budgets must be non-empty")
        if any(float(b) < 0 for b in self.budgets):
            raise ConfigError("budgets must be >= 0")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}; expected one of {', '.join(ALGORITHMS)}")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if self.R < 1:
            raise ConfigError("R must be >= 1")
        if not self.lam > 0:
            raise ConfigError("lambda must be > 0")
        if self.merge not in ("rank", "alternate"):
            raise ConfigError(f"unknown merge strategy {self.merge!r}")
        object.__setattr__(self, "budgets", tuple(float(b) for b in self.budgets))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))

    @property
    def mode(self):
        return Exact() if self.exact else MonteCarlo(self.R, self.rng_seed)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


_KEYS = {f.name for f in fields(ExperimentConfig)} - {"synthetic", "instance_path"}
_ALIASES = {"lambda": "lam", "sims": "R", "seed": "rng_seed", "algorithm": "algorithms", "budget": "budgets", "out": "output"}


def load_config(path) -> ExperimentConfig:
    """Read a TOML experiment file.

    Top-level keys mirror :class:`ExperimentConfig`; the instance comes
    from ``[instance] path = ...`` or a ``[synthetic]`` table.
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = dict(raw)
    kw: dict = {}
    inst = raw.pop("instance", None)
    syn = raw.pop("synthetic", None)
    if inst is not None:
        if not isinstance(inst, dict) or "path" not in inst:
            raise ConfigError("[instance] needs a 'path'")
        kw["instance_path"] = str(inst["path"])
        kw["synthetic"] = None
    elif syn is not None:
        try:
            kw["synthetic"] = SyntheticSpec(**syn)
        except TypeError as exc:
            raise ConfigError(f"[synthetic]: {exc}") from None
    for key, value in raw.items():
        name = _ALIASES.get(key, key)
        if name not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if name in ("budgets", "algorithms") and not isinstance(value, list):
            value = [value]
        kw[name] = value
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_experiment_instance(config: ExperimentConfig):
    model = model_from_name(config.prob_model, config.pc, config.rng_seed) if config.prob_model else None
    if config.instance_path is not None:
        inst = load_instance(config.instance_path, prob_model=model)
        return replace(inst, lam=config.lam) if inst.lam != config.lam else inst
    s = config.synthetic or SyntheticSpec()
    return generate_synthetic(
        s.users, s.billboards, s.edges, extent=s.extent, prob_model=model, rng_seed=s.seed, lam=config.lam
    )


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    budget: float
    phi_total: float
    phi_billboard: float
    phi_social: float
    phi_interaction: float
    split_pct_billboard: float
    split_pct_social: float
    wall_time_ms: float
    rng_seed: int

    def cells(self) -> list[str]:
        return [self.algorithm, *(repr(float(getattr(self, k))) for k in RESULT_HEADER[1:-1]), str(self.rng_seed)]


def algorithm_seed(rng_seed: int, algorithm: str) -> int:
    """Stream seed for one algorithm; shared across budgets so sweeps stay comparable."""
    return zlib.crc32(f"{int(rng_seed)}:{algorithm}".encode())


def run_experiment(config: ExperimentConfig, instance=None, objective=None) -> list[ResultRow]:
    """One row per (algorithm, budget), sorted by algorithm then budget."""
    if instance is None:
        instance = load_experiment_instance(config)
    if objective is None:
        objective = Objective(instance, config.mode)
    rows = []
    trace_chunks = []
    for algo in sorted(set(config.algorithms)):
        for budget in sorted(set(config.budgets)):
            cell = instance.with_budget(budget)
            t0 = time.perf_counter()
            sol, trace = run_algorithm(
                algo,
                cell,
                objective=objective,
                epsilon=config.epsilon,
                rng_seed=algorithm_seed(config.rng_seed, algo),
                merge=config.merge,
            )
            ms = (time.perf_counter() - t0) * 1000.0
            v = sol.value
            b1, b2 = sol.split
            rows.append(
                ResultRow(algo, budget, v.phi, v.billboard, v.social, v.interaction, b1, b2, max(ms, 1e-6), config.rng_seed)
            )
            if config.trace:
                trace_chunks.append(trace.to_jsonl(algorithm=algo, budget=budget))
    if config.trace:
        with open(config.trace, "w", encoding="utf-8") as fh:
            fh.write("".join(trace_chunks))
    if config.output:
        write_results(rows, config.output)
    return rows


def results_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def write_results(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(results_csv(rows))


def read_results(path) -> list[ResultRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULT_HEADER:
            raise ConfigError(f"{path}: not a results file")
        out = []
        for rec in reader:
            out.append(ResultRow(rec[0], *(float(x) for x in rec[1:-1]), int(rec[-1])))
    return out


def plot_rows(rows, kind: str) -> tuple[list[str], list[list]]:
    rows = list(rows)
    if not rows:
        raise ConfigError("no result rows to emit")
    if kind == "influence_vs_budget":
        header = ["algorithm", "budget", "component", "value"]
        body = [
            [r.algorithm, r.budget, comp, getattr(r, "phi_" + comp)]
            for r in rows
            for comp in ("total", "billboard", "social", "interaction")
        ]
    elif kind == "split_vs_algo":
        header = ["algorithm", "budget", "channel", "share_pct"]
        body = [
            [r.algorithm, r.budget, ch, 100.0 * getattr(r, "split_pct_" + ch)]
            for r in rows
            for ch in ("billboard", "social")
        ]
    elif kind == "time_vs_budget":
        header = ["algorithm", "budget", "wall_time_ms"]
        body = [[r.algorithm, r.budget, r.wall_time_ms] for r in rows]
    else:
        raise ConfigError(f"unknown plot kind {kind!r}; expected one of {', '.join(PLOT_KINDS)}")
    return header, body


def emit_plot_data(rows, kind: str, path) -> str:
    """Write long-format CSV for one figure kind and return the path."""
    header, body = plot_rows(rows, kind)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for rec in body:
            w.writerow([repr(x) if isinstance(x, float) else x for x in rec])
    return str(path)
