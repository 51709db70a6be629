"""Domain types, cost models, dataset I/O and synthetic instance generation."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np


class DataError(ValueError):
    """Malformed or inconsistent input data."""


class ConfigError(ValueError):
    """Invalid parameter or configuration value."""


TRAJECTORY_HEADER = ["user_id", "lat", "lon", "t_start", "t_end"]
BILLBOARD_HEADER = ["billboard_id", "lat", "lon", "panel_size"]
SLOT_HEADER = ["slot_id", "billboard_id", "t_start", "t_end", "cost"]
GRAPH_HEADER = ["src", "dst"]


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TrajectoryRecord:
    user: int
    location: tuple[float, float]
    t_start: int
    t_end: int


@dataclass(frozen=True, eq=False)
class TrajectoryDB:
    """Column store of ``(user, location, [t_start, t_end])`` tuples.

    ``geodetic`` selects the coordinate convention: WGS-84 degrees
    (lat, lon) when true, planar meters (y, x) otherwise.
    """

    users: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    t_start: np.ndarray
    t_end: np.ndarray
    horizon: tuple[int, int] = (0, 0)
    geodetic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "users", _frozen(self.users, np.int64))
        object.__setattr__(self, "lat", _frozen(self.lat, np.float64))
        object.__setattr__(self, "lon", _frozen(self.lon, np.float64))
        object.__setattr__(self, "t_start", _frozen(self.t_start, np.int64))
        object.__setattr__(self, "t_end", _frozen(self.t_end, np.int64))
        n = len(self.users)
        if not all(len(c) == n for c in (self.lat, self.lon, self.t_start, self.t_end)):
            raise DataError("trajectory columns differ in length")
        if np.any(self.t_start > self.t_end):
            raise DataError("record with t_start > t_end")
        if n:
            lo, hi = self.horizon
            if self.t_start.min() < lo or self.t_end.max() > hi:
                raise DataError("record interval outside horizon")
        object.__setattr__(self, "horizon", (int(self.horizon[0]), int(self.horizon[1])))

    @classmethod
    def from_records(cls, records: Iterable[TrajectoryRecord], horizon=None, geodetic=True):
        records = list(records)
        cols = (
            [r.user for r in records],
            [r.location[0] for r in records],
            [r.location[1] for r in records],
            [r.t_start for r in records],
            [r.t_end for r in records],
        )
        if horizon is None:
            horizon = (min(cols[3]), max(cols[4])) if records else (0, 0)
        return cls(*cols, horizon=horizon, geodetic=geodetic)

    def __len__(self):
        return len(self.users)

    def __iter__(self) -> Iterator[TrajectoryRecord]:
        for i in range(len(self)):
            yield TrajectoryRecord(
                int(self.users[i]),
                (float(self.lat[i]), float(self.lon[i])),
                int(self.t_start[i]),
                int(self.t_end[i]),
            )

    @property
    def records(self) -> list[TrajectoryRecord]:
        return list(self)

    @property
    def user_ids(self) -> np.ndarray:
        return np.unique(self.users)

    def __eq__(self, other):
        if not isinstance(other, TrajectoryDB):
            return NotImplemented
        return (
            self.horizon == other.horizon
            and self.geodetic == other.geodetic
            and all(
                np.array_equal(getattr(self, c), getattr(other, c))
                for c in ("users", "lat", "lon", "t_start", "t_end")
            )
        )


@dataclass(frozen=True)
class Billboard:
    billboard_id: int
    location: tuple[float, float]
    panel_size: float

    def __post_init__(self):
        if not self.panel_size > 0:
            raise DataError(f"billboard {self.billboard_id}: panel_size must be > 0")


@dataclass(frozen=True)
class BillboardSlot:
    """Rental window ``[t_start, t_end)`` on one billboard."""

    slot_id: int
    billboard: Billboard
    t_start: int
    t_end: int
    cost: float = 0.0

    @property
    def interval(self) -> tuple[int, int]:
        return (self.t_start, self.t_end)


@dataclass(frozen=True)
class SlotSet:
    slots: tuple[BillboardSlot, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        ids = [s.slot_id for s in self.slots]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate slot_id in slot set")
        for s in self.slots:
            if s.cost < 0:
                raise DataError(f"slot {s.slot_id}: negative cost")

    def __len__(self):
        return len(self.slots)

    def __iter__(self):
        return iter(self.slots)

    def __getitem__(self, i):
        return self.slots[i]

    @property
    def ids(self) -> list[int]:
        return [s.slot_id for s in self.slots]

    @property
    def costs(self) -> np.ndarray:
        return np.array([s.cost for s in self.slots], dtype=np.float64)

    @cached_property
    def index(self) -> dict[int, int]:
        return {s.slot_id: i for i, s in enumerate(self.slots)}

    @property
    def billboards(self) -> list[Billboard]:
        seen = {}
        for s in self.slots:
            seen.setdefault(s.billboard.billboard_id, s.billboard)
        return [seen[k] for k in sorted(seen)]

    def with_costs(self, costs: Sequence[float]) -> "SlotSet":
        if len(costs) != len(self.slots):
            raise ValueError("one cost per slot required")
        return SlotSet(tuple(replace(s, cost=float(c)) for s, c in zip(self.slots, costs)))


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """Directed graph over user ids with per-edge activation probabilities.

    Edges are kept sorted by ``(src, dst)``; that order is the CSR edge
    order shared with the diffusion kernels.
    """

    nodes: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    prob: np.ndarray | None = None
    seed_cost: np.ndarray | None = None

    def __post_init__(self):
        nodes = np.unique(np.asarray(self.nodes, dtype=np.int64))
        src = np.asarray(self.src, dtype=np.int64)
        dst = np.asarray(self.dst, dtype=np.int64)
        if len(src) != len(dst):
            raise DataError("src/dst length mismatch")
        prob = np.ones(len(src)) if self.prob is None else np.asarray(self.prob, dtype=np.float64)
        if len(prob) != len(src):
            raise DataError("prob length mismatch")
        if np.any(src == dst):
            raise DataError("self-loop in graph")
        if len(src) and (np.any(prob <= 0) or np.any(prob > 1)):
            raise DataError("edge probabilities must lie in (0, 1]")
        if len(src) and not (np.isin(src, nodes).all() and np.isin(dst, nodes).all()):
            raise DataError("edge endpoint not among graph nodes")
        order = np.lexsort((dst, src))
        src, dst, prob = src[order], dst[order], prob[order]
        if len(src) > 1 and np.any((np.diff(src) == 0) & (np.diff(dst) == 0)):
            raise DataError("duplicate edge in graph")
        object.__setattr__(self, "nodes", _frozen(nodes, np.int64))
        object.__setattr__(self, "src", _frozen(src, np.int64))
        object.__setattr__(self, "dst", _frozen(dst, np.int64))
        object.__setattr__(self, "prob", _frozen(prob, np.float64))
        if self.seed_cost is not None:
            sc = np.asarray(self.seed_cost, dtype=np.float64)
            if len(sc) != len(nodes) or np.any(sc < 0):
                raise DataError("seed_cost must be one non-negative value per node")
            object.__setattr__(self, "seed_cost", _frozen(sc, np.float64))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @cached_property
    def index(self) -> dict[int, int]:
        return {int(v): i for i, v in enumerate(self.nodes)}

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` over node positions, edges in stored order."""
        pos = np.searchsorted(self.nodes, self.src)
        indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        np.add.at(indptr, pos + 1, 1)
        indptr = np.cumsum(indptr)
        indices = np.searchsorted(self.nodes, self.dst).astype(np.int64)
        return indptr, indices

    def out_degree(self) -> np.ndarray:
        indptr, _ = self.csr
        return np.diff(indptr)

    def in_degree(self) -> np.ndarray:
        return np.bincount(np.searchsorted(self.nodes, self.dst), minlength=self.n_nodes)

    def cost_of(self, user: int) -> float:
        if self.seed_cost is None:
            raise DataError("graph has no seed costs")
        return float(self.seed_cost[self.index[int(user)]])

    def with_probabilities(self, prob) -> "SocialGraph":
        return SocialGraph(self.nodes, self.src, self.dst, prob, self.seed_cost)

    def with_seed_costs(self, costs) -> "SocialGraph":
        return SocialGraph(self.nodes, self.src, self.dst, self.prob, costs)

    def __eq__(self, other):
        if not isinstance(other, SocialGraph):
            return NotImplemented
        same_cost = (self.seed_cost is None and other.seed_cost is None) or (
            self.seed_cost is not None
            and other.seed_cost is not None
            and np.array_equal(self.seed_cost, other.seed_cost)
        )
        return same_cost and all(
            np.array_equal(getattr(self, c), getattr(other, c)) for c in ("nodes", "src", "dst", "prob")
        )


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    trajectories: TrajectoryDB
    slots: SlotSet
    graph: SocialGraph
    budget: float
    lam: float = 100.0
    delta_slot: int = 3600
    rng_seed: int = 0

    def __post_init__(self):
        if self.budget < 0:
            raise ConfigError("budget must be >= 0")
        if not self.lam > 0:
            raise ConfigError("lambda must be > 0")
        if self.graph.seed_cost is None:
            raise DataError("graph must carry seed costs")
        missing = np.setdiff1d(self.trajectories.user_ids, self.graph.nodes)
        if len(missing):
            raise DataError(f"trajectory users absent from graph: {missing[:5].tolist()}")

    @cached_property
    def universe(self) -> np.ndarray:
        """Sorted union of trajectory users and graph nodes."""
        return np.union1d(self.trajectories.user_ids, self.graph.nodes)

    @cached_property
    def matrix(self):
        from .billboard import build_matrix

        return build_matrix(self.trajectories, self.slots, self.lam, universe=self.universe)

    def with_budget(self, budget: float) -> "ProblemInstance":
        inst = replace(self, budget=budget)
        if "matrix" in self.__dict__:
            inst.__dict__["matrix"] = self.__dict__["matrix"]
        return inst


# ---------------------------------------------------------------- slots & costs


def derive_slots(billboards: Sequence[Billboard], delta: int, horizon: tuple[int, int]) -> SlotSet:
    """Tile ``horizon`` into ``delta``-long slots per billboard; a partial tail is dropped."""
    t1, t2 = int(horizon[0]), int(horizon[1])
    if delta <= 0:
        raise ConfigError("slot duration must be > 0")
    if t2 <= t1:
        raise ConfigError("horizon must satisfy T2 > T1")
    per = (t2 - t1) // delta
    slots = []
    for b in sorted(billboards, key=lambda b: b.billboard_id):
        for j in range(per):
            start = t1 + j * delta
            slots.append(BillboardSlot(len(slots), b, start, start + delta))
    return SlotSet(tuple(slots))


def slot_cost(influence: float, delta_scale: float) -> int:
    """``floor(delta_scale * influence / 10)``, never below 1."""
    if not 0.8 <= delta_scale <= 1.1:
        raise ConfigError(f"delta scale {delta_scale} outside [0.8, 1.1]")
    if influence < 0:
        raise ValueError("influence must be >= 0")
    return max(1, math.floor(delta_scale * influence / 10))


def seed_costs(graph: SocialGraph, k: float = 1000.0) -> np.ndarray:
    """Degree-proportional cost ``k * |V| / sum(deg) * deg(u)`` using out-degree.

    Nodes of out-degree zero cost 1.
    """
    if graph.n_nodes == 0:
        raise DataError("empty graph")
    deg = graph.out_degree().astype(np.float64)
    total = deg.sum()
    if total == 0:
        return np.ones(graph.n_nodes)
    cost = k * (graph.n_nodes / total) * deg
    cost[deg == 0] = 1.0
    return cost


def seed_cost(user: int, graph: SocialGraph, k: float = 1000.0) -> float:
    if int(user) not in graph.index:
        raise DataError(f"user {user} not in graph")
    return float(seed_costs(graph, k)[graph.index[int(user)]])


def price_slots(slots: SlotSet, matrix, rng: np.random.Generator) -> SlotSet:
    """Assign each slot a cost from its singleton influence, delta drawn per slot."""
    from .billboard import influence

    deltas = rng.uniform(0.8, 1.1, size=len(slots))
    costs = [slot_cost(influence(matrix, [s.slot_id]), float(d)) for s, d in zip(slots, deltas)]
    return slots.with_costs(costs)


# ---------------------------------------------------------------- CSV I/O


def _rows(path, header):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            return
        got = [h.strip() for h in first]
        if got[: len(header)] != header:
            raise DataError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            yield lineno, got, row


def _parse(path, lineno, value, kind):
    try:
        return kind(value.strip())
    except ValueError:
        raise DataError(f"{path}: row {lineno}: cannot parse {value!r} as {kind.__name__}") from None


def load_trajectories(path, geodetic: bool = True, horizon=None) -> TrajectoryDB:
    """Read ``user_id,lat,lon,t_start,t_end`` rows; horizon defaults to the record envelope."""
    cols = ([], [], [], [], [])
    for lineno, _, row in _rows(path, TRAJECTORY_HEADER):
        if len(row) < 5:
            raise DataError(f"{path}: row {lineno}: expected 5 fields, got {len(row)}")
        vals = [
            _parse(path, lineno, row[0], int),
            _parse(path, lineno, row[1], float),
            _parse(path, lineno, row[2], float),
            _parse(path, lineno, row[3], int),
            _parse(path, lineno, row[4], int),
        ]
        if vals[3] > vals[4]:
            raise DataError(f"{path}: row {lineno}: t_start > t_end")
        for c, v in zip(cols, vals):
            c.append(v)
    if horizon is None:
        horizon = (min(cols[3]), max(cols[4])) if cols[0] else (0, 0)
    return TrajectoryDB(*cols, horizon=horizon, geodetic=geodetic)


def load_billboards(path) -> list[Billboard]:
    out = []
    for lineno, _, row in _rows(path, BILLBOARD_HEADER):
        if len(row) < 4:
            raise DataError(f"{path}: row {lineno}: expected 4 fields, got {len(row)}")
        try:
            out.append(
                Billboard(
                    _parse(path, lineno, row[0], int),
                    (_parse(path, lineno, row[1], float), _parse(path, lineno, row[2], float)),
                    _parse(path, lineno, row[3], float),
                )
            )
        except DataError as exc:
            raise DataError(f"{path}: row {lineno}: {exc}") from None
    return out


def load_slots(path, billboards: Sequence[Billboard]) -> SlotSet:
    by_id = {b.billboard_id: b for b in billboards}
    slots = []
    for lineno, _, row in _rows(path, SLOT_HEADER):
        if len(row) < 5:
            raise DataError(f"{path}: row {lineno}: expected 5 fields, got {len(row)}")
        bid = _parse(path, lineno, row[1], int)
        if bid not in by_id:
            raise DataError(f"{path}: row {lineno}: unknown billboard {bid}")
        slots.append(
            BillboardSlot(
                _parse(path, lineno, row[0], int),
                by_id[bid],
                _parse(path, lineno, row[2], int),
                _parse(path, lineno, row[3], int),
                _parse(path, lineno, row[4], float),
            )
        )
    return SlotSet(tuple(slots))


def load_graph(path, nodes=None, explicit_prob: bool = False) -> SocialGraph:
    """Read ``src,dst[,prob]``; ``prob`` is required when ``explicit_prob`` is set."""
    src, dst, prob = [], [], []
    for lineno, header, row in _rows(path, GRAPH_HEADER):
        if len(row) < 2:
            raise DataError(f"{path}: row {lineno}: expected src,dst")
        src.append(_parse(path, lineno, row[0], int))
        dst.append(_parse(path, lineno, row[1], int))
        if explicit_prob:
            if len(header) < 3 or len(row) < 3 or not row[2].strip():
                raise DataError(f"{path}: row {lineno}: prob column required")
            prob.append(_parse(path, lineno, row[2], float))
    all_nodes = set(src) | set(dst)
    if nodes is not None:
        all_nodes |= {int(v) for v in nodes}
    return SocialGraph(sorted(all_nodes), src, dst, prob if explicit_prob else None)


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(int(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def save_trajectories(db: TrajectoryDB, path):
    _write_csv(path, TRAJECTORY_HEADER, zip(db.users, db.lat, db.lon, db.t_start, db.t_end))


def save_billboards(billboards: Sequence[Billboard], path):
    _write_csv(
        path,
        BILLBOARD_HEADER,
        ((b.billboard_id, float(b.location[0]), float(b.location[1]), float(b.panel_size)) for b in billboards),
    )


def save_slots(slots: SlotSet, path):
    _write_csv(
        path,
        SLOT_HEADER,
        ((s.slot_id, s.billboard.billboard_id, s.t_start, s.t_end, float(s.cost)) for s in slots),
    )


def save_graph(graph: SocialGraph, path, with_prob: bool = True):
    header = GRAPH_HEADER + (["prob"] if with_prob else [])
    rows = (
        (s, d, float(p)) if with_prob else (s, d) for s, d, p in zip(graph.src, graph.dst, graph.prob)
    )
    _write_csv(path, header, rows)


def save_instance(inst: ProblemInstance, directory) -> None:
    """Write an instance as ``trajectories.csv``, ``billboards.csv``, ``slots.csv``,
    ``graph.csv`` (explicit probabilities) and ``instance.json``."""
    os.makedirs(directory, exist_ok=True)
    save_trajectories(inst.trajectories, os.path.join(directory, "trajectories.csv"))
    save_billboards(inst.slots.billboards, os.path.join(directory, "billboards.csv"))
    save_slots(inst.slots, os.path.join(directory, "slots.csv"))
    save_graph(inst.graph, os.path.join(directory, "graph.csv"))
    meta = {
        "budget": float(inst.budget),
        "lambda": float(inst.lam),
        "delta_slot": int(inst.delta_slot),
        "horizon": list(inst.trajectories.horizon),
        "rng_seed": int(inst.rng_seed),
        "coords": "wgs84" if inst.trajectories.geodetic else "planar",
        "nodes": [int(v) for v in inst.graph.nodes],
        "seed_cost": [float(c) for c in inst.graph.seed_cost],
        "prob_model": "explicit",
    }
    with open(os.path.join(directory, "instance.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_instance(directory, prob_model=None, seed_cost_k: float = 1000.0) -> ProblemInstance:
    """Load an instance directory.

    Without ``slots.csv`` the slots are derived from ``billboards.csv`` and
    priced from their singleton influence; without per-node costs in
    ``instance.json`` the degree cost model is applied. ``prob_model``
    overrides the probabilities stored in ``graph.csv``.
    """
    from .diffusion import Explicit, assign_probabilities, model_from_name

    meta_path = os.path.join(directory, "instance.json")
    meta = {}
    if os.path.exists(meta_path):
        try:
            with open(meta_path, encoding="utf-8") as fh:
                meta = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"{meta_path}: {exc}") from exc
    geodetic = meta.get("coords", "wgs84") != "planar"
    horizon = tuple(meta["horizon"]) if "horizon" in meta else None
    db = load_trajectories(os.path.join(directory, "trajectories.csv"), geodetic=geodetic, horizon=horizon)
    billboards = load_billboards(os.path.join(directory, "billboards.csv"))
    stored_model = meta.get("prob_model", "explicit")
    if prob_model is None:
        prob_model = Explicit() if stored_model == "explicit" else model_from_name(stored_model, meta.get("pc", 0.1), meta.get("rng_seed", 0))
    explicit = isinstance(prob_model, Explicit)
    graph = load_graph(
        os.path.join(directory, "graph.csv"),
        nodes=list(meta.get("nodes", [])) + db.user_ids.tolist(),
        explicit_prob=explicit,
    )
    if not explicit:
        graph = assign_probabilities(graph, prob_model)
    costs = meta.get("seed_cost")
    if costs is not None and len(costs) == graph.n_nodes:
        graph = graph.with_seed_costs(costs)
    else:
        graph = graph.with_seed_costs(seed_costs(graph, seed_cost_k))
    delta_slot = int(meta.get("delta_slot", 3600))
    lam = float(meta.get("lambda", 100.0))
    rng_seed = int(meta.get("rng_seed", 0))
    slots_path = os.path.join(directory, "slots.csv")
    if os.path.exists(slots_path):
        slots = load_slots(slots_path, billboards)
    else:
        slots = derive_slots(billboards, delta_slot, db.horizon)
        from .billboard import build_matrix

        m = build_matrix(db, slots, lam, universe=np.union1d(db.user_ids, graph.nodes))
        slots = price_slots(slots, m, np.random.default_rng([rng_seed, 1]))
    return ProblemInstance(db, slots, graph, float(meta.get("budget", 0.0)), lam, delta_slot, rng_seed)


def instance_digest(inst: ProblemInstance) -> str:
    """SHA-256 over the canonical CSV serialization of an instance."""
    db, g = inst.trajectories, inst.graph
    parts = [
        _csv_text(TRAJECTORY_HEADER, zip(db.users, db.lat, db.lon, db.t_start, db.t_end)),
        _csv_text(
            BILLBOARD_HEADER,
            ((b.billboard_id, float(b.location[0]), float(b.location[1]), float(b.panel_size)) for b in inst.slots.billboards),
        ),
        _csv_text(SLOT_HEADER, ((s.slot_id, s.billboard.billboard_id, s.t_start, s.t_end, float(s.cost)) for s in inst.slots)),
        _csv_text(GRAPH_HEADER + ["prob"], zip(g.src, g.dst, g.prob)),
        _csv_text(["node", "cost"], zip(g.nodes, g.seed_cost)),
        repr((float(inst.budget), float(inst.lam), int(inst.delta_slot), int(inst.rng_seed), db.horizon)),
    ]
    return hashlib.sha256("".join(parts).encode()).hexdigest()


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------- synthetic


def generate_synthetic(
    n_users: int,
    n_billboards: int,
    n_edges: int,
    extent: float = 1000.0,
    horizon: tuple[int, int] = (0, 14400),
    prob_model=None,
    rng_seed: int = 0,
    *,
    delta_slot: int = 3600,
    records_per_user: int = 4,
    visit_seconds: int = 1800,
    lam: float = 100.0,
    budget: float = 1000.0,
    seed_cost_k: float = 1000.0,
) -> ProblemInstance:
    """Planar synthetic instance; a pure function of its arguments.

    Users visit points scattered around billboards (Gaussian, sd = lam) or
    uniformly over the square extent; the social graph is a directed
    Erdős–Rényi G(n, m) over the same users.
    """
    from .diffusion import Uniform, assign_probabilities

    if min(n_users, n_billboards, n_edges, records_per_user) < 0:
        raise ConfigError("counts must be >= 0")
    if n_edges > n_users * max(n_users - 1, 0):
        raise ConfigError("too many edges for a simple directed graph")
    if prob_model is None:
        prob_model = Uniform(0.1)
    rng = np.random.default_rng([int(rng_seed), 0])
    t1, t2 = int(horizon[0]), int(horizon[1])

    bx = rng.uniform(0, extent, n_billboards)
    by = rng.uniform(0, extent, n_billboards)
    sizes = rng.choice(np.array([20.0, 40.0, 60.0, 80.0, 100.0]), n_billboards)
    billboards = [Billboard(i, (float(by[i]), float(bx[i])), float(sizes[i])) for i in range(n_billboards)]

    m = n_users * records_per_user
    users = np.repeat(np.arange(n_users, dtype=np.int64), records_per_user)
    near = rng.random(m) < 0.7 if n_billboards else np.zeros(m, dtype=bool)
    anchor = rng.integers(0, max(n_billboards, 1), m)
    ys = np.where(near, by[anchor] if n_billboards else 0.0, rng.uniform(0, extent, m))
    xs = np.where(near, bx[anchor] if n_billboards else 0.0, rng.uniform(0, extent, m))
    jitter = rng.normal(0.0, lam, (2, m))
    ys = np.where(near, ys + jitter[0], ys)
    xs = np.where(near, xs + jitter[1], xs)
    span = max(t2 - t1 - visit_seconds, 0)
    starts = t1 + rng.integers(0, span + 1, m)
    ends = np.minimum(starts + rng.integers(0, visit_seconds + 1, m), t2)
    db = TrajectoryDB(users, ys, xs, starts, ends, horizon=(t1, t2), geodetic=False)

    pairs = n_users * (n_users - 1)
    flat = rng.choice(pairs, size=n_edges, replace=False) if n_edges else np.array([], dtype=np.int64)
    src = flat // max(n_users - 1, 1)
    off = flat % max(n_users - 1, 1)
    dst = np.where(off >= src, off + 1, off)
    graph = SocialGraph(np.arange(n_users), src, dst)
    graph = assign_probabilities(graph, prob_model)
    graph = graph.with_seed_costs(seed_costs(graph, seed_cost_k) if n_users else np.zeros(0))

    slots = derive_slots(billboards, delta_slot, (t1, t2)) if n_billboards else SlotSet()
    if len(slots):
        from .billboard import build_matrix

        matrix = build_matrix(db, slots, lam, universe=np.arange(n_users))
        slots = price_slots(slots, matrix, rng)
    return ProblemInstance(db, slots, graph, float(budget), float(lam), int(delta_slot), int(rng_seed))
