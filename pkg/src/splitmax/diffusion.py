"""Independent cascade diffusion: edge-probability models, Monte Carlo
spread estimation over shared live-edge worlds, and an exact enumeration
oracle for small graphs."""

from __future__ import annotations

import math
import threading
import weakref
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import ConfigError, DataError, SocialGraph

MAX_EXACT_EDGES = 20
WORLD_CHUNK = 256
_WORLD_CACHE_LIMIT = 1 << 25  # bytes of live-edge mask kept per estimator


# ---------------------------------------------------------------- probability models


@dataclass(frozen=True)
class Uniform:
    pc: float = 0.1

    def __post_init__(self):
        if not 0 < self.pc <= 1:
            raise ConfigError("uniform probability must lie in (0, 1]")


@dataclass(frozen=True)
class WeightedCascade:
    # True gives the literal 1/out-degree(source) reading instead of 1/in-degree(target).
    by_source_out_degree: bool = False


@dataclass(frozen=True)
class Trivalency:
    rng_seed: int = 0
    levels: tuple = (0.1, 0.01, 0.001)


@dataclass(frozen=True)
class Explicit:
    pass


def model_from_name(name: str, pc: float = 0.1, rng_seed: int = 0):
    name = name.lower()
    if name == "uniform":
        return Uniform(pc)
    if name in ("wc", "weighted", "weighted_cascade"):
        return WeightedCascade()
    if name in ("wc-out", "wc_out"):
        return WeightedCascade(by_source_out_degree=True)
    if name in ("trivalency", "tv"):
        return Trivalency(rng_seed)
    if name == "explicit":
        return Explicit()
    raise ConfigError(f"unknown probability model {name!r}")


def assign_probabilities(graph: SocialGraph, model) -> SocialGraph:
    if isinstance(model, Explicit):
        return graph
    m = graph.n_edges
    if isinstance(model, Uniform):
        prob = np.full(m, model.pc)
    elif isinstance(model, WeightedCascade):
        if model.by_source_out_degree:
            deg = graph.out_degree()[np.searchsorted(graph.nodes, graph.src)]
        else:
            deg = graph.in_degree()[np.searchsorted(graph.nodes, graph.dst)]
        prob = 1.0 / deg if m else np.zeros(0)
    elif isinstance(model, Trivalency):
        rng = np.random.default_rng([int(model.rng_seed), 3])
        prob = rng.choice(np.asarray(model.levels, dtype=np.float64), size=m)
    else:
        raise ConfigError(f"unsupported probability model {model!r}")
    return graph.with_probabilities(prob)


# ---------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    std_error: float
    simulations: int


def _positions(graph: SocialGraph, seeds) -> np.ndarray:
    try:
        return np.array(sorted({graph.index[int(s)] for s in seeds}), dtype=np.int64)
    except KeyError as exc:
        raise DataError(f"seed {exc.args[0]} not in graph") from None


def simulate_once(graph: SocialGraph, seeds, rng: np.random.Generator) -> set[int]:
    """One cascade: every edge gets one coin, used if its source activates."""
    pos = _positions(graph, seeds)
    if not len(pos):
        return set()
    live = (rng.random(graph.n_edges) < graph.prob).astype(np.uint8)[None, :]
    indptr, indices = graph.csr
    counts, _ = kernels.ic_reach(indptr, indices, live, pos)
    return {int(v) for v in graph.nodes[counts > 0]}


class MonteCarloSpread:
    """Spread and activation estimates from ``R`` live-edge worlds.

    World ``r`` is drawn from a stream derived from ``(rng_seed, r // 256)``,
    so every seed set is evaluated on the same worlds (common random numbers).
    """

    def __init__(self, graph: SocialGraph, R: int = 1000, rng_seed: int = 0, cache_size: int = 4096):
        if R < 1:
            raise ConfigError("simulation count R must be >= 1")
        self.graph = graph
        self.R = int(R)
        self.rng_seed = int(rng_seed)
        self.cache_size = cache_size
        self._lock = threading.Lock()
        self._activation: OrderedDict[int, tuple[np.ndarray, np.ndarray]] = OrderedDict()
        self._worlds = None
        if self.R * graph.n_edges <= _WORLD_CACHE_LIMIT:
            self._worlds = np.concatenate(list(self._chunks())) if self.R else None

    def _chunk(self, c: int) -> np.ndarray:
        n = min(WORLD_CHUNK, self.R - c * WORLD_CHUNK)
        rng = np.random.default_rng([self.rng_seed, 7, c])
        u = rng.random((WORLD_CHUNK, self.graph.n_edges))[:n]
        return (u < self.graph.prob).astype(np.uint8)

    def _chunks(self):
        if self._worlds is not None:
            yield self._worlds
            return
        for c in range(math.ceil(self.R / WORLD_CHUNK)):
            yield self._chunk(c)

    def reach(self, positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(counts per node, reached size per world)`` for node positions."""
        indptr, indices = self.graph.csr
        counts = np.zeros(self.graph.n_nodes, dtype=np.int64)
        sizes = []
        for live in self._chunks():
            c, s = kernels.ic_reach(indptr, indices, live, positions)
            counts += c
            sizes.append(s)
        return counts, np.concatenate(sizes) if sizes else np.zeros(0, dtype=np.int64)

    def sizes(self, seeds) -> np.ndarray:
        pos = _positions(self.graph, seeds)
        if not len(pos):
            return np.zeros(self.R, dtype=np.int64)
        return self.reach(pos)[1]

    def spread(self, seeds) -> SpreadEstimate:
        pos = _positions(self.graph, seeds)
        if not len(pos):
            return SpreadEstimate(0.0, 0.0, self.R)
        sizes = self.reach(pos)[1].astype(np.float64)
        se = float(sizes.std(ddof=1) / math.sqrt(self.R)) if self.R > 1 else 0.0
        return SpreadEstimate(float(sizes.mean()), se, self.R)

    def activation(self, seed) -> tuple[np.ndarray, np.ndarray]:
        """Sparse ``(node positions, probability)`` of activation from ``{seed}``."""
        pos = _positions(self.graph, [seed])
        key = int(pos[0])
        with self._lock:
            hit = self._activation.get(key)
            if hit is not None:
                self._activation.move_to_end(key)
                return hit
        counts, _ = self.reach(pos)
        nz = np.flatnonzero(counts)
        val = (nz, counts[nz] / self.R)
        with self._lock:
            val = self._activation.setdefault(key, val)
            self._activation.move_to_end(key)
            while len(self._activation) > self.cache_size:
                self._activation.popitem(last=False)
        return val


# keyed by id(graph); entries are dropped when the graph is collected
_estimators: dict[int, dict] = {}


def _estimator(graph, R, rng_seed) -> MonteCarloSpread:
    per_graph = _estimators.get(id(graph))
    if per_graph is None:
        per_graph = _estimators[id(graph)] = {}
        weakref.finalize(graph, _estimators.pop, id(graph), None)
    key = (int(R), int(rng_seed))
    if key not in per_graph:
        per_graph[key] = MonteCarloSpread(graph, R, rng_seed)
    return per_graph[key]


def estimate_spread(graph: SocialGraph, seeds, R: int = 1000, rng_seed: int = 0) -> SpreadEstimate:
    if R < 1:
        raise ConfigError("simulation count R must be >= 1")
    return MonteCarloSpread(graph, R, rng_seed).spread(seeds)


def activation_probability(graph: SocialGraph, seed, R: int = 1000, rng_seed: int = 0) -> dict[int, float]:
    """Fraction of the R cascades from ``{seed}`` reaching each node (zeros omitted)."""
    if R < 1:
        raise ConfigError("simulation count R must be >= 1")
    pos, p = _estimator(graph, R, rng_seed).activation(seed)
    return {int(graph.nodes[i]): float(q) for i, q in zip(pos, p)}


# ---------------------------------------------------------------- exact oracle


class ExactSpread:
    """Expectations over all 2^|E| live-edge worlds, weighted by probability.

    Nodes touching an edge get one bit of a uint64 reach mask per world;
    isolated nodes only ever reach themselves.
    """

    def __init__(self, graph: SocialGraph):
        m = graph.n_edges
        if m > MAX_EXACT_EDGES:
            raise ConfigError(f"exact diffusion needs <= {MAX_EXACT_EDGES} edges, graph has {m}")
        self.graph = graph
        incident = np.union1d(graph.src, graph.dst)
        self._bit = {int(v): i for i, v in enumerate(incident)}
        self._incident = incident
        worlds = np.arange(1 << m, dtype=np.uint64)
        self._live = [((worlds >> np.uint64(e)) & np.uint64(1)) for e in range(m)]
        w = np.ones(1 << m)
        for e in range(m):
            w *= np.where(self._live[e].astype(bool), graph.prob[e], 1.0 - graph.prob[e])
        self.weights = w
        self._src_bit = [np.uint64(self._bit[int(s)]) for s in graph.src]
        self._dst_bit = [np.uint64(self._bit[int(d)]) for d in graph.dst]
        self._closure: dict[int, np.ndarray] = {}

    def closure(self, node: int) -> np.ndarray | None:
        """Per-world reach mask from a single node (None for isolated nodes)."""
        node = int(node)
        if node not in self._bit:
            if node not in self.graph.index:
                raise DataError(f"node {node} not in graph")
            return None
        if node not in self._closure:
            one = np.uint64(1)
            reach = np.full(len(self.weights), one << np.uint64(self._bit[node]), dtype=np.uint64)
            while True:
                new = reach.copy()
                for live, s, d in zip(self._live, self._src_bit, self._dst_bit):
                    new |= (((reach >> s) & one) & live) << d
                if np.array_equal(new, reach):
                    break
                reach = new
            self._closure[node] = reach
        return self._closure[node]

    def union(self, seeds) -> tuple[np.ndarray, int]:
        acc = np.zeros(len(self.weights), dtype=np.uint64)
        isolated = 0
        for s in set(int(v) for v in seeds):
            c = self.closure(s)
            if c is None:
                isolated += 1
            else:
                acc |= c
        return acc, isolated

    def spread_of_mask(self, mask: np.ndarray, isolated: int = 0) -> float:
        return float(np.dot(self.weights, np.bitwise_count(mask).astype(np.float64))) + isolated

    def spread(self, seeds) -> float:
        seeds = list(seeds)
        if not seeds:
            return 0.0
        return self.spread_of_mask(*self.union(seeds))

    def activation(self, seed) -> dict[int, float]:
        c = self.closure(seed)
        if c is None:
            return {int(seed): 1.0}
        out = {}
        for v, b in self._bit.items():
            p = float(np.dot(self.weights, ((c >> np.uint64(b)) & np.uint64(1)).astype(np.float64)))
            if p > 0:
                out[v] = p
        out[int(seed)] = 1.0
        return out


def exact_spread(graph: SocialGraph, seeds) -> float:
    seeds = list(seeds)
    for s in seeds:
        if int(s) not in graph.index:
            raise DataError(f"seed {s} not in graph")
    return ExactSpread(graph).spread(seeds)
