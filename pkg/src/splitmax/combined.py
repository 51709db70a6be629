"""Combined objective: billboard influence + social spread + interaction effect."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .billboard import BillboardCoverage, SlotUserMatrix, coverage, influence
from .data import ConfigError
from .diffusion import MAX_EXACT_EDGES, ExactSpread, MonteCarloSpread

COMPONENTS = ("billboard", "social", "interaction")


@dataclass(frozen=True)
class MonteCarlo:
    R: int = 1000
    rng_seed: int = 0


@dataclass(frozen=True)
class Exact:
    pass


class Item(NamedTuple):
    kind: str  # "slot" or "seed"
    id: int


def slot(i) -> Item:
    return Item("slot", int(i))


def seed(i) -> Item:
    return Item("seed", int(i))


@dataclass(frozen=True)
class ObjectiveValue:
    phi: float
    billboard: float
    social: float
    interaction: float
    std_error: float = 0.0

    @property
    def components(self) -> tuple[float, float, float]:
        return (self.billboard, self.social, self.interaction)


def interaction_effect(matrix: SlotUserMatrix, slot_ids, seeds, activation: Mapping[int, Mapping[int, float]]) -> float:
    """Sum over users of P(reached by a slot) * P(activated by a seed).

    ``activation[v]`` maps user id to the probability that seed ``v``
    activates that user.
    """
    slot_ids, seeds = list(slot_ids), list(seeds)
    if not slot_ids or not seeds:
        return 0.0
    p_bill = coverage(matrix, slot_ids)
    surv = np.ones(matrix.n_users)
    pos = {int(u): i for i, u in enumerate(matrix.universe)}
    for v in seeds:
        for u, p in activation[v].items():
            if int(u) in pos:
                surv[pos[int(u)]] *= 1.0 - p
    return float(np.dot(p_bill, 1.0 - surv))


class Objective:
    """Evaluates the combined objective on one instance in a fixed mode.

    ``components`` selects which of the three terms enter the objective;
    diagnostics use this to isolate channels.
    """

    def __init__(self, instance, mode=None, components: Iterable[str] = COMPONENTS):
        self.instance = instance
        self.mode = MonteCarlo() if mode is None else mode
        self.components = frozenset(components)
        unknown = self.components - set(COMPONENTS)
        if unknown:
            raise ConfigError(f"unknown objective components {sorted(unknown)}")
        self.matrix = instance.matrix
        graph = instance.graph
        self.graph = graph
        self.universe = instance.universe
        self.node_upos = np.searchsorted(self.universe, graph.nodes)
        if isinstance(self.mode, Exact):
            if graph.n_edges > MAX_EXACT_EDGES:
                raise ConfigError(f"exact mode needs <= {MAX_EXACT_EDGES} edges, graph has {graph.n_edges}")
            self.exact = ExactSpread(graph)
            self.mc = None
        elif isinstance(self.mode, MonteCarlo):
            self.exact = None
            self.mc = MonteCarloSpread(graph, self.mode.R, self.mode.rng_seed)
        else:
            raise ConfigError(f"unknown evaluation mode {self.mode!r}")
        self._act: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._soc_all = None
        self._bill_all = None
        self.slot_cost = dict(zip(instance.slots.ids, instance.slots.costs.tolist()))
        self.seed_cost = dict(zip(graph.nodes.tolist(), graph.seed_cost.tolist()))

    @property
    def n_users(self) -> int:
        return len(self.universe)

    def cost(self, item: Item) -> float:
        return self.slot_cost[item.id] if item.kind == "slot" else self.seed_cost[item.id]

    def candidates(self) -> list[Item]:
        return [slot(s) for s in self.instance.slots.ids] + [seed(v) for v in self.graph.nodes.tolist()]

    def activation(self, v) -> tuple[np.ndarray, np.ndarray]:
        """Activation probabilities from single seed ``v`` as (universe positions, prob)."""
        v = int(v)
        hit = self._act.get(v)
        if hit is None:
            if self.exact is not None:
                d = self.exact.activation(v)
                ids = np.array(sorted(d), dtype=np.int64)
                pos = np.searchsorted(self.universe, ids)
                prob = np.array([d[i] for i in ids.tolist()])
            else:
                gpos, prob = self.mc.activation(v)
                pos = self.node_upos[gpos]
                prob = prob.copy()
                prob[pos == self.node_upos[self.graph.index[v]]] = 1.0
            hit = (pos, prob)
            self._act[v] = hit
        return hit

    def social_survival(self, seeds) -> np.ndarray:
        surv = np.ones(self.n_users)
        for v in seeds:
            pos, p = self.activation(v)
            surv[pos] *= 1.0 - p
        return surv

    def social_spread(self, seeds) -> tuple[float, float]:
        seeds = list(seeds)
        if not seeds:
            return 0.0, 0.0
        if self.exact is not None:
            return self.exact.spread(seeds), 0.0
        est = self.mc.spread(seeds)
        return est.mean, est.std_error

    def phi(self, slot_ids=(), seeds=()) -> ObjectiveValue:
        slot_ids, seeds = list(slot_ids), list(seeds)
        bill = influence(self.matrix, slot_ids) if "billboard" in self.components else 0.0
        soc, se = self.social_spread(seeds) if "social" in self.components else (0.0, 0.0)
        inter = 0.0
        if "interaction" in self.components and slot_ids and seeds:
            inter = float(np.dot(coverage(self.matrix, slot_ids), 1.0 - self.social_survival(seeds)))
        return ObjectiveValue(bill + soc + inter, bill, soc, inter, se)

    def selection(self, slot_ids=(), seeds=()) -> "Selection":
        return Selection(self, slot_ids, seeds)

    def marginal(self, slot_ids, seeds, candidate: Item) -> float:
        return self.selection(slot_ids, seeds).gain(candidate)[0]

    # bounds over every superset of the current selection

    def social_reach_all(self) -> np.ndarray:
        """P(activated) per user if every node were a seed."""
        if self._soc_all is None:
            self._soc_all = 1.0 - self.social_survival(self.graph.nodes.tolist())
        return self._soc_all

    def billboard_reach_all(self) -> np.ndarray:
        if self._bill_all is None:
            self._bill_all = coverage(self.matrix, self.instance.slots.ids)
        return self._bill_all


class Selection:
    """Current (slots, seeds) with cached per-user survival products."""

    def __init__(self, objective: Objective, slot_ids=(), seeds=()):
        self.obj = objective
        self.bill = BillboardCoverage(objective.matrix)
        self.seeds: list[int] = []
        self.soc_surv = np.ones(objective.n_users)
        self._mask = None
        self._isolated = 0
        self._sizes = None
        self._social = 0.0
        self._memo: dict[int, tuple] = {}
        for s in slot_ids:
            self.add(slot(s))
        for v in seeds:
            self.add(seed(v))

    @property
    def slots(self) -> list[int]:
        return self.bill.selected

    def __contains__(self, item: Item) -> bool:
        return item.id in (self.slots if item.kind == "slot" else self.seeds)

    def _social_after(self, v):
        """Social spread with ``v`` added: (value, se of the change, state)."""
        hit = self._memo.get(v)
        if hit is None:
            hit = self._memo[v] = self._compute_social_after(v)
        return hit

    def _compute_social_after(self, v):
        obj = self.obj
        if obj.exact is not None:
            c = obj.exact.closure(v)
            if c is None:
                mask, iso = self._mask, self._isolated + 1
            else:
                mask = c.copy() if self._mask is None else self._mask | c
                iso = self._isolated
            return obj.exact.spread_of_mask(mask, iso) if mask is not None else float(iso), 0.0, (mask, iso)
        sizes = obj.mc.sizes(self.seeds + [v]).astype(np.float64)
        diff = sizes - (self._sizes if self._sizes is not None else 0.0)
        se = float(diff.std(ddof=1) / math.sqrt(len(diff))) if len(diff) > 1 else 0.0
        return float(sizes.mean()), se, sizes

    def slot_gain(self, b) -> float:
        c = self.obj.components
        w = None
        if "interaction" in c:
            w = (1.0 - self.soc_surv) + (1.0 if "billboard" in c else 0.0)
        elif "billboard" not in c:
            return 0.0
        return self.bill.gain(b, w)

    def seed_gain(self, v) -> tuple[float, float]:
        c = self.obj.components
        gain, se = 0.0, 0.0
        if "social" in c:
            value, se, _ = self._social_after(v)
            gain = value - self._social
        if "interaction" in c and self.slots:
            pos, p = self.obj.activation(v)
            p_bill = 1.0 - self.bill.surv[pos]
            gain += float(np.sum(p_bill * p * self.soc_surv[pos]))
        return gain, se

    def gain(self, item: Item) -> tuple[float, float]:
        """Marginal objective gain and its Monte Carlo standard error."""
        if item in self:
            raise ValueError(f"{item.kind} {item.id} already selected")
        if item.kind == "slot":
            return self.slot_gain(item.id), 0.0
        return self.seed_gain(item.id)

    def add(self, item: Item) -> None:
        if item in self:
            raise ValueError(f"{item.kind} {item.id} already selected")
        if item.kind == "slot":
            self.bill.add(item.id)
            return
        v = item.id
        self._memo.pop(v, None)
        if "social" in self.obj.components:
            value, _, state = self._social_after(v)
            self._social = value
            if self.obj.exact is not None:
                self._mask, self._isolated = state
            else:
                self._sizes = state
        pos, p = self.obj.activation(v)
        self.soc_surv[pos] *= 1.0 - p
        self.seeds.append(v)
        self._memo.clear()

    def value(self) -> ObjectiveValue:
        c = self.obj.components
        bill = self.bill.value if "billboard" in c else 0.0
        soc = self._social if "social" in c else 0.0
        inter = 0.0
        if "interaction" in c and self.slots and self.seeds:
            inter = float(np.dot(1.0 - self.bill.surv, 1.0 - self.soc_surv))
        se = 0.0
        if self._sizes is not None and len(self._sizes) > 1:
            se = float(self._sizes.std(ddof=1) / math.sqrt(len(self._sizes)))
        return ObjectiveValue(bill + soc + inter, bill, soc, inter, se)

    def upper_bound(self, item: Item, gain: float | None = None) -> float:
        """Bound on this item's gain at any superset of the current selection.

        Slot gains grow with social coverage at most up to the all-seeds
        coverage; seed gains grow with billboard coverage at most up to the
        all-slots coverage; the social-spread part is submodular.
        """
        c = self.obj.components
        if item.kind == "slot":
            w = (1.0 if "billboard" in c else 0.0) + (self.obj.social_reach_all() if "interaction" in c else 0.0)
            if isinstance(w, float):
                return self.bill.gain(item.id) * w
            return self.bill.gain(item.id, w)
        bound = 0.0
        if "social" in c:
            bound = self._social_after(item.id)[0] - self._social
        if "interaction" in c:
            pos, p = self.obj.activation(item.id)
            bound += float(np.sum(self.obj.billboard_reach_all()[pos] * p * self.soc_surv[pos]))
        return bound


def phi(instance, slot_ids=(), seeds=(), mode=None) -> ObjectiveValue:
    return Objective(instance, mode).phi(slot_ids, seeds)


def marginal_phi(instance, slot_ids, seeds, candidate: Item, mode=None) -> float:
    return Objective(instance, mode).marginal(slot_ids, seeds, candidate)
