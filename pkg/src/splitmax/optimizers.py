"""Budget-constrained selection of billboard slots and seed nodes."""

from __future__ import annotations

import heapq
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .combined import Item, Objective, ObjectiveValue, seed, slot
from .data import ConfigError

log = logging.getLogger(__name__)

_KIND_RANK = {"slot": 0, "seed": 1}
DEADBAND_SIGMAS = 3.0


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    kind: str
    id: int
    cost: float
    gain: float
    remaining: float


@dataclass
class GreedyTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def __iter__(self):
        return iter(self.steps)

    def __len__(self):
        return len(self.steps)

    @property
    def sequence(self) -> list[Item]:
        return [Item(s.kind, s.id) for s in self.steps]

    def to_jsonl(self, **extra) -> str:
        return "".join(json.dumps({**extra, **asdict(s)}, sort_keys=True) + "\n" for s in self.steps)


@dataclass(frozen=True)
class Solution:
    chosen_slots: tuple[int, ...]
    chosen_seeds: tuple[int, ...]
    spent_billboard: float
    spent_social: float
    value: ObjectiveValue
    budget: float

    @property
    def phi_value(self) -> float:
        return self.value.phi

    @property
    def spent(self) -> float:
        return self.spent_billboard + self.spent_social

    @property
    def split(self) -> tuple[float, float]:
        """Billboard and social shares of the spent budget (zeros when nothing is spent)."""
        total = self.spent
        if total <= 0:
            return (0.0, 0.0)
        return (self.spent_billboard / total, self.spent_social / total)


@dataclass
class Candidate:
    kind: str
    id: int
    cost: float
    cached_key: float
    key_version: int

    @property
    def item(self) -> Item:
        return Item(self.kind, self.id)


def _tie_key(item: Item, cost: float):
    return (cost, _KIND_RANK[item.kind], item.id)


class _Run:
    def __init__(self, objective: Objective, budget: float):
        self.obj = objective
        self.budget = float(budget)
        self.remaining = float(budget)
        self.sel = objective.selection()
        self.trace = GreedyTrace()

    def affordable(self, item: Item) -> bool:
        return self.obj.cost(item) <= self.remaining

    def take(self, item: Item, gain: float | None = None) -> None:
        cost = self.obj.cost(item)
        if cost > self.remaining:
            raise AssertionError(f"{item} exceeds remaining budget")
        if gain is None:
            gain = self.sel.gain(item)[0]
        self.sel.add(item)
        self.remaining -= cost
        self.trace.steps.append(TraceStep(len(self.trace), item.kind, item.id, cost, float(gain), self.remaining))

    def finish(self) -> tuple[Solution, GreedyTrace]:
        slots = tuple(self.sel.slots)
        seeds = tuple(self.sel.seeds)
        b1 = math.fsum(self.obj.slot_cost[s] for s in slots)
        b2 = math.fsum(self.obj.seed_cost[v] for v in seeds)
        if b1 + b2 > self.budget * (1 + 1e-12) + 1e-9:
            raise AssertionError("budget exceeded")
        return Solution(slots, seeds, b1, b2, self.sel.value(), self.budget), self.trace


def _objective(instance, mode, objective):
    return objective if objective is not None else Objective(instance, mode)


def _singletons(obj: Objective) -> dict[Item, float]:
    """Objective value of each candidate alone."""
    sel = obj.selection()
    return {item: sel.gain(item)[0] for item in obj.candidates()}


def _pack_count(order: list[Item], obj: Objective, budget: float) -> int:
    left, count = budget, 0
    for item in order:
        if left <= 0:
            break
        count += 1
        left -= obj.cost(item)
    return count


def randomized_greedy(instance, epsilon: float = 0.01, mode=None, rng_seed: int = 0, objective=None):
    """Sampled gain-per-cost greedy over both channels.

    ``k`` is the smaller of the two per-channel packing counts obtained by
    filling the whole budget with items in ascending singleton order; each
    round samples ``ceil(pool / k * ln(1/epsilon))`` items per channel.
    """
    if not 0 < epsilon < 1:
        raise ConfigError("epsilon must lie in (0, 1)")
    obj = _objective(instance, mode, objective)
    run = _Run(obj, instance.budget)
    if run.budget <= 0:
        return run.finish()
    single = _singletons(obj)
    slot_pool = [slot(s) for s in instance.slots.ids]
    seed_pool = [seed(v) for v in instance.graph.nodes.tolist()]
    asc = lambda items: sorted(items, key=lambda x: (single[x], x.id))
    k_slots = _pack_count(asc(slot_pool), obj, run.budget)
    k_seeds = _pack_count(asc(seed_pool), obj, run.budget)
    k = min(k_slots, k_seeds) or max(k_slots, k_seeds, 1)
    factor = math.log(1.0 / epsilon)
    rng = np.random.default_rng(rng_seed)

    def best_of(pool):
        if not pool:
            return None
        size = min(len(pool), max(1, math.ceil(len(pool) / k * factor)))
        sample = pool if size == len(pool) else [pool[i] for i in sorted(rng.choice(len(pool), size, replace=False))]
        best = None
        for item in sample:
            g, se = run.sel.gain(item)
            c = obj.cost(item)
            key = (-g / c, *_tie_key(item, c))
            if best is None or key < best[0]:
                best = (key, item, g, se, c)
        return best

    while run.remaining > 0 and (slot_pool or seed_pool):
        b, s = best_of(slot_pool), best_of(seed_pool)
        if b is None or s is None:
            pick = b or s
        else:
            rb, rs = b[2] / b[4], s[2] / s[4]
            band = DEADBAND_SIGMAS * math.hypot(b[3] / b[4], s[3] / s[4])
            if band > 0 and abs(rb - rs) < band:
                pick = b if b[4] <= s[4] else s
            else:
                pick = b if rb >= rs else s
        _, item, g, _, c = pick
        if c <= run.remaining:
            run.take(item, g)
        (slot_pool if item.kind == "slot" else seed_pool).remove(item)
    return run.finish()


def _phase_one(run: _Run) -> set[Item]:
    """Best singleton gain-per-cost slot and seed; both if jointly affordable,
    otherwise the better affordable one."""
    obj = run.obj
    single = _singletons(obj)

    def best(kind):
        items = [x for x in single if x.kind == kind]
        if not items:
            return None
        return min(items, key=lambda x: (-single[x] / obj.cost(x), *_tie_key(x, obj.cost(x))))

    b0, s0 = best("slot"), best("seed")
    if b0 is not None and s0 is not None and obj.cost(b0) + obj.cost(s0) <= run.remaining:
        run.take(b0)
        run.take(s0)
    else:
        options = [x for x in (b0, s0) if x is not None and run.affordable(x)]
        if options:
            run.take(min(options, key=lambda x: (-single[x] / obj.cost(x), *_tie_key(x, obj.cost(x)))))
    return {slot(s) for s in run.sel.slots} | {seed(v) for v in run.sel.seeds}


def tpg(instance, mode=None, objective=None):
    """Two-phase greedy: balanced initialization, then lazy gain-per-cost greedy.

    Queue keys are bounds on an item's gain per cost valid for every later
    selection, so a popped item whose fresh ratio beats the next key is the
    true best affordable item.
    """
    obj = _objective(instance, mode, objective)
    run = _Run(obj, instance.budget)
    if run.budget <= 0:
        return run.finish()
    chosen = _phase_one(run)

    heap: list = []
    cands: dict[Item, Candidate] = {}
    exact: dict[Item, float] = {}
    bound: dict[Item, float] = {}
    version = 0

    def push(c: Candidate):
        heapq.heappush(heap, (-c.cached_key, *_tie_key(c.item, c.cost), c.key_version, id(c), c))

    def head():
        while heap and cands.get(heap[0][-1].item) is not heap[0][-1]:
            heapq.heappop(heap)
        return heap[0][-1] if heap else None

    for item in obj.candidates():
        if item in chosen:
            continue
        cost = obj.cost(item)
        bound[item] = run.sel.upper_bound(item) / cost
        cands[item] = c = Candidate(item.kind, item.id, cost, bound[item], -1)
        push(c)

    touched: list[Item] = []
    while run.remaining > 0:
        top = head()
        if top is None:
            break
        heapq.heappop(heap)
        item = top.item
        del cands[item]
        if top.cost > run.remaining:
            continue
        if top.key_version == version:
            commit, gain = True, exact[item]
        else:
            gain = run.sel.gain(item)[0]
            bound[item] = run.sel.upper_bound(item) / top.cost
            nxt = head()
            commit = nxt is None or gain / top.cost >= nxt.cached_key
            if not commit:
                exact[item] = gain
                cands[item] = c = Candidate(item.kind, item.id, top.cost, gain / top.cost, version)
                push(c)
                touched.append(item)
        if commit:
            run.take(item, gain)
            version += 1
            for t in touched:
                if t in cands:
                    cands[t] = c = Candidate(t.kind, t.id, cands[t].cost, bound[t], -1)
                    push(c)
            touched = []
    return run.finish()


def eager_greedy(instance, mode=None, objective=None):
    """TPG's phase one followed by a full gain recomputation every round."""
    obj = _objective(instance, mode, objective)
    run = _Run(obj, instance.budget)
    if run.budget <= 0:
        return run.finish()
    chosen = _phase_one(run)
    pool = [x for x in obj.candidates() if x not in chosen]
    while run.remaining > 0:
        pool = [x for x in pool if run.affordable(x)]
        if not pool:
            break
        scored = []
        for item in pool:
            c = obj.cost(item)
            g = run.sel.gain(item)[0]
            scored.append(((-g / c, *_tie_key(item, c)), item, g))
        _, item, g = min(scored)
        run.take(item, g)
        pool.remove(item)
    return run.finish()


# ---------------------------------------------------------------- baselines


def _walk(run: _Run, order) -> tuple[Solution, GreedyTrace]:
    for item in order:
        if run.remaining <= 0:
            break
        if run.affordable(item):
            run.take(item)
    return run.finish()


def baseline_random(instance, rng_seed: int = 0, mode=None, objective=None):
    """Uniform picks from the affordable pool until nothing affordable is left.

    Taking the first affordable item of a random permutation is the same
    draw, and keeps the randomness independent of the budget.
    """
    obj = _objective(instance, mode, objective)
    run = _Run(obj, instance.budget)
    pool = obj.candidates()
    order = [pool[i] for i in np.random.default_rng(rng_seed).permutation(len(pool))]
    return _walk(run, order)


def baseline_top_k(instance, mode=None, objective=None):
    obj = _objective(instance, mode, objective)
    run = _Run(obj, instance.budget)
    single = _singletons(obj)
    order = sorted(single, key=lambda x: (-single[x], *_tie_key(x, obj.cost(x))))
    return _walk(run, order)


def _merge(obj: Objective, slot_score: dict, seed_score: dict, how: str) -> list[Item]:
    def ranked(scores):
        return sorted(scores, key=lambda x: (-scores[x], *_tie_key(x, obj.cost(x))))

    a, b = ranked(slot_score), ranked(seed_score)
    if how == "alternate":
        out = []
        for i in range(max(len(a), len(b))):
            out.extend(x[i] for x in (a, b) if i < len(x))
        return out
    if how != "rank":
        raise ConfigError(f"unknown merge strategy {how!r}")
    norm = {}
    for seq in (a, b):
        n = len(seq)
        for r, item in enumerate(seq):
            norm[item] = 1.0 if n == 1 else 1.0 - r / (n - 1)
    return sorted(norm, key=lambda x: (-norm[x], *_tie_key(x, obj.cost(x))))


def baseline_hdh(instance, merge: str = "rank", mode=None, objective=None):
    """Slots by impression count, seeds by out-degree."""
    obj = _objective(instance, mode, objective)
    run = _Run(obj, instance.budget)
    imp = obj.matrix.impressions()
    slot_score = {slot(s): float(imp[i]) for i, s in enumerate(obj.matrix.slot_ids.tolist())}
    deg = instance.graph.out_degree()
    seed_score = {seed(v): float(d) for v, d in zip(instance.graph.nodes.tolist(), deg)}
    return _walk(run, _merge(obj, slot_score, seed_score, merge))


def pagerank(graph, damping: float = 0.85, max_iter: int = 100, tol: float = 1e-8) -> np.ndarray:
    """Power iteration; dangling mass is spread uniformly. Scores follow ``graph.nodes``."""
    n = graph.n_nodes
    if n == 0:
        return np.zeros(0)
    out = graph.out_degree().astype(np.float64)
    src = np.searchsorted(graph.nodes, graph.src)
    dst = np.searchsorted(graph.nodes, graph.dst)
    dangling = out == 0
    x = np.full(n, 1.0 / n)
    for it in range(max_iter):
        share = np.where(dangling, 0.0, x / np.where(dangling, 1.0, out))
        new = np.bincount(dst, weights=share[src], minlength=n)
        new = (1.0 - damping) / n + damping * (new + x[dangling].sum() / n)
        delta = np.abs(new - x).sum()
        x = new
        if delta < tol:
            break
    else:
        log.info("pagerank: no convergence within %d iterations (L1 change %.3g)", max_iter, delta)
    return x


def baseline_pagerank(instance, damping: float = 0.85, iterations: int = 100, merge: str = "rank", mode=None, objective=None):
    obj = _objective(instance, mode, objective)
    run = _Run(obj, instance.budget)
    pr = pagerank(instance.graph, damping, iterations)
    seed_score = {seed(v): float(p) for v, p in zip(instance.graph.nodes.tolist(), pr)}
    sel = obj.selection()
    slot_score = {slot(s): sel.gain(slot(s))[0] for s in instance.slots.ids}
    return _walk(run, _merge(obj, slot_score, seed_score, merge))


ALGORITHMS = ("rg", "tpg", "random", "topk", "hdh", "pagerank")


def run_algorithm(name: str, instance, mode=None, *, epsilon: float = 0.01, rng_seed: int = 0, merge: str = "rank", objective=None):
    """Dispatch by CLI name; returns ``(Solution, GreedyTrace)``."""
    if name == "rg":
        return randomized_greedy(instance, epsilon, mode, rng_seed, objective)
    if name == "tpg":
        return tpg(instance, mode, objective)
    if name == "random":
        return baseline_random(instance, rng_seed, mode, objective)
    if name == "topk":
        return baseline_top_k(instance, mode, objective)
    if name == "hdh":
        return baseline_hdh(instance, merge, mode, objective)
    if name == "pagerank":
        return baseline_pagerank(instance, merge=merge, mode=mode, objective=objective)
    raise ConfigError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
