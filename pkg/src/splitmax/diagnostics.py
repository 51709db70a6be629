"""Brute-force oracles and structural measurements on small instances.

Everything here works on a dense table ``values[S, N]`` of the objective
over all slot subsets ``S`` and seed subsets ``N`` (bitmask-indexed), so
the same routines apply to any bi-set function.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .combined import COMPONENTS, Exact, Objective
from .data import ConfigError, generate_synthetic

MAX_ELEMS = 10
MAX_BRUTE_FORCE = 16
WITNESS_TOL = 1e-9


def _bit_matrix(n: int) -> np.ndarray:
    """Row m holds the bits of m (shape 2^n x n)."""
    m = np.arange(1 << n)[:, None]
    return ((m >> np.arange(n)) & 1).astype(np.float64)


def _subset_products(rows: np.ndarray) -> np.ndarray:
    """Product of ``rows[j]`` over the bits j of every mask."""
    k, width = rows.shape
    out = np.ones((1 << k, width))
    for j in range(k):
        out[1 << j : 1 << (j + 1)] = out[: 1 << j] * rows[j]
    return out


@dataclass
class PhiTable:
    values: np.ndarray
    slot_ids: tuple = ()
    seed_ids: tuple = ()
    slot_costs: np.ndarray | None = None
    seed_costs: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        a = int(round(math.log2(self.values.shape[0])))
        b = int(round(math.log2(self.values.shape[1])))
        if self.values.shape != (1 << a, 1 << b):
            raise ValueError("table dimensions must be powers of two")
        self.slot_ids = tuple(self.slot_ids) or tuple(range(a))
        self.seed_ids = tuple(self.seed_ids) or tuple(range(b))

    @property
    def n_slots(self) -> int:
        return len(self.slot_ids)

    @property
    def n_seeds(self) -> int:
        return len(self.seed_ids)

    def slots_of(self, mask: int) -> tuple:
        return tuple(s for j, s in enumerate(self.slot_ids) if mask >> j & 1)

    def seeds_of(self, mask: int) -> tuple:
        return tuple(v for j, v in enumerate(self.seed_ids) if mask >> j & 1)

    def transpose(self) -> "PhiTable":
        return PhiTable(self.values.T, self.seed_ids, self.slot_ids, self.seed_costs, self.slot_costs)

    @classmethod
    def from_objective(cls, obj: Objective, slot_ids=None, seed_ids=None, max_elems: int = MAX_ELEMS) -> "PhiTable":
        if obj.exact is None:
            raise ConfigError("diagnostics require exact evaluation mode")
        slot_ids = list(obj.instance.slots.ids if slot_ids is None else slot_ids)[:max_elems]
        seed_ids = list(obj.graph.nodes.tolist() if seed_ids is None else seed_ids)[:max_elems]
        a, b, n = len(slot_ids), len(seed_ids), obj.n_users
        c = obj.components

        bill_rows = np.ones((a, n))
        for j, s in enumerate(slot_ids):
            u, p = obj.matrix.row(s)
            bill_rows[j, u] = 1.0 - p
        p_bill = 1.0 - _subset_products(bill_rows)

        soc_rows = np.ones((b, n))
        for j, v in enumerate(seed_ids):
            pos, p = obj.activation(v)
            soc_rows[j, pos] = 1.0 - p
        p_soc = 1.0 - _subset_products(soc_rows)

        values = np.zeros((1 << a, 1 << b))
        if "billboard" in c:
            values += p_bill.sum(axis=1)[:, None]
        if "social" in c:
            values += _exact_spreads(obj, seed_ids)[None, :]
        if "interaction" in c:
            values += p_bill @ p_soc.T
        values[0, 0] = 0.0
        return cls(
            values,
            tuple(slot_ids),
            tuple(seed_ids),
            np.array([obj.slot_cost[s] for s in slot_ids]),
            np.array([obj.seed_cost[v] for v in seed_ids]),
        )


def _exact_spreads(obj: Objective, seed_ids) -> np.ndarray:
    """Exact spread of every seed subset, depth-first over unions of closures."""
    ex = obj.exact
    b = len(seed_ids)
    closures = [ex.closure(v) for v in seed_ids]
    out = np.zeros(1 << b)

    def rec(start, mask, arr, iso):
        for j in range(start, b):
            m2 = mask | (1 << j)
            if closures[j] is None:
                arr2, iso2 = arr, iso + 1
            else:
                arr2, iso2 = (closures[j] if arr is None else arr | closures[j]), iso
            out[m2] = (ex.spread_of_mask(arr2) if arr2 is not None else 0.0) + iso2
            rec(j + 1, m2, arr2, iso2)

    rec(0, 0, None, 0)
    return out


def phi_table(instance, max_elems: int = MAX_ELEMS, components=COMPONENTS, objective=None) -> PhiTable:
    obj = objective if objective is not None else Objective(instance, Exact(), components)
    return PhiTable.from_objective(obj, max_elems=max_elems)


def _tol(values: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.max(np.abs(values))) if values.size else 1.0)


# ---------------------------------------------------------------- optimum


@dataclass(frozen=True)
class OracleSolution:
    best_S: tuple
    best_N: tuple
    phi_opt: float
    enumerated_count: int


def _subset_costs(costs: np.ndarray) -> np.ndarray:
    return _bit_matrix(len(costs)) @ np.asarray(costs, dtype=np.float64) if len(costs) else np.zeros(1)


def brute_force_optimum(source, budget: float | None = None) -> OracleSolution:
    """Best feasible (S, N) pair by exhaustive enumeration.

    ``source`` is a ProblemInstance (evaluated exactly) or a PhiTable with
    costs. Ties go to the lexicographically smallest id sets.
    """
    if isinstance(source, PhiTable):
        table = source
        if budget is None:
            raise ValueError("budget required with a PhiTable")
    else:
        n = len(source.slots) + source.graph.n_nodes
        if n > MAX_BRUTE_FORCE:
            raise ConfigError(f"brute force limited to {MAX_BRUTE_FORCE} candidates, instance has {n}")
        table = phi_table(source, max_elems=MAX_BRUTE_FORCE)
        budget = source.budget if budget is None else budget
    if table.n_slots + table.n_seeds > MAX_BRUTE_FORCE:
        raise ConfigError(f"brute force limited to {MAX_BRUTE_FORCE} candidates")
    cs = _subset_costs(table.slot_costs)
    cn = _subset_costs(table.seed_costs)
    feasible = cs[:, None] + cn[None, :] <= budget + 1e-9 * max(1.0, budget)
    vals = np.where(feasible, table.values, -np.inf)
    best = vals.max()
    tied = np.argwhere(vals >= best - _tol(table.values))
    pairs = sorted((tuple(sorted(table.slots_of(int(s)))), tuple(sorted(table.seeds_of(int(v))))) for s, v in tied)
    S, N = pairs[0]
    return OracleSolution(S, N, float(best), int(feasible.sum()))


# ---------------------------------------------------------------- gamma / alpha


def _gamma_side(values: np.ndarray) -> float:
    """min over (q, Omega, N) of sum of singleton gains / joint gain; inf if no case."""
    a = int(math.log2(values.shape[0]))
    tol = _tol(values)
    best = math.inf
    for q in range(1 << a):
        free = [j for j in range(a) if not q >> j & 1]
        if not free:
            continue
        base = values[q]
        single = np.stack([values[q | 1 << j] - base for j in free])
        bits = _bit_matrix(len(free))[1:]
        sub = (bits @ (1 << np.array(free))).astype(np.int64)
        num = bits @ single
        den = values[q | sub] - base
        ok = den > tol
        if ok.any():
            best = min(best, float(np.min(num[ok] / den[ok])))
    return best


def measure_gamma_detail(table: PhiTable) -> tuple[float, bool]:
    """Bisubmodularity ratio and whether any case had a positive joint gain."""
    r = min(_gamma_side(table.values), _gamma_side(table.values.T))
    if r == math.inf:
        return 1.0, False
    return min(1.0, max(r, np.finfo(float).tiny)), True


def measure_gamma(source, max_elems: int = MAX_ELEMS) -> float:
    table = source if isinstance(source, PhiTable) else phi_table(source, max_elems)
    return measure_gamma_detail(table)[0]


def _superset_min(g: np.ndarray, n_bits: int, skip: int) -> np.ndarray:
    out = g.copy()
    for j in range(n_bits):
        if j == skip:
            continue
        v = out.reshape(-1, 2, 1 << j, out.shape[-1])
        np.minimum(v[:, 0], v[:, 1], out=v[:, 0])
    return out


def _alpha_side(values: np.ndarray) -> float:
    """min over (T, U >= T, i not in U, N) of gain(i | U) / gain(i | T); inf if no case."""
    a = int(math.log2(values.shape[0]))
    tol = _tol(values)
    masks = np.arange(1 << a)
    best = math.inf
    for i in range(a):
        without = (masks >> i & 1) == 0
        g = np.full(values.shape, np.inf)
        g[without] = values[masks[without] | 1 << i] - values[without]
        gmin = _superset_min(g, a, i)
        gi, mi = g[without], gmin[without]
        ok = gi > tol
        if ok.any():
            best = min(best, float(np.min(mi[ok] / gi[ok])))
    return best


def measure_alpha_detail(table: PhiTable) -> tuple[float, bool]:
    r = min(_alpha_side(table.values), _alpha_side(table.values.T))
    if r == math.inf:
        return 0.0, False
    return min(1.0, max(0.0, 1.0 - r)), True


def measure_alpha(source, max_elems: int = MAX_ELEMS) -> float:
    table = source if isinstance(source, PhiTable) else phi_table(source, max_elems)
    return measure_alpha_detail(table)[0]


def approximation_bound(gamma: float, alpha: float) -> float:
    """``(1/alpha) * (1 - exp(-gamma * alpha))``, with its limit ``gamma`` at alpha = 0."""
    if alpha == 0:
        return gamma
    return -math.expm1(-gamma * alpha) / alpha


# ---------------------------------------------------------------- bisubmodularity


@dataclass(frozen=True)
class Witness:
    """Marginal gain of ``element`` grows from (S, N) to the larger (S2, N2)."""

    kind: str
    element: int
    S: tuple
    N: tuple
    S2: tuple
    N2: tuple
    gain_small: float
    gain_large: float

    @property
    def excess(self) -> float:
        return self.gain_large - self.gain_small

    def verify(self, objective: Objective, tol: float = WITNESS_TOL) -> bool:
        """Recompute both marginal gains directly from the objective."""
        def gain(S, N):
            if self.kind == "slot":
                return objective.phi(list(S) + [self.element], N).phi - objective.phi(S, N).phi
            return objective.phi(S, list(N) + [self.element]).phi - objective.phi(S, N).phi

        return gain(self.S2, self.N2) - gain(self.S, self.N) > tol


def _superset_max_2d(g: np.ndarray, a: int, b: int, skip: int) -> np.ndarray:
    out = g.copy()
    for j in range(a):
        if j != skip:
            v = out.reshape(-1, 2, 1 << j, out.shape[1])
            np.maximum(v[:, 0], v[:, 1], out=v[:, 0])
    for j in range(b):
        v = out.reshape(out.shape[0], -1, 2, 1 << j)
        np.maximum(v[:, :, 0], v[:, :, 1], out=v[:, :, 0])
    return out


def _violation_in(table: PhiTable, tol: float = WITNESS_TOL) -> Witness | None:
    for kind, t in (("slot", table), ("seed", table.transpose())):
        V = t.values
        a, b = t.n_slots, t.n_seeds
        masks = np.arange(1 << a)
        for i in range(a):
            without = (masks >> i & 1) == 0
            g = np.full(V.shape, -np.inf)
            g[without] = V[masks[without] | 1 << i] - V[without]
            smax = _superset_max_2d(g, a, b, i)
            with np.errstate(invalid="ignore"):
                hits = np.argwhere(without[:, None] & (smax - g > tol))
            if not len(hits):
                continue
            A, B = (int(x) for x in hits[0])
            target = smax[A, B]
            for A2 in range(1 << a):
                if A2 & A != A or A2 >> i & 1:
                    continue
                for B2 in range(1 << b):
                    if B2 & B == B and g[A2, B2] == target:
                        S, S2 = t.slots_of(A), t.slots_of(A2)
                        N, N2 = t.seeds_of(B), t.seeds_of(B2)
                        if kind == "seed":
                            S, N, S2, N2 = N, S, N2, S2
                        return Witness(kind, t.slot_ids[i], S, N, S2, N2, float(g[A, B]), float(target))
    return None


@dataclass(frozen=True)
class ViolationSearch:
    n_instances: int = 1000
    n_users: int = 6
    n_billboards: int = 2
    slots_per_billboard: int = 2
    n_edges: int = 6
    components: tuple = COMPONENTS


def find_bisubmodularity_violation(config: ViolationSearch = ViolationSearch(), rng_seed: int = 0):
    """Scan random small instances for a bisubmodularity violation.

    Returns ``(witness, instance, instances_searched)``; witness is None when
    none was found within ``config.n_instances``.
    """
    from .diffusion import Uniform

    rng = np.random.default_rng(rng_seed)
    for k in range(config.n_instances):
        inst = generate_synthetic(
            config.n_users,
            config.n_billboards,
            min(config.n_edges, config.n_users * max(config.n_users - 1, 0)),
            extent=300.0,
            horizon=(0, 3600 * config.slots_per_billboard),
            prob_model=Uniform(float(rng.uniform(0.2, 0.9))),
            rng_seed=int(rng.integers(2**31)),
        )
        obj = Objective(inst, Exact(), config.components)
        w = _violation_in(PhiTable.from_objective(obj))
        if w is not None:
            return w, inst, k + 1
    return None, None, config.n_instances


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class StructureReport:
    gamma: float
    alpha: float
    bound: float
    violation_witness: Witness | None = None
    gamma_defined: bool = True
    alpha_defined: bool = True

    @classmethod
    def from_measures(cls, gamma, alpha, witness=None, gamma_defined=True, alpha_defined=True):
        return cls(gamma, alpha, approximation_bound(gamma, alpha), witness, gamma_defined, alpha_defined)

    def with_alpha(self, alpha: float) -> "StructureReport":
        return StructureReport.from_measures(self.gamma, alpha, self.violation_witness, self.gamma_defined, self.alpha_defined)

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.violation_witness is not None:
            d["violation_witness"]["excess"] = self.violation_witness.excess
        return d


def structure_report(source, max_elems: int = MAX_ELEMS) -> StructureReport:
    table = source if isinstance(source, PhiTable) else phi_table(source, max_elems)
    gamma, gd = measure_gamma_detail(table)
    alpha, ad = measure_alpha_detail(table)
    return StructureReport.from_measures(gamma, alpha, _violation_in(table), gd, ad)


def verify_bound(phi_value: float, report: StructureReport, oracle: OracleSolution, mode=None) -> tuple[bool, float]:
    """Whether ``phi_value`` meets ``bound * phi_opt`` (1e-9 slack) and the margin."""
    if mode is not None and not isinstance(mode, Exact):
        raise ConfigError("bound verification needs exact-mode values")
    margin = phi_value - report.bound * oracle.phi_opt
    return margin >= -1e-9, margin
