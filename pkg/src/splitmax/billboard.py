"""Billboard-side influence: slot/user matching and the noisy-or coverage sum."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

EARTH_RADIUS_M = 6_371_008.8


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters between degree coordinates."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dp = p2 - p1
    dl = np.radians(np.asarray(lon2) - np.asarray(lon1))
    a = np.sin(dp / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def _unit_xyz(lat, lon):
    la, lo = np.radians(lat), np.radians(lon)
    return np.column_stack((np.cos(la) * np.cos(lo), np.cos(la) * np.sin(lo), np.sin(la)))


@dataclass(frozen=True, eq=False)
class SlotUserMatrix:
    """Sparse slot x user probabilities in CSR layout.

    Row ``i`` is the slot at position ``i`` of ``slot_ids``; column indices
    are positions in ``universe``.
    """

    slot_ids: np.ndarray
    universe: np.ndarray
    indptr: np.ndarray
    users: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        for name in ("slot_ids", "universe", "indptr", "users", "prob"):
            getattr(self, name).setflags(write=False)
        object.__setattr__(self, "_pos", {int(s): i for i, s in enumerate(self.slot_ids)})

    @property
    def n_slots(self) -> int:
        return len(self.slot_ids)

    @property
    def n_users(self) -> int:
        return len(self.universe)

    def position(self, slot_id) -> int:
        try:
            return self._pos[int(slot_id)]
        except KeyError:
            raise KeyError(f"slot {slot_id} not in matrix") from None

    def row(self, slot_id) -> tuple[np.ndarray, np.ndarray]:
        i = self.position(slot_id)
        a, b = self.indptr[i], self.indptr[i + 1]
        return self.users[a:b], self.prob[a:b]

    def entries(self) -> dict[tuple[int, int], float]:
        out = {}
        for i, sid in enumerate(self.slot_ids):
            for j in range(self.indptr[i], self.indptr[i + 1]):
                out[(int(sid), int(self.universe[self.users[j]]))] = float(self.prob[j])
        return out

    def impressions(self) -> np.ndarray:
        """Matching-user count per slot."""
        return np.diff(self.indptr)

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n_slots, self.n_users))
        for i in range(self.n_slots):
            a, b = self.indptr[i], self.indptr[i + 1]
            out[i, self.users[a:b]] = self.prob[a:b]
        return out

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["slot_id", "user_id", "prob"])
            for (sid, uid), p in self.entries().items():
                w.writerow([sid, uid, repr(p)])


def build_matrix(db, slots, lam: float, universe=None) -> SlotUserMatrix:
    """Match users to slots: within ``lam`` meters of the billboard and a record
    interval meeting the slot window. The entry is the panel-size ratio to the
    largest billboard; repeated visits do not compound."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    if universe is None:
        universe = db.user_ids
    universe = np.asarray(universe, dtype=np.int64)
    billboards = slots.billboards
    max_size = max((b.panel_size for b in billboards), default=1.0)

    near: dict[int, np.ndarray] = {}
    if len(db) and billboards:
        if db.geodetic:
            tree = cKDTree(_unit_xyz(db.lat, db.lon))
            chord = 2 * np.sin(min(lam / EARTH_RADIUS_M, np.pi) / 2)
            for b in billboards:
                (lat, lon) = b.location
                cand = np.array(tree.query_ball_point(_unit_xyz([lat], [lon])[0], chord * (1 + 1e-9)), dtype=np.int64)
                if len(cand):
                    cand = cand[haversine_m(lat, lon, db.lat[cand], db.lon[cand]) <= lam]
                near[b.billboard_id] = np.sort(cand)
        else:
            pts = np.column_stack((db.lat, db.lon))
            tree = cKDTree(pts)
            for b in billboards:
                c = np.asarray(b.location, dtype=np.float64)
                cand = np.array(tree.query_ball_point(c, lam * (1 + 1e-9)), dtype=np.int64)
                if len(cand):
                    cand = cand[np.hypot(*(pts[cand] - c).T) <= lam]
                near[b.billboard_id] = np.sort(cand)

    user_pos = np.searchsorted(universe, db.users) if len(db) else np.zeros(0, dtype=np.int64)
    if len(db) and np.any(universe[np.minimum(user_pos, len(universe) - 1)] != db.users):
        raise ValueError("trajectory user outside universe")
    indptr = [0]
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for s in slots:
        recs = near.get(s.billboard.billboard_id, np.zeros(0, dtype=np.int64))
        if len(recs):
            hit = recs[(db.t_start[recs] < s.t_end) & (db.t_end[recs] >= s.t_start)]
            u = np.unique(user_pos[hit])
        else:
            u = np.zeros(0, dtype=np.int64)
        cols.append(u)
        vals.append(np.full(len(u), s.billboard.panel_size / max_size))
        indptr.append(indptr[-1] + len(u))
    return SlotUserMatrix(
        np.array(slots.ids, dtype=np.int64),
        universe.copy(),
        np.array(indptr, dtype=np.int64),
        np.concatenate(cols).astype(np.int64) if cols else np.zeros(0, dtype=np.int64),
        np.concatenate(vals) if vals else np.zeros(0),
    )


def survival(matrix: SlotUserMatrix, slot_ids: Iterable) -> np.ndarray:
    """Per-user probability of not being reached by any slot in the set."""
    surv = np.ones(matrix.n_users)
    for sid in slot_ids:
        u, p = matrix.row(sid)
        surv[u] *= 1.0 - p
    return surv


def coverage(matrix: SlotUserMatrix, slot_ids: Iterable) -> np.ndarray:
    """Per-user probability of being reached by at least one slot."""
    return 1.0 - survival(matrix, slot_ids)


def influence(matrix: SlotUserMatrix, slot_ids: Iterable) -> float:
    """Expected number of users reached by the slot set."""
    ids = list(slot_ids)
    if not ids:
        return 0.0
    return float(np.sum(coverage(matrix, ids)))


class BillboardCoverage:
    """Running per-user survival product for incremental marginal queries."""

    def __init__(self, matrix: SlotUserMatrix, slot_ids: Iterable = ()):
        self.matrix = matrix
        self.selected: list[int] = []
        self.surv = np.ones(matrix.n_users)
        for sid in slot_ids:
            self.add(sid)

    def gain(self, slot_id, weight=None) -> float:
        """Increase of the coverage sum if ``slot_id`` were added; ``weight``
        optionally scales each user's contribution."""
        u, p = self.matrix.row(slot_id)
        contrib = p * self.surv[u]
        if weight is not None:
            contrib = contrib * weight[u]
        return float(contrib.sum())

    def add(self, slot_id) -> None:
        if slot_id in self.selected:
            raise ValueError(f"slot {slot_id} already selected")
        u, p = self.matrix.row(slot_id)
        self.surv[u] *= 1.0 - p
        self.selected.append(slot_id)

    @property
    def value(self) -> float:
        return float(np.sum(1.0 - self.surv)) if self.selected else 0.0


def marginal_influence(matrix: SlotUserMatrix, slot_ids: Iterable, candidate) -> float:
    ids = list(slot_ids)
    if candidate in ids:
        raise ValueError(f"slot {candidate} already in the set")
    return BillboardCoverage(matrix, ids).gain(candidate)
