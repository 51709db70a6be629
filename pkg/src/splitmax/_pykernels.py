"""Pure-Python twin of ``_ckernels``; used when the extension is not built."""

from collections import deque

import numpy as np


def ic_reach(indptr, indices, live, seeds, counts, sizes):
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    seeds = np.asarray(seeds).tolist()
    n = len(indptr) - 1
    adjacency = [list(range(indptr[u], indptr[u + 1])) for u in range(n)]
    acc = [0] * n
    for r in range(live.shape[0]):
        row = live[r].tolist()
        seen = set()
        order = []
        frontier = deque()
        for u in seeds:
            if u not in seen:
                seen.add(u)
                order.append(u)
                frontier.append(u)
        while frontier:
            u = frontier.popleft()
            for e in adjacency[u]:
                if row[e]:
                    v = indices[e]
                    if v not in seen:
                        seen.add(v)
                        order.append(v)
                        frontier.append(v)
        sizes[r] = len(order)
        for v in order:
            acc[v] += 1
    counts += np.asarray(acc, dtype=np.int64)
