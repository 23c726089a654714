"""Breadth-first search on CSR graphs, vectorised over frontiers."""
from __future__ import annotations

import numpy as np


def _expand(indptr, indices, frontier):
    start = indptr[frontier]
    cnt = indptr[frontier + 1] - start
    total = int(cnt.sum())
    if total == 0:
        return indices[:0]
    offs = np.repeat(start - (np.cumsum(cnt) - cnt), cnt) + np.arange(total)
    return indices[offs]


class BFS:
    """Reusable truncated BFS.

    Keeps one distance buffer of size ``n`` and resets only the entries it
    touched, so many small searches on a huge graph stay cheap.
    """

    def __init__(self, g, mask: np.ndarray | None = None):
        self.indptr = g.indptr
        self.indices = g.indices
        self.n = len(g.indptr) - 1
        self.dist = np.full(self.n, -1, dtype=np.int32)
        # vertices where mask is False are never entered
        self.mask = mask

    def run(self, sources, max_depth: int | None = None, targets=None):
        """Search from ``sources``; returns the visited vertices grouped by level.

        Stops after ``max_depth`` levels, or once every vertex in ``targets``
        has been reached.  Distances of visited vertices are in ``self.dist``
        until the next call.
        """
        self.reset()
        frontier = np.unique(np.asarray(sources, dtype=np.int64))
        if self.mask is not None:
            frontier = frontier[self.mask[frontier]]
        self.dist[frontier] = 0
        levels = [frontier]
        remaining = None
        if targets is not None:
            targets = np.unique(np.asarray(targets, dtype=np.int64))
            remaining = targets[self.dist[targets] < 0]
        depth = 0
        while len(frontier) and (max_depth is None or depth < max_depth):
            if remaining is not None and len(remaining) == 0:
                break
            nb = _expand(self.indptr, self.indices, frontier)
            nb = nb[self.dist[nb] < 0]
            if self.mask is not None:
                nb = nb[self.mask[nb]]
            if len(nb) == 0:
                break
            nb = np.unique(nb)
            depth += 1
            self.dist[nb] = depth
            levels.append(nb)
            frontier = nb
            if remaining is not None:
                remaining = remaining[self.dist[remaining] < 0]
        self._levels = levels
        return levels

    def reset(self):
        for lev in getattr(self, "_levels", ()):
            self.dist[lev] = -1
        self._levels = []

    def distances(self, vertices) -> np.ndarray:
        return self.dist[np.asarray(vertices, dtype=np.int64)]


def bfs_levels(g, sources, max_depth=None, mask=None):
    return BFS(g, mask).run(sources, max_depth)


def distances_from(g, source, mask=None) -> np.ndarray:
    """Full single-source distance array; unreachable vertices get -1."""
    bfs = BFS(g, mask)
    bfs.run([source])
    out = bfs.dist.copy()
    return out


def eccentricity(g, source) -> int:
    return len(bfs_levels(g, [source])) - 1


def components_of(g, vertices_mask: np.ndarray):
    """Connected components of the subgraph induced by ``vertices_mask``; labels -1 outside."""
    from scipy.sparse.csgraph import connected_components

    idx = np.flatnonzero(vertices_mask)
    A = g.adjacency(np.int8)[idx][:, idx]
    k, lab = connected_components(A, directed=False)
    labels = np.full(len(vertices_mask), -1, dtype=np.int64)
    labels[idx] = lab
    return k, labels
