"""Compiled graph kernels: bounded multi-source Dijkstra and ball areas."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _heap_push(keys, vals, size, key, val):
    i = size
    keys[i] = key
    vals[i] = val
    while i > 0:
        parent = (i - 1) >> 1
        if keys[parent] < keys[i] or (keys[parent] == keys[i] and vals[parent] <= vals[i]):
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        vals[parent], vals[i] = vals[i], vals[parent]
        i = parent
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop(keys, vals, size):
    key = keys[0]
    val = vals[0]
    size -= 1
    keys[0] = keys[size]
    vals[0] = vals[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and (
            keys[right] < keys[left] or (keys[right] == keys[left] and vals[right] < vals[left])
        ):
            best = right
        if keys[i] < keys[best] or (keys[i] == keys[best] and vals[i] <= vals[best]):
            break
        keys[i], keys[best] = keys[best], keys[i]
        vals[i], vals[best] = vals[best], vals[i]
        i = best
    return key, val, size


@njit(cache=True, nogil=True)
def _bounded(indptr, indices, weights, sources, limit, dist, touched, keys, vals):
    """Dijkstra from ``sources`` up to ``limit``; writes into ``dist``.

    Returns the number of entries written to ``touched`` (every vertex whose
    tentative distance was set, including ones later found beyond ``limit``).
    """
    size = 0
    ntouched = 0
    for s in sources:
        if dist[s] != 0.0:
            if dist[s] == np.inf:
                touched[ntouched] = s
                ntouched += 1
            dist[s] = 0.0
            size = _heap_push(keys, vals, size, 0.0, s)
    while size > 0:
        d, u, size = _heap_pop(keys, vals, size)
        if d > dist[u]:
            continue
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            nd = d + weights[e]
            if nd <= limit and nd < dist[v]:
                if dist[v] == np.inf:
                    touched[ntouched] = v
                    ntouched += 1
                dist[v] = nd
                size = _heap_push(keys, vals, size, nd, v)
    return ntouched


@njit(cache=True, nogil=True)
def dijkstra(indptr, indices, weights, sources, limit):
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    touched = np.empty(n, dtype=np.int64)
    cap = indices.shape[0] + sources.shape[0] + 1
    keys = np.empty(cap)
    vals = np.empty(cap, dtype=np.int64)
    _bounded(indptr, indices, weights, sources, limit, dist, touched, keys, vals)
    return dist


@njit(cache=True, nogil=True)
def ball_weights_into(indptr, indices, weights, radius, centers, faces, vf_ptr, vf_idx, face_weight,
                      dist, touched, keys, vals, face_seen, stamp, out):
    """Workspace form of :func:`ball_weights`.

    ``dist`` must be all ``inf`` on entry and is restored on exit;
    ``face_seen`` holds stamps below ``stamp[0]``, which is advanced by the
    number of centers.
    """
    for ci in range(centers.shape[0]):
        mark = stamp[0] + ci
        src = centers[ci:ci + 1]
        nt = _bounded(indptr, indices, weights, src, radius, dist, touched, keys, vals)
        total = 0.0
        for t in range(nt):
            v = touched[t]
            for j in range(vf_ptr[v], vf_ptr[v + 1]):
                f = vf_idx[j]
                if face_seen[f] == mark:
                    continue
                face_seen[f] = mark
                w = face_weight[f]
                if w == 0.0:
                    continue
                if (
                    dist[faces[f, 0]] <= radius
                    and dist[faces[f, 1]] <= radius
                    and dist[faces[f, 2]] <= radius
                ):
                    total += w
        out[ci] = total
        for t in range(nt):
            dist[touched[t]] = np.inf
    stamp[0] += centers.shape[0]


class BallWorkspace:
    """Reusable buffers for repeated ball-area queries on one graph."""

    def __init__(self, indptr, indices, weights, faces, vf_ptr, vf_idx):
        n = indptr.shape[0] - 1
        self.graph = (indptr, indices, weights)
        self.mesh = (faces, vf_ptr, vf_idx)
        self.dist = np.full(n, np.inf)
        self.touched = np.empty(n, dtype=np.int64)
        cap = indices.shape[0] + 2
        self.keys = np.empty(cap)
        self.vals = np.empty(cap, dtype=np.int64)
        self.face_seen = np.full(faces.shape[0], -1, dtype=np.int64)
        self.stamp = np.zeros(1, dtype=np.int64)

    def areas(self, radius, centers, face_weight):
        centers = np.ascontiguousarray(centers, dtype=np.int64)
        out = np.zeros(centers.shape[0])
        ball_weights_into(*self.graph, float(radius), centers, *self.mesh, face_weight,
                          self.dist, self.touched, self.keys, self.vals, self.face_seen, self.stamp, out)
        return out


def ball_weights(indptr, indices, weights, radius, centers, faces, vf_ptr, vf_idx, face_weight):
    """For each center, sum ``face_weight`` over faces with all vertices within ``radius``."""
    ws = BallWorkspace(indptr, indices, weights, faces, vf_ptr, vf_idx)
    return ws.areas(radius, centers, face_weight)


@njit(cache=True, nogil=True)
def greedy_cover_counts(indptr, indices, weights, centers, s):
    """Greedy count of ``s``-balls covering the vertex set of each ``4s``-ball.

    Each new ball is centred at the lowest-id vertex still uncovered.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    dist2 = np.full(n, np.inf)
    touched = np.empty(n, dtype=np.int64)
    touched2 = np.empty(n, dtype=np.int64)
    cap = indices.shape[0] + 2
    keys = np.empty(cap)
    vals = np.empty(cap, dtype=np.int64)
    covered = np.zeros(n, dtype=np.bool_)
    out = np.zeros(centers.shape[0], dtype=np.int64)
    src = np.empty(1, dtype=np.int64)
    for ci in range(centers.shape[0]):
        src[0] = centers[ci]
        nt = _bounded(indptr, indices, weights, src, 4.0 * s, dist, touched, keys, vals)
        members = np.sort(touched[:nt])
        count = 0
        for m in members:
            if dist[m] > 4.0 * s or covered[m]:
                continue
            count += 1
            src[0] = m
            nt2 = _bounded(indptr, indices, weights, src, s, dist2, touched2, keys, vals)
            for t in range(nt2):
                u = touched2[t]
                if dist2[u] <= s:
                    covered[u] = True
                dist2[u] = np.inf
        out[ci] = count
        for t in range(nt):
            covered[touched[t]] = False
            dist[touched[t]] = np.inf
        covered[:] = False
    return out
