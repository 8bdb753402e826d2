"""Hot combinatorial kernels.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical results.  The module-level names bind to the numba
versions unless numba is missing or ``REJECTLAB_DISABLE_NUMBA`` is set to a
truthy value at import time.  Both variants stay importable under explicit
``*_numba`` / ``*_numpy`` names so tests and benchmarks can compare them.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba
except ImportError:  # pragma: no cover
    numba = None

_TRUTHY = {"1", "true", "yes", "on"}
NUMBA_DISABLED = os.environ.get("REJECTLAB_DISABLE_NUMBA", "").strip().lower() in _TRUTHY
USE_NUMBA = numba is not None and not NUMBA_DISABLED

numba_default = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "boundscheck": False,
}

# Ball membership uses d(a, b) <= radius + COVER_TOL so that radii equal to an
# achievable distance are not lost to summation round-off.
COVER_TOL = 1e-12


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(**numba_default)(fn)


# --------------------------------------------------------------------------
# projections / shattering


def _first_shattered_py(members, combos):
    n_rows = members.shape[0]
    n_combos, k = combos.shape
    target = 1 << k
    if n_rows < target:
        return -1
    stamp = np.zeros(target, np.int64)
    for ci in range(n_combos):
        seen = 0
        for r in range(n_rows):
            code = 0
            for j in range(k):
                code |= np.int64(members[r, combos[ci, j]]) << j
            if stamp[code] != ci + 1:
                stamp[code] = ci + 1
                seen += 1
                if seen == target:
                    return ci
    return -1


def _max_projections_py(members, combos):
    n_rows = members.shape[0]
    n_combos, k = combos.shape
    cap = min(n_rows, 1 << k)
    stamp = np.zeros(1 << k, np.int64)
    best = 0
    for ci in range(n_combos):
        seen = 0
        for r in range(n_rows):
            code = 0
            for j in range(k):
                code |= np.int64(members[r, combos[ci, j]]) << j
            if stamp[code] != ci + 1:
                stamp[code] = ci + 1
                seen += 1
        if seen > best:
            best = seen
            if best == cap:
                return best
    return best


def _projection_counts_numpy(members, combos, chunk=4096):
    k = combos.shape[1]
    pow2 = (np.int64(1) << np.arange(k, dtype=np.int64))
    out = np.empty(combos.shape[0], np.int64)
    m64 = members.astype(np.int64)
    for start in range(0, combos.shape[0], chunk):
        part = combos[start:start + chunk]
        codes = (m64[:, part] * pow2).sum(axis=-1)  # (K, chunk)
        codes.sort(axis=0)
        out[start:start + chunk] = 1 + (np.diff(codes, axis=0) != 0).sum(axis=0)
    return out


def first_shattered_numpy(members, combos):
    """Index of the first combination whose projection is shattered, or -1."""
    if combos.shape[0] == 0:
        return -1
    target = 1 << combos.shape[1]
    if members.shape[0] < target:
        return -1
    hits = np.flatnonzero(_projection_counts_numpy(members, combos) == target)
    return int(hits[0]) if hits.size else -1


def max_projections_numpy(members, combos):
    """Largest number of distinct projections over the given combinations."""
    if combos.shape[0] == 0:
        return 0
    return int(_projection_counts_numpy(members, combos).max())


# --------------------------------------------------------------------------
# pairwise Hamming diameter


def _max_pairwise_hamming_py(members):
    n_rows, m = members.shape
    best = 0
    for a in range(n_rows):
        for b in range(a + 1, n_rows):
            dist = 0
            for j in range(m):
                if members[a, j] != members[b, j]:
                    dist += 1
            if dist > best:
                best = dist
                if best == m:
                    return best
    return best


def max_pairwise_hamming_numpy(members):
    m = members.shape[1]
    best = 0
    for a in range(members.shape[0] - 1):
        dist = int((members[a + 1:] != members[a]).sum(axis=1).max())
        if dist > best:
            best = dist
            if best == m:
                break
    return best


# --------------------------------------------------------------------------
# L1 covers of a Boolean cube
#
# Cube elements are integer codes over the support atoms; the L1(P_X)
# distance between codes a and b is xor_weight[a ^ b].


def _greedy_cube_cover_py(xor_weight, radius, tol):
    size = xor_weight.shape[0]
    offs = np.nonzero(xor_weight <= radius + tol)[0]
    gains = np.full(size, offs.shape[0], np.int64)
    covered = np.zeros(size, np.bool_)
    out = np.empty(size, np.int64)
    count = 0
    remaining = size
    while remaining > 0:
        best = 0
        for c in range(1, size):
            if gains[c] > gains[best]:
                best = c
        out[count] = best
        count += 1
        for e in offs:
            u = best ^ e
            if not covered[u]:
                covered[u] = True
                remaining -= 1
                for e2 in offs:
                    gains[u ^ e2] -= 1
    return out[:count].copy()


def greedy_cube_cover_numpy(xor_weight, radius, tol=COVER_TOL):
    size = xor_weight.shape[0]
    offs = np.flatnonzero(xor_weight <= radius + tol)
    gains = np.full(size, offs.size, np.int64)
    covered = np.zeros(size, bool)
    out = []
    while not covered.all():
        best = int(np.argmax(gains))
        out.append(best)
        newly = best ^ offs
        newly = newly[~covered[newly]]
        covered[newly] = True
        np.subtract.at(gains, (newly[:, None] ^ offs[None, :]).ravel(), 1)
    return np.asarray(out, np.int64)


def _exact_cube_cover_py(xor_weight, radius, tol):
    size = xor_weight.shape[0]
    full = (np.int64(1) << size) - 1
    masks = np.zeros(size, np.int64)
    for c in range(size):
        mk = np.int64(0)
        for u in range(size):
            if xor_weight[c ^ u] <= radius + tol:
                mk |= np.int64(1) << u
        masks[c] = mk
    idx = np.empty(size, np.int64)
    for s in range(1, size + 1):
        for j in range(s):
            idx[j] = j
        while True:
            acc = np.int64(0)
            for j in range(s):
                acc |= masks[idx[j]]
            if acc == full:
                return idx[:s].copy()
            j = s - 1
            while j >= 0 and idx[j] == size - s + j:
                j -= 1
            if j < 0:
                break
            idx[j] += 1
            for t in range(j + 1, s):
                idx[t] = idx[t - 1] + 1
    return np.arange(size)


def exact_cube_cover_numpy(xor_weight, radius, tol=COVER_TOL):
    size = xor_weight.shape[0]
    codes = np.arange(size)
    inside = xor_weight[codes[:, None] ^ codes[None, :]] <= radius + tol
    masks = (inside.astype(np.int64) << codes[None, :]).sum(axis=1)
    full = (1 << size) - 1
    for s in range(1, size + 1):
        for combo in itertools.combinations(range(size), s):
            acc = 0
            for c in combo:
                acc |= int(masks[c])
            if acc == full:
                return np.asarray(combo, np.int64)
    return codes.astype(np.int64)


# --------------------------------------------------------------------------
# dispatch

first_shattered_numba = _njit(_first_shattered_py)
max_projections_numba = _njit(_max_projections_py)
max_pairwise_hamming_numba = _njit(_max_pairwise_hamming_py)
_greedy_cube_cover_nb = _njit(_greedy_cube_cover_py)
_exact_cube_cover_nb = _njit(_exact_cube_cover_py)


def greedy_cube_cover_numba(xor_weight, radius, tol=COVER_TOL):
    return _greedy_cube_cover_nb(xor_weight, float(radius), float(tol))


def exact_cube_cover_numba(xor_weight, radius, tol=COVER_TOL):
    return _exact_cube_cover_nb(xor_weight, float(radius), float(tol))


if USE_NUMBA:
    first_shattered = first_shattered_numba
    max_projections = max_projections_numba
    max_pairwise_hamming = max_pairwise_hamming_numba
    greedy_cube_cover = greedy_cube_cover_numba
    exact_cube_cover = exact_cube_cover_numba
else:
    first_shattered = first_shattered_numpy
    max_projections = max_projections_numpy
    max_pairwise_hamming = max_pairwise_hamming_numpy
    greedy_cube_cover = greedy_cube_cover_numpy
    exact_cube_cover = exact_cube_cover_numpy


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
