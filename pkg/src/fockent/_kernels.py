"""Inner loops over occupation-number bases.

Every kernel has a pure-numpy implementation and, when numba is importable,
an ``@njit`` twin with the same signature. The public names bound at the
bottom of this module point at one or the other depending on the
``FOCKENT_NUMBA`` environment variable (``0``/``false``/``off`` disables the
jitted path). Both variants are always importable as ``<name>_numpy`` and
``<name>_numba`` so benchmarks and tests can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

_flag = os.environ.get("FOCKENT_NUMBA", "1").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag not in {"0", "false", "off", "no"}


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------

def reorder_signs_numpy(patterns: np.ndarray, lead: np.ndarray) -> np.ndarray:
    """Sign picked up when the modes flagged in ``lead`` are moved in front.

    ``patterns`` is a (D, M) occupation table in canonical mode order. For a
    fermionic basis state the creation string is reordered so that flagged
    modes come first (each group keeping its internal order); the sign is
    (-1) to the number of occupied (trailing, leading) pairs that cross.
    """
    occ = (patterns % 2).astype(np.int64)
    trailing = occ * (~lead)[None, :]
    # occupied non-lead modes strictly before each position
    before = np.cumsum(trailing, axis=1) - trailing
    crossings = (before * (occ * lead[None, :])).sum(axis=1)
    return np.where(crossings % 2 == 0, 1.0, -1.0)


def ladder_numpy(vec, counts, parity, stride, cap, creation):
    """Apply one creation (or annihilation) operator to a dense amplitude vector.

    Returns the new vector and the squared norm dropped at the truncation cap
    (always zero for annihilation).
    """
    out = np.zeros_like(vec)
    if creation:
        ok = counts < cap
        idx = np.nonzero(ok)[0]
        out[idx + stride] = vec[idx] * np.sqrt(counts[idx] + 1.0) * parity[idx]
        lost = float(np.sum(np.abs(vec[~ok]) ** 2))
    else:
        idx = np.nonzero(counts > 0)[0]
        out[idx - stride] = vec[idx] * np.sqrt(counts[idx].astype(np.float64)) * parity[idx]
        lost = 0.0
    return out, lost


def partial_trace_numpy(rho, env_idx, keep_idx, signs, n_keep):
    """Sum ``signs[p] signs[q] rho[p, q]`` into ``out[keep[p], keep[q]]`` over env[p] == env[q].

    Each (env, keep) pair must occur at most once, as it does for a basis.
    """
    out = np.zeros((n_keep, n_keep), dtype=np.complex128)
    signed = rho * signs[:, None] * signs[None, :]
    order = np.argsort(env_idx, kind="stable")
    bounds = np.flatnonzero(np.diff(env_idx[order])) + 1
    for group in np.split(order, bounds):
        k = keep_idx[group]
        out[np.ix_(k, k)] += signed[np.ix_(group, group)]
    return out


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def reorder_signs_numba(patterns, lead):
        d, m = patterns.shape
        out = np.empty(d, dtype=np.float64)
        for p in range(d):
            seen = 0
            cross = 0
            for j in range(m):
                if patterns[p, j] % 2 == 1:
                    if lead[j]:
                        cross += seen
                    else:
                        seen += 1
            out[p] = 1.0 if cross % 2 == 0 else -1.0
        return out

    @njit(cache=True)
    def ladder_numba(vec, counts, parity, stride, cap, creation):
        out = np.zeros_like(vec)
        lost = 0.0
        for p in range(vec.shape[0]):
            a = vec[p]
            if a == 0:
                continue
            n = counts[p]
            if creation:
                if n < cap:
                    out[p + stride] = a * np.sqrt(n + 1.0) * parity[p]
                else:
                    lost += a.real * a.real + a.imag * a.imag
            elif n > 0:
                out[p - stride] = a * np.sqrt(float(n)) * parity[p]
        return out, lost

    @njit(cache=True)
    def partial_trace_numba(rho, env_idx, keep_idx, signs, n_keep):
        out = np.zeros((n_keep, n_keep), dtype=np.complex128)
        d = rho.shape[0]
        for p in range(d):
            ep = env_idx[p]
            kp = keep_idx[p]
            sp = signs[p]
            for q in range(d):
                if env_idx[q] == ep:
                    out[kp, keep_idx[q]] += sp * signs[q] * rho[p, q]
        return out

else:  # pragma: no cover
    reorder_signs_numba = reorder_signs_numpy
    ladder_numba = ladder_numpy
    partial_trace_numba = partial_trace_numpy


if USE_NUMBA:
    reorder_signs = reorder_signs_numba
    ladder = ladder_numba
    partial_trace = partial_trace_numba
else:
    reorder_signs = reorder_signs_numpy
    ladder = ladder_numpy
    partial_trace = partial_trace_numpy


def warmup() -> None:
    """Trigger compilation of the jitted kernels on tiny inputs."""
    pats = np.array([[0, 1], [1, 1]], dtype=np.int64)
    lead = np.array([False, True])
    s = reorder_signs(pats, lead)
    vec = np.array([1.0 + 0j, 0, 0, 0])
    counts = np.array([0, 1, 0, 1], dtype=np.int64)
    ladder(vec, counts, np.ones(4), 1, 1, True)
    ladder(vec, counts, np.ones(4), 1, 1, False)
    idx = np.array([0, 1], dtype=np.int64)
    partial_trace(np.eye(2, dtype=np.complex128), idx, idx, s, 2)
