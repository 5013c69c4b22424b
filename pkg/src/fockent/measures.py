"""Competing entanglement measures for two particles on two sites.

The coefficient-matrix convention used throughout: a two-particle state over
the four modes A↑, A↓, B↑, B↓ (indices 0..3) is

    |w> = sum_{a,b} w[a, b] c†_a c†_b |0>

with ``w`` antisymmetric for fermions and symmetric for bosons. In the
occupation basis this puts amplitude ``2 w[a, b]`` on the pattern with modes
``a < b`` occupied. For bosons the doubly occupied pattern of mode ``a``
carries amplitude ``w[a, a]`` (the convention under which the closed-form
reduced blocks below hold as written). Normalization is then
``sum_{a<b} 4|w_ab|^2 + sum_a |w_aa|^2 = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .entropy import DensityMatrix, EntanglementReport, occupancy_sector_decompose, reduced_density
from .errors import NormalizationError, SectorError, SymmetryError
from .fock import FockSpace, ModeLabel, QuantumState, Spin, Statistics, two_site_modes

SYMMETRY_TOL = 1e-12
W_NORM_TOL = 1e-9
RANK_TOL = 1e-10
# eta = 8 z1 z2 with z1 <= 1/2, so a sub-tolerance z2 bounds eta by 4 * RANK_TOL
ETA_ZERO_TOL = 4 * RANK_TOL


def _w_norm2(m: np.ndarray, stats: Statistics) -> float:
    off = np.triu(np.abs(m) ** 2, k=1).sum()
    diag = (np.abs(np.diag(m)) ** 2).sum()
    return float(4 * off + (diag if stats is Statistics.BOSON else 0.0))


@dataclass(frozen=True, eq=False)
class WMatrix:
    entries: np.ndarray
    statistics: Statistics = Statistics.FERMION

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.complex128)
        stats = Statistics(self.statistics)
        if m.shape != (4, 4):
            raise SymmetryError("w-matrix must be 4x4 over A↑, A↓, B↑, B↓")
        sign = -1.0 if stats is Statistics.FERMION else 1.0
        if np.max(np.abs(m - sign * m.T)) > SYMMETRY_TOL:
            kind = "antisymmetric" if sign < 0 else "symmetric"
            raise SymmetryError(f"{stats.value} w-matrix must be {kind}")
        if abs(_w_norm2(m, stats) - 1.0) > W_NORM_TOL:
            raise NormalizationError(f"w-matrix is not normalized (norm^2 = {_w_norm2(m, stats):.6g})")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "statistics", stats)

    @classmethod
    def normalized(cls, entries, statistics="fermion") -> WMatrix:
        m = np.asarray(entries, dtype=np.complex128)
        return cls(m / np.sqrt(_w_norm2(m, Statistics(statistics))), statistics)


def random_w(rng: np.random.Generator, statistics="fermion") -> WMatrix:
    z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = z - z.T if Statistics(statistics) is Statistics.FERMION else z + z.T
    return WMatrix.normalized(m, statistics)


def _pair_patterns():
    for a, b in combinations(range(4), 2):
        pat = [0, 0, 0, 0]
        pat[a] = pat[b] = 1
        yield a, b, pat


def _check_four_modes(space: FockSpace):
    if len(space.modes) != 4:
        raise SectorError("w-matrices are defined for exactly four modes")


def w_from_state(state: QuantumState) -> WMatrix:
    space = state.space
    _check_four_modes(space)
    outside = np.linalg.norm(state.vector[space.particle_numbers != 2])
    if outside > 1e-12:
        raise SectorError(f"state has weight {outside:.3g} outside the two-particle sector")
    m = np.zeros((4, 4), dtype=np.complex128)
    sign = -1.0 if space.is_fermionic else 1.0
    for a, b, pat in _pair_patterns():
        amp = state.vector[space.index(pat)] / 2
        m[a, b] = amp
        m[b, a] = sign * amp
    if not space.is_fermionic:
        for a in range(4):
            pat = [0, 0, 0, 0]
            pat[a] = 2
            if max(pat) <= space.caps[a]:
                m[a, a] = state.vector[space.index(pat)]
    return WMatrix.normalized(m, space.statistics)


def state_from_w(w: WMatrix, space: FockSpace | None = None, nmax: int | None = None) -> QuantumState:
    if space is None:
        space = FockSpace(two_site_modes(), w.statistics, nmax if nmax is not None else 2)
    _check_four_modes(space)
    if space.statistics is not w.statistics:
        raise SymmetryError("w-matrix statistics differ from the target space")
    vec = np.zeros(space.dim, dtype=np.complex128)
    for a, b, pat in _pair_patterns():
        vec[space.index(pat)] = 2 * w.entries[a, b]
    if not space.is_fermionic:
        for a in range(4):
            pat = [0, 0, 0, 0]
            pat[a] = 2
            vec[space.index(pat)] = w.entries[a, a]
    return QuantumState(space, vec, True)


def _as_w(obj) -> WMatrix:
    if isinstance(obj, WMatrix):
        return obj
    if isinstance(obj, QuantumState):
        return w_from_state(obj)
    return WMatrix(obj)


# -- Pfaffian and the Schliemann measure --------------------------------------

def pfaffian(a: np.ndarray) -> complex:
    """Pfaffian of an even-dimensional antisymmetric matrix (Parlett-Reid elimination with pivoting)."""
    a = np.array(a, dtype=np.complex128)
    n = a.shape[0]
    if a.shape != (n, n) or np.max(np.abs(a + a.T), initial=0.0) > 1e-10 * max(1.0, np.abs(a).max(initial=0.0)):
        raise SymmetryError("pfaffian needs a square antisymmetric matrix")
    if n % 2:
        return 0.0j
    result = 1.0 + 0j
    for k in range(0, n - 1, 2):
        piv = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if piv != k + 1:
            a[[k + 1, piv], :] = a[[piv, k + 1], :]
            a[:, [k + 1, piv]] = a[:, [piv, k + 1]]
            result = -result
        if a[k + 1, k] == 0:
            return 0.0j
        result *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            # rank-2 update that zeroes row/column k against column k+1
            a[k + 2:, k + 2:] += np.outer(tau, a[k + 2:, k + 1]) - np.outer(a[k + 2:, k + 1], tau)
    return complex(result)


def pfaffian4(w: np.ndarray) -> complex:
    """Closed form ``w12 w34 - w13 w24 + w14 w23`` (1-based indices)."""
    return complex(w[0, 1] * w[2, 3] - w[0, 2] * w[1, 3] + w[0, 3] * w[1, 2])


def schliemann_eta(obj) -> float:
    """``8 |Pf(w)|``; equals 1 on the localized Bell states and 0 on single Slater determinants."""
    w = _as_w(obj)
    if w.statistics is not Statistics.FERMION:
        raise SymmetryError("the Schliemann measure is defined for fermions only")
    return 8.0 * abs(pfaffian(w.entries))


def _levi_civita4() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = -1.0 if inv % 2 else 1.0
    return eps


def schliemann_eta_dual(obj) -> float:
    """|<w~|w>| via the dual ``w~_ab = 1/2 eps^{abcd} conj(w_cd)`` and ``<v|w> = 2 tr(v^† w)``."""
    w = _as_w(obj).entries
    dual = 0.5 * np.einsum("abcd,cd->ab", _levi_civita4(), w.conj())
    return float(abs(2 * np.sum(dual.conj() * w)))


# -- Slater decomposition ----------------------------------------------------------

@dataclass
class SlaterDecomposition:
    """``w = sum_i z_i (u_i v_i^T - v_i u_i^T)``, i.e. ``|w> = sum_i 2 z_i f†_{u_i} f†_{v_i} |0>``."""

    coefficients: np.ndarray
    orbitals: list[tuple[np.ndarray, np.ndarray]]
    rank: int

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((4, 4) if not self.orbitals else (len(self.orbitals[0][0]),) * 2, dtype=np.complex128)
        for z, (u, v) in zip(self.coefficients, self.orbitals):
            out += z * (np.outer(u, v) - np.outer(v, u))
        return out


def slater_decompose(obj, tol: float = RANK_TOL) -> SlaterDecomposition:
    """Canonical pairing form of an antisymmetric coefficient matrix by successive deflation.

    For the leading eigenvector ``u`` of ``w w^†`` (eigenvalue ``z^2``) the
    partner orbital is ``v = conj(w^† u) / z``; it is orthogonal to ``u`` and
    ``z (u v^T - v u^T)`` is removed from ``w`` before repeating.
    """
    if isinstance(obj, (WMatrix, QuantumState)):
        w = _as_w(obj)
        if w.statistics is not Statistics.FERMION:
            raise SymmetryError("Slater decomposition applies to fermionic w")
        a = w.entries.copy()
    else:
        a = np.array(obj, dtype=np.complex128)
        if np.max(np.abs(a + a.T), initial=0.0) > SYMMETRY_TOL:
            raise SymmetryError("Slater decomposition needs an antisymmetric matrix")
    n = a.shape[0]
    zs, orbs = [], []
    for _ in range(n // 2):
        vals, vecs = np.linalg.eigh(a @ a.conj().T)
        z = float(np.sqrt(max(vals[-1], 0.0)))
        if z <= tol:
            break
        u = vecs[:, -1]
        v = (a.conj().T @ u).conj() / z
        zs.append(z)
        orbs.append((u, v))
        a = a - z * (np.outer(u, v) - np.outer(v, u))
    return SlaterDecomposition(np.array(zs), orbs, len(zs))


def slater_rank(obj, tol: float = RANK_TOL) -> int:
    return slater_decompose(obj, tol).rank


# -- Wootters ---------------------------------------------------------------------

def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-(x * np.log2(x) + (1 - x) * np.log2(1 - x)))


@dataclass(frozen=True)
class WoottersReport:
    tangle: float
    x: float
    entanglement: float


def wootters_report(a, b, c, d) -> WoottersReport:
    """Tangle and entanglement of ``a|↑↑> + b|↑↓> + c|↓↑> + d|↓↓>``."""
    amps = np.array([a, b, c, d], dtype=np.complex128)
    if abs(np.vdot(amps, amps).real - 1.0) > 1e-9:
        raise NormalizationError("Wootters amplitudes must be normalized")
    tau = float(min(1.0, (2 * abs(amps[0] * amps[3] - amps[1] * amps[2])) ** 2))
    x = 0.5 * (1 + np.sqrt(max(0.0, 1 - tau)))
    return WoottersReport(tau, float(x), binary_entropy(x))


def wootters_state(a, b, c, d, statistics="fermion", nmax=None) -> QuantumState:
    """The localized state ``sum_{s,t} amp |s_A t_B>`` with ``|s_A t_B> = c†_{A s} c†_{B t}|0>``."""
    space = FockSpace(two_site_modes(), statistics, nmax)
    w = np.zeros((4, 4), dtype=np.complex128)
    w[0, 2], w[0, 3], w[1, 2], w[1, 3] = 0.5 * np.array([a, b, c, d])
    sign = -1.0 if space.is_fermionic else 1.0
    w[2:, :2] = sign * w[:2, 2:].T
    return state_from_w(WMatrix(w, space.statistics), space)


# -- site entropy ---------------------------------------------------------------------

def site_entropy_measure(state: QuantumState, keep, key="total") -> EntanglementReport:
    """Reduce onto ``keep`` (a site, (site, arm) group or mode subset), then entropy and sector split."""
    return occupancy_sector_decompose(reduced_density(state, keep), key)


def _site_b_space(w: WMatrix, nmax: int) -> FockSpace:
    return FockSpace([ModeLabel("B", Spin.UP), ModeLabel("B", Spin.DOWN)], w.statistics, nmax)


def closed_form_basis(statistics) -> list[tuple[int, int]]:
    """Site-B patterns (n_B↑, n_B↓) ordered by occupancy block."""
    if Statistics(statistics) is Statistics.BOSON:
        return [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)]
    return [(0, 0), (1, 0), (0, 1), (1, 1)]


def reduced_blocks_closed_form(obj, nmax: int | None = None) -> DensityMatrix:
    """Site-B reduced density matrix assembled block by block from w (no partial trace)."""
    w = _as_w(obj)
    m = w.entries
    boson = w.statistics is Statistics.BOSON
    # 1-based names to keep the block formulas legible
    w11, w22, w12 = m[0, 0], m[1, 1], m[0, 1]
    w13, w14, w23, w24 = m[0, 2], m[0, 3], m[1, 2], m[1, 3]
    w33, w44, w34 = m[2, 2], m[3, 3], m[2, 3]

    rho0 = 4 * abs(w12) ** 2 + ((abs(w11) ** 2 + abs(w22) ** 2) if boson else 0.0)
    rho1 = np.array(
        [
            [4 * abs(w13) ** 2 + 4 * abs(w23) ** 2, 4 * w13 * w14.conjugate() + 4 * w23 * w24.conjugate()],
            [0, 4 * abs(w14) ** 2 + 4 * abs(w24) ** 2],
        ],
        dtype=np.complex128,
    )
    rho1[1, 0] = rho1[0, 1].conjugate()
    if boson:
        rho2 = np.array(
            [
                [4 * abs(w34) ** 2, 2 * w34 * w33.conjugate(), 2 * w34 * w44.conjugate()],
                [0, abs(w33) ** 2, w33 * w44.conjugate()],
                [0, 0, abs(w44) ** 2],
            ],
            dtype=np.complex128,
        )
        rho2 = np.triu(rho2) + np.triu(rho2, 1).conj().T
    else:
        rho2 = np.array([[4 * abs(w34) ** 2]], dtype=np.complex128)

    blocks = [np.array([[rho0]], dtype=np.complex128), rho1, rho2]
    size = sum(b.shape[0] for b in blocks)
    mat = np.zeros((size, size), dtype=np.complex128)
    k = 0
    for b in blocks:
        n = b.shape[0]
        mat[k:k + n, k:k + n] = b
        k += n
    space = _site_b_space(w, nmax if nmax is not None else 2)
    basis = [space.index(p) for p in closed_form_basis(w.statistics)]
    return DensityMatrix(mat, space, basis)
