"""Bell states of two particles whose spatial orbitals overlap.

Two unit orbitals phi_A, phi_B with real overlap S are expanded over an
orthonormal pair chi_A, chi_B (symmetric/Löwdin by default, Gram-Schmidt as
an alternative). Spin-orbital creators f†_{k,s} = sum_i C[i, k] c†_{i,s} then
build the four Bell combinations in the occupation basis of chi_A, chi_B.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DestroyedStateError, FockentError
from .fock import FockSpace, ModeLabel, QuantumState, Spin, Statistics, build_from_ops, two_site_modes
from .measures import schliemann_eta

DESTROYED_NORM = 1e-8


class BellKind(str, enum.Enum):
    PSI_PLUS = "psi-plus"
    PSI_MINUS = "psi-minus"
    PHI_PLUS = "phi-plus"
    PHI_MINUS = "phi-minus"


# (spin of the A orbital, spin of the B orbital) for the two terms, and their relative sign
_TERMS = {
    BellKind.PSI_PLUS: ((Spin.UP, Spin.DOWN), (Spin.DOWN, Spin.UP), 1.0),
    BellKind.PSI_MINUS: ((Spin.UP, Spin.DOWN), (Spin.DOWN, Spin.UP), -1.0),
    BellKind.PHI_PLUS: ((Spin.UP, Spin.UP), (Spin.DOWN, Spin.DOWN), 1.0),
    BellKind.PHI_MINUS: ((Spin.UP, Spin.UP), (Spin.DOWN, Spin.DOWN), -1.0),
}


def orbital_coefficients(S: float, scheme: str = "symmetric") -> np.ndarray:
    """Columns give phi_A, phi_B over the orthonormal pair (chi_A, chi_B)."""
    if not 0.0 <= S < 1.0:
        raise ValueError("overlap must lie in [0, 1)")
    if scheme == "symmetric":
        a = 0.5 * (np.sqrt(1 + S) + np.sqrt(1 - S))
        b = 0.5 * (np.sqrt(1 + S) - np.sqrt(1 - S))
        return np.array([[a, b], [b, a]])
    if scheme == "sequential":
        return np.array([[1.0, S], [0.0, np.sqrt(1 - S * S)]])
    raise ValueError(f"unknown orthogonalization scheme {scheme!r}")


@dataclass(frozen=True, eq=False)
class OverlapBellState:
    kind: BellKind
    overlap: float
    state: QuantumState
    prenormalization_norm: float


def bell_state_nonorthogonal(
    kind,
    S: float,
    statistics="fermion",
    scheme: str = "symmetric",
    min_norm: float = DESTROYED_NORM,
) -> OverlapBellState:
    kind = BellKind(kind)
    stats = Statistics(statistics)
    space = FockSpace(two_site_modes(), stats, 2 if stats is Statistics.BOSON else None)
    coef = orbital_coefficients(S, scheme)
    sites = ("A", "B")

    def creator(orbital: int, spin: Spin) -> dict:
        return {ModeLabel(sites[i], spin): coef[i, orbital] for i in range(2)}

    first, second, sign = _TERMS[kind]
    products = [[creator(0, first[0]), creator(1, first[1])], [creator(0, second[0]), creator(1, second[1])]]
    raw = build_from_ops(space, products, [2 ** -0.5, sign * 2 ** -0.5], normalize=False)
    norm = raw.norm()
    if norm < min_norm:
        raise DestroyedStateError(f"{kind.value} at S={S} has pre-normalization norm {norm:.3g}")
    return OverlapBellState(kind, float(S), raw.normalize(), norm)


@dataclass(frozen=True)
class CurvePoint:
    overlap: float
    eta: float | None
    prenormalization_norm: float
    destroyed: bool


def eta_vs_overlap_curve(kind, grid, statistics="fermion", scheme: str = "symmetric",
                         min_norm: float = DESTROYED_NORM) -> list[CurvePoint]:
    """η along an overlap grid. Destroyed points are flagged; η is None for bosons (no Slater-rank measure)."""
    out = []
    for S in grid:
        try:
            b = bell_state_nonorthogonal(kind, float(S), statistics, scheme, min_norm)
        except DestroyedStateError:
            out.append(CurvePoint(float(S), None, prenormalization_norm(kind, float(S), statistics, scheme), True))
            continue
        eta = schliemann_eta(b.state) if Statistics(statistics) is Statistics.FERMION else None
        out.append(CurvePoint(float(S), eta, b.prenormalization_norm, False))
    return out


def prenormalization_norm(kind, S: float, statistics="fermion", scheme: str = "symmetric") -> float:
    """Norm of the unnormalized combination (zero when it vanishes identically)."""
    try:
        return bell_state_nonorthogonal(kind, S, statistics, scheme, min_norm=0.0).prenormalization_norm
    except FockentError:
        return 0.0
