"""Density matrices over occupation bases, partial traces and von Neumann entropy."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import _kernels
from .errors import InvalidDensityMatrix, ModeError, NormalizationError
from .fock import NORM_TOL, FockSpace, QuantumState

HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-12
EIG_CLAMP = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Matrix over the patterns ``space.patterns[basis]`` (all of ``space`` when ``basis`` is None)."""

    matrix: np.ndarray
    space: FockSpace
    basis: np.ndarray | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        n = self.space.dim if self.basis is None else len(self.basis)
        if mat.shape != (n, n):
            raise InvalidDensityMatrix(f"matrix shape {mat.shape} does not match basis size {n}")
        object.__setattr__(self, "matrix", mat)
        if self.basis is not None:
            object.__setattr__(self, "basis", np.asarray(self.basis, dtype=np.int64))

    @property
    def statistics(self):
        return self.space.statistics

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.space.dim) if self.basis is None else self.basis

    @property
    def patterns(self) -> np.ndarray:
        return self.space.patterns[self.indices]

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def restrict(self, patterns) -> DensityMatrix:
        """Sub-matrix on the given patterns (which must all be in this basis)."""
        where = {int(i): k for k, i in enumerate(self.indices)}
        try:
            pick = [where[self.space.index(p)] for p in patterns]
        except KeyError:
            raise ModeError("pattern outside this density matrix's basis") from None
        sub = self.matrix[np.ix_(pick, pick)]
        return DensityMatrix(sub, self.space, self.indices[pick])

    def embed(self) -> DensityMatrix:
        """Same operator expressed on the full basis of ``space`` (zeros elsewhere)."""
        full = np.zeros((self.space.dim, self.space.dim), dtype=np.complex128)
        idx = self.indices
        full[np.ix_(idx, idx)] = self.matrix
        return DensityMatrix(full, self.space)

    def hermitian_part(self) -> np.ndarray:
        """Symmetrized matrix; raises if the anti-Hermitian part exceeds tolerance."""
        asym = np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0)
        if asym > HERMITIAN_TOL:
            raise InvalidDensityMatrix(f"matrix is not Hermitian (asymmetry {asym:.3g})")
        return 0.5 * (self.matrix + self.matrix.conj().T)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues (descending) with numerical dust in [-clamp, 0) set to zero."""
        lam = np.linalg.eigvalsh(self.hermitian_part())[::-1]
        if lam.size and lam[-1] < -EIG_CLAMP:
            raise InvalidDensityMatrix(f"negative eigenvalue {lam[-1]:.3g}")
        return np.where(lam < 0, 0.0, lam)

    def validate(self) -> DensityMatrix:
        lam = self.eigenvalues()
        tr = float(lam.sum())
        if abs(tr - 1.0) > max(TRACE_TOL, 1e-14 * self.dim):
            raise InvalidDensityMatrix(f"trace {tr!r} differs from 1")
        return self


@dataclass
class EntanglementReport:
    total_entropy: float
    sector_eigenvalues: dict[Any, list[float]]
    sector_entropy_contributions: dict[Any, float]
    off_block_norm: float
    modes: list[str] = field(default_factory=list)

    @property
    def block_diagonal(self) -> bool:
        return self.off_block_norm <= 1e-12

    def to_dict(self) -> dict[str, Any]:
        return {
            "modes": list(self.modes),
            "total_entropy": self.total_entropy,
            "sector_eigenvalues": {str(k): v for k, v in self.sector_eigenvalues.items()},
            "sector_entropy_contributions": {str(k): v for k, v in self.sector_entropy_contributions.items()},
            "off_block_norm": self.off_block_norm,
        }


def density_from_state(state: QuantumState) -> DensityMatrix:
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise NormalizationError(f"state norm {state.norm():.12g} != 1")
    v = state.vector
    return DensityMatrix(np.outer(v, v.conj()), state.space)


def _split(space: FockSpace, keep) -> tuple[list, list]:
    keep_modes = space.modes_of(keep)
    if not keep_modes:
        raise ModeError("nothing to keep")
    if len(keep_modes) == len(space.modes):
        raise ModeError("cannot keep every mode: partial trace needs a non-empty environment")
    kept = set(keep_modes)
    env_modes = [m for m in space.modes if m not in kept]
    return keep_modes, env_modes


def _trace_maps(space: FockSpace, patterns: np.ndarray, keep_modes, env_modes):
    keep_cols = [space.mode_index(m) for m in keep_modes]
    env_cols = [space.mode_index(m) for m in env_modes]
    keep_space = space.subspace(keep_modes)
    env_space = space.subspace(env_modes)
    keep_idx = np.ascontiguousarray(patterns[:, keep_cols] @ keep_space.strides)
    env_idx = np.ascontiguousarray(patterns[:, env_cols] @ env_space.strides)
    if space.is_fermionic:
        lead = np.zeros(len(space.modes), dtype=np.bool_)
        lead[env_cols] = True
        signs = _kernels.reorder_signs(np.ascontiguousarray(patterns), lead)
    else:
        signs = np.ones(len(patterns))
    return keep_space, env_space, keep_idx, env_idx, signs


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduce onto the modes selected by ``keep`` (site name, (site, arm) group, or modes).

    Fermionic bases are first reordered so the traced modes form the leading
    block of every creation string; the resulting per-pattern sign is applied
    before summing over environment patterns. Reductions of fermionic states
    without definite parity depend on this ordering choice; states of definite
    parity give the same spectrum on both sides of a pure bipartition.
    """
    space = rho.space
    keep_modes, env_modes = _split(space, keep)
    keep_space, _, keep_idx, env_idx, signs = _trace_maps(space, rho.patterns, keep_modes, env_modes)
    red = _kernels.partial_trace(rho.matrix, env_idx, keep_idx, signs, keep_space.dim)
    return DensityMatrix(red, keep_space)


def reduced_density(state: QuantumState, keep) -> DensityMatrix:
    """Partial trace of ``|state><state|`` computed directly from the amplitudes."""
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise NormalizationError(f"state norm {state.norm():.12g} != 1")
    space = state.space
    keep_modes, env_modes = _split(space, keep)
    keep_space, env_space, keep_idx, env_idx, signs = _trace_maps(space, space.patterns, keep_modes, env_modes)
    amp = np.zeros((env_space.dim, keep_space.dim), dtype=np.complex128)
    amp[env_idx, keep_idx] = signs * state.vector
    return DensityMatrix(amp.T @ amp.conj(), keep_space)


def _entropy_bits(lam: np.ndarray) -> float:
    lam = lam[lam > 0]
    return float(-(lam * np.log2(lam)).sum()) + 0.0


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``-tr(rho log2 rho)`` in bits."""
    return _entropy_bits(rho.validate().eigenvalues())


def entropy_of_eigenvalues(lam) -> float:
    return _entropy_bits(np.asarray(lam, dtype=float))


SectorKey = Callable[[np.ndarray], Any]


def sector_key(rho: DensityMatrix, key="total") -> SectorKey:
    """Classifier for basis patterns.

    ``"total"``: particle number of the pattern. ``"group"``: occupation of
    each (site, arm) group, sorted descending and joined with ``+`` (so two
    particles in one arm give ``"2+0"`` and one per arm ``"1+1"``).
    """
    if callable(key):
        return key
    if key == "total":
        return lambda pat: int(pat.sum())
    if key == "group":
        groups: dict = {}
        for k, m in enumerate(rho.space.modes):
            groups.setdefault(m.group, []).append(k)
        cols = list(groups.values())
        return lambda pat: "+".join(str(c) for c in sorted((int(pat[c].sum()) for c in cols), reverse=True))
    raise ValueError(f"unknown sector key {key!r}")


def occupancy_sector_decompose(rho: DensityMatrix, key="total") -> EntanglementReport:
    """Split ``rho`` into occupancy sectors and attribute eigenvalues/entropy to each."""
    classify = sector_key(rho, key)
    herm = rho.hermitian_part()
    labels = [classify(p) for p in rho.patterns]
    order: dict[Any, list[int]] = {}
    for i, lab in enumerate(labels):
        order.setdefault(lab, []).append(i)
    try:
        keys = sorted(order)
    except TypeError:
        keys = list(order)

    eigs, contrib = {}, {}
    mask = np.ones(herm.shape, dtype=bool)
    for lab in keys:
        idx = order[lab]
        mask[np.ix_(idx, idx)] = False
        lam = np.linalg.eigvalsh(herm[np.ix_(idx, idx)])[::-1]
        lam = np.where(np.abs(lam) < EIG_CLAMP, 0.0, lam)
        eigs[lab] = [float(x) for x in lam]
        contrib[lab] = _entropy_bits(lam)
    off = float(np.linalg.norm(herm[mask]))
    return EntanglementReport(
        total_entropy=von_neumann_entropy(rho),
        sector_eigenvalues=eigs,
        sector_entropy_contributions=contrib,
        off_block_norm=off,
        modes=[str(m) for m in rho.space.modes],
    )
