"""Two-qubit teleportation through the delocalized two-particle state.

Each site-spin occupation of the channel is read as a virtual qubit. Alice
entangles two source spin qubits C1, C2 with her occupations through
occupation-flipping CNOTs, applies Hadamards, and measures four bits; Bob
undoes the branch-dependent unitary on his occupations.

The ideal CNOT changes particle number and so has no physical realization.
For bosons it can be approximated by trading particles with a large coherent
reservoir D; the finite size of D makes the protocol imperfect, and this
module quantifies that fidelity loss.

The simulation keeps a dense amplitude tensor with axes
``[C1, C2, A_up, A_down, B_up, B_down(, D)]``. Occupation tensors carry the
Fock amplitudes of the channel directly, including their fermionic signs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.stats import poisson

from .errors import FockentError, NormalizationError, SystemMismatchError
from .fock import FockSpace, QuantumState, Spin, Statistics, build_from_ops, coherent_amplitudes, two_site_modes

TAIL_TOL = 1e-8
CUTOFF_HEADROOM = 2
BOSON_CAP = 2
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)


def channel_state(statistics="fermion") -> QuantumState:
    """``(c†_{A↑} + c†_{B↑})(c†_{A↓} + c†_{B↓})|0> / 2``."""
    stats = Statistics(statistics)
    space = FockSpace(two_site_modes(), stats, BOSON_CAP if stats is Statistics.BOSON else None)
    up = {"A_up": 1.0, "B_up": 1.0}
    dn = {"A_down": 1.0, "B_down": 1.0}
    return build_from_ops(space, [[up, dn]], [0.5])


# -- virtual-qubit isomorphism -------------------------------------------------

@dataclass(frozen=True)
class Isomorphism:
    """How a site's (n_up, n_down) pair reads as two qubits.

    ``occupied_is_up``: an occupied mode is qubit state |0> ("up").
    ``up_mode_first``: the spin-up mode is the first virtual qubit.
    """

    occupied_is_up: bool = True
    up_mode_first: bool = True

    def mode_axis(self, qubit: int) -> int:
        """Offset (0 = up mode, 1 = down mode) of the mode carrying virtual qubit 1 or 2."""
        if qubit not in (1, 2):
            raise ValueError("virtual qubit index must be 1 or 2")
        first = 0 if self.up_mode_first else 1
        return first if qubit == 1 else 1 - first

    def bit(self, n: int) -> int:
        return 1 - n if self.occupied_is_up else n

    def occupation_to_qubit(self, n_up: int, n_down: int) -> int:
        """Two-qubit basis index ``2 q1 + q2`` for an occupation pair."""
        occ = (n_up, n_down)
        return 2 * self.bit(occ[self.mode_axis(1)]) + self.bit(occ[self.mode_axis(2)])


DEFAULT_ISOMORPHISM = Isomorphism()


# -- operators on a few tensor axes --------------------------------------------

@dataclass(frozen=True, eq=False)
class LocalOperator:
    """Dense operator on a product of named axes (first axis varies slowest)."""

    matrix: np.ndarray
    axes: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        n = int(np.prod(self.dims))
        if self.matrix.shape != (n, n):
            raise SystemMismatchError("operator shape does not match its axes")

    def is_unitary(self, tol: float = 1e-12) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m.conj().T @ m - np.eye(len(m)))) <= tol)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)


def _apply_local(psi: np.ndarray, op: np.ndarray, axes: list[int]) -> np.ndarray:
    moved = np.moveaxis(psi, axes, list(range(len(axes))))
    shape = moved.shape
    k = int(np.prod(shape[: len(axes)]))
    out = (op @ moved.reshape(k, -1)).reshape(shape)
    return np.moveaxis(out, list(range(len(axes))), axes)


def _flip_x(d: int) -> np.ndarray:
    """Occupation flip 0 <-> 1, identity on higher occupations."""
    x = np.eye(d, dtype=np.complex128)
    x[:2, :2] = [[0, 1], [1, 0]]
    return x


def virtual_cnot_ideal(which: int, iso: Isomorphism = DEFAULT_ISOMORPHISM) -> LocalOperator:
    """Flip the occupation carrying virtual qubit ``which`` when the control spin is up.

    Axes: control qubit (|0> = up), then site A (n_up, n_down).
    """
    up_proj = np.diag([1.0, 0.0])
    target = [np.eye(2), np.eye(2)]
    target[iso.mode_axis(which)] = _flip_x(2)
    flip = np.kron(target[0], target[1])
    m = np.kron(up_proj, flip) + np.kron(np.eye(2) - up_proj, np.eye(4))
    return LocalOperator(m.astype(np.complex128), (f"C{which}", "A_up", "A_down"), (2, 2, 2))


# -- coherent reservoir --------------------------------------------------------

def tail_cutoff(alpha: complex, tail: float = TAIL_TOL) -> int:
    """Smallest n with P(N > n) <= tail for N ~ Poisson(|alpha|^2)."""
    mu = abs(alpha) ** 2
    n = int(mu)
    while poisson.sf(n, mu) > tail:
        n += 1
    return n


@dataclass(frozen=True, eq=False)
class CoherentSource:
    alpha: complex
    cutoff: int
    amplitudes: np.ndarray = field(repr=False)

    @classmethod
    def for_alpha(cls, alpha: complex, cutoff: int | None = None, tail: float = TAIL_TOL) -> CoherentSource:
        """Truncated |alpha>; the default cutoff adds headroom for the two particles exchanged with site A."""
        need = tail_cutoff(alpha, tail)
        if cutoff is None:
            cutoff = need + CUTOFF_HEADROOM
        elif cutoff < need:
            raise FockentError(f"cutoff {cutoff} leaves Poisson tail {poisson.sf(cutoff, abs(alpha) ** 2):.3g} > {tail:g}")
        return cls(complex(alpha), int(cutoff), coherent_amplitudes(alpha, cutoff))

    @property
    def tail_probability(self) -> float:
        return float(poisson.sf(self.cutoff, abs(self.alpha) ** 2))

    def eigen_residual(self) -> float:
        """``||(a - alpha)|alpha>||`` for the (unrenormalized) truncated vector."""
        n = np.arange(self.cutoff + 1)
        lowered = np.zeros_like(self.amplitudes)
        lowered[:-1] = np.sqrt(n[1:]) * self.amplitudes[1:]
        return float(np.linalg.norm(lowered - self.alpha * self.amplitudes))

    def residual_bound(self) -> float:
        """``|alpha| sqrt(P(N >= cutoff))``, which dominates the last retained amplitude."""
        mu = abs(self.alpha) ** 2
        return abs(self.alpha) * math.sqrt(poisson.sf(self.cutoff - 1, mu))

    def vector(self) -> np.ndarray:
        return self.amplitudes / np.linalg.norm(self.amplitudes)


def _reservoir_flip(alpha: complex, d_a: int, d_d: int) -> np.ndarray:
    """``a†(1 - n_a) b_D / alpha + h.c.`` on (A mode, D)."""
    a = np.diag(np.sqrt(np.arange(1, d_a)), 1).astype(np.complex128)
    one_minus_n = np.diag(1.0 - np.arange(d_a))
    b = np.diag(np.sqrt(np.arange(1, d_d)), 1).astype(np.complex128)
    hop = np.kron(a.T @ one_minus_n, b) / alpha
    return hop + hop.conj().T


def cnot_hamiltonian_coherent(which: int, coupling: float, alpha: complex, d_cutoff: int,
                              statistics="boson", iso: Isomorphism = DEFAULT_ISOMORPHISM,
                              cap: int = BOSON_CAP) -> LocalOperator:
    """``g P_up ⊗ (1 - X_alpha) / 2`` on (control, target A mode, D).

    ``X_alpha`` trades one particle between the target mode and D. Evolving
    for time ``pi / g`` gives the reservoir-assisted CNOT; as alpha grows,
    ``b_D / alpha`` acts as the identity on D and ``X_alpha`` becomes the
    occupation flip.
    """
    if Statistics(statistics) is Statistics.FERMION:
        raise FockentError("no coherent reservoir exists for fermions (Pauli exclusion)")
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    d_a, d_d = cap + 1, d_cutoff + 1
    k = 0.5 * (np.eye(d_a * d_d) - _reservoir_flip(alpha, d_a, d_d))
    h = coupling * np.kron(np.diag([1.0, 0.0]), k)
    spin = "up" if iso.mode_axis(which) == 0 else "down"
    return LocalOperator(h, (f"C{which}", f"A_{spin}", "D"), (2, d_a, d_d))


@lru_cache(maxsize=16)
def _reservoir_cnot_block(alpha: complex, d_a: int, d_d: int) -> np.ndarray:
    k = 0.5 * (np.eye(d_a * d_d) - _reservoir_flip(alpha, d_a, d_d))
    return expm(-1j * math.pi * k)


# -- protocol ------------------------------------------------------------------

@dataclass
class ProtocolResult:
    """One measurement branch: bits (c1, c2, a1, a2), its probability, Bob's corrected state and fidelity."""

    bits: tuple[bool, bool, bool, bool]
    probability: float
    bob_state: np.ndarray
    fidelity: float


@dataclass
class ProtocolRun:
    mode: str
    source: np.ndarray
    branches: list[ProtocolResult]
    alpha: complex | None = None
    cutoff: int | None = None

    @property
    def average_fidelity(self) -> float:
        return float(sum(b.probability * b.fidelity for b in self.branches))

    @property
    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches))

    def to_dict(self):
        return {
            "mode": self.mode,
            "alpha": None if self.alpha is None else [self.alpha.real, self.alpha.imag],
            "cutoff": self.cutoff,
            "average_fidelity": self.average_fidelity,
            "branches": [
                {"bits": [int(x) for x in b.bits], "probability": b.probability, "fidelity": b.fidelity}
                for b in self.branches
            ],
        }


def _resource_tensor(statistics, d: int) -> np.ndarray:
    psi = channel_state(statistics)
    r = np.zeros((d,) * 4, dtype=np.complex128)
    for pat, amp in psi.amplitudes.items():
        if max(pat) >= d:
            raise SystemMismatchError("channel state exceeds the simulated occupation range")
        r[pat] = amp
    return r


def _source_vector(source) -> np.ndarray:
    s = np.asarray(source, dtype=np.complex128).reshape(-1)
    if s.shape != (4,):
        raise SystemMismatchError("source must hold four two-qubit amplitudes")
    if abs(np.linalg.norm(s) - 1.0) > 1e-9:
        raise NormalizationError("source state must be normalized")
    return s


def _alice(psi: np.ndarray, iso: Isomorphism, cnot) -> np.ndarray:
    for which in (1, 2):
        psi = cnot(psi, which, 2 + iso.mode_axis(which))
    psi = _apply_local(psi, HADAMARD, [0])
    return _apply_local(psi, HADAMARD, [1])


def _ideal_cnot(psi: np.ndarray, which: int, target_axis: int) -> np.ndarray:
    out = psi.copy()
    ctrl = which - 1
    up = [slice(None)] * psi.ndim
    up[ctrl] = 0
    out[tuple(up)] = np.flip(psi[tuple(up)], axis=target_axis - 1)
    return out


def _bob_qubits(block: np.ndarray, iso: Isomorphism) -> np.ndarray:
    """Bob's (B_up, B_down) amplitudes (optionally with a trailing D axis) in the qubit basis."""
    out = np.zeros((4,) + block.shape[2:], dtype=np.complex128)
    for nu, nd in itertools.product((0, 1), repeat=2):
        out[iso.occupation_to_qubit(nu, nd)] = block[nu, nd]
    return out


def _branch_bits():
    return list(itertools.product((0, 1), repeat=4))


@lru_cache(maxsize=8)
def branch_corrections(statistics="fermion", iso: Isomorphism = DEFAULT_ISOMORPHISM) -> dict:
    """Correction unitary for every branch, read off the ideal protocol's linear branch maps.

    Branch map ``M_b`` sends the source to Bob's unnormalized state; it equals
    ``V_b / 4`` with ``V_b`` unitary, and Bob applies ``V_b^†``.
    """
    r = _resource_tensor(statistics, 2)
    maps = {b: np.zeros((4, 4), dtype=np.complex128) for b in _branch_bits()}
    for k in range(4):
        src = np.zeros(4, dtype=np.complex128)
        src[k] = 1.0
        psi = _alice(np.einsum("c,abde->cabde", src, r).reshape((2, 2) + r.shape), iso, _ideal_cnot)
        for b in maps:
            maps[b][:, k] = _bob_qubits(psi[b], iso)
    out = {}
    for b, m in maps.items():
        v = 4.0 * m
        if np.max(np.abs(v.conj().T @ v - np.eye(4))) > 1e-12:
            raise FockentError(f"branch {b} map is not proportional to a unitary")
        out[b] = v.conj().T
    return out


def run_protocol(source, mode: str = "ideal", statistics="fermion", alpha: complex | None = None,
                 cutoff: int | None = None, iso: Isomorphism = DEFAULT_ISOMORPHISM) -> ProtocolRun:
    """Teleport a two-qubit pure ``source`` (basis index ``2 c1 + c2``, |0> = up)."""
    s = _source_vector(source)
    stats = Statistics(statistics)
    corrections = branch_corrections(stats.value, iso)
    if mode == "ideal":
        psi = np.einsum("c,abde->cabde", s, _resource_tensor(stats, 2)).reshape((2, 2) + (2,) * 4)
        psi = _alice(psi, iso, _ideal_cnot)
        src_alpha, src_cut = None, None
    elif mode == "coherent":
        if stats is Statistics.FERMION:
            raise FockentError("coherent mode needs the bosonic channel")
        if alpha is None:
            raise ValueError("coherent mode needs alpha")
        res = CoherentSource.for_alpha(alpha, cutoff)
        d = BOSON_CAP + 1
        r = _resource_tensor(stats, d)
        psi = np.einsum("c,abde,f->cabdef", s, r, res.vector()).reshape((2, 2) + (d,) * 4 + (res.cutoff + 1,))
        block = _reservoir_cnot_block(res.alpha, d, res.cutoff + 1)

        def cnot(p, which, target_axis):
            up = [slice(None)] * p.ndim
            up[which - 1] = 0
            sub = p[tuple(up)]
            p = p.copy()
            p[tuple(up)] = _apply_local(sub, block, [target_axis - 1, sub.ndim - 1])
            return p

        psi = _alice(psi, iso, cnot)
        if np.linalg.norm(psi[:, :, 2:]) + np.linalg.norm(psi[:, :, :, 2:]) > 1e-12:
            raise FockentError("site A leaked beyond single occupancy")
        src_alpha, src_cut = res.alpha, res.cutoff
    else:
        raise ValueError(f"unknown mode {mode!r}")

    branches = []
    for b in _branch_bits():
        bob = _bob_qubits(psi[b], iso)
        bob = bob.reshape(4, -1)
        rho = bob @ bob.conj().T
        p = float(np.trace(rho).real)
        if p > 1e-15:
            rho = corrections[b] @ (rho / p) @ corrections[b].conj().T
            fid = float(np.vdot(s, rho @ s).real)
        else:
            rho, fid = np.zeros((4, 4), dtype=np.complex128), 0.0
        branches.append(ProtocolResult(tuple(bool(x) for x in b), p, rho, fid))
    return ProtocolRun(mode, s, branches, src_alpha, src_cut)


def random_source(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    return v / np.linalg.norm(v)


def coherent_sweep(source, mu_grid=(1, 4, 25, 100), iso: Isomorphism = DEFAULT_ISOMORPHISM) -> list[tuple[float, float]]:
    """(|alpha|^2, average fidelity) along a grid of real alpha."""
    return [(float(mu), run_protocol(source, "coherent", "boson", math.sqrt(mu), iso=iso).average_fidelity)
            for mu in mu_grid]
