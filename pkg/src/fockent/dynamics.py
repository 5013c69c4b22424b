"""Test Hamiltonians, exact and truncated unitary maps, and an order-of-response probe."""

from __future__ import annotations

import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .entropy import reduced_density, von_neumann_entropy
from .errors import FockentError, ModeError, SystemMismatchError
from .fock import FockSpace, ModeLabel, QuantumState, Spin, ladder_matrix, number_matrix
from .measures import schliemann_eta

HERMITIAN_TOL = 1e-12
DEFAULT_EPS = (1e-2, 1e-3, 1e-4)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    matrix: np.ndarray
    space: FockSpace
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.space.dim, self.space.dim):
            raise SystemMismatchError("operator shape does not match its Fock space")
        if self.hermitian and np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise FockentError("operator flagged Hermitian is not")
        object.__setattr__(self, "matrix", m)

    def apply(self, state: QuantumState) -> QuantumState:
        if state.space != self.space:
            raise SystemMismatchError("operator and state live on different spaces")
        return QuantumState(self.space, self.matrix @ state.vector, False, state.truncation_loss)

    def expectation(self, state: QuantumState) -> complex:
        return complex(np.vdot(state.vector, self.matrix @ state.vector))

    def is_unitary(self, tol: float = 1e-12) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m.conj().T @ m - np.eye(len(m)))) <= tol)


def hubbard_onsite(space: FockSpace, U: float, site: str) -> OperatorMatrix:
    """``U n_{site↑} n_{site↓}``."""
    try:
        up = number_matrix(space, ModeLabel(site, Spin.UP))
        dn = number_matrix(space, ModeLabel(site, Spin.DOWN))
    except ModeError as exc:
        raise ModeError(f"site {site!r} needs both spin modes") from exc
    return OperatorMatrix(U * up @ dn, space, hermitian=True)


def one_body_operator(space: FockSpace, h: np.ndarray) -> OperatorMatrix:
    """``sum_ij h[i, j] c†_i c_j`` over canonical mode positions."""
    h = np.asarray(h, dtype=np.complex128)
    cre = [ladder_matrix(space, m, True) for m in space.modes]
    out = np.zeros((space.dim, space.dim), dtype=np.complex128)
    for i, j in zip(*np.nonzero(h)):
        out += h[i, j] * cre[i] @ cre[j].T
    herm = bool(np.allclose(h, h.conj().T, atol=HERMITIAN_TOL))
    return OperatorMatrix(out, space, hermitian=herm)


def spinflip_hopping(space: FockSpace, t: float) -> OperatorMatrix:
    """Hop between A↑ and B↓: ``t (c†_{A↑} c_{B↓} + c†_{B↓} c_{A↑})``."""
    expected = [ModeLabel("A", Spin.UP), ModeLabel("A", Spin.DOWN), ModeLabel("B", Spin.UP), ModeLabel("B", Spin.DOWN)]
    if list(space.modes) != expected or not space.is_fermionic:
        raise SystemMismatchError("spin-flip hopping is defined on the fermionic A↑, A↓, B↑, B↓ system")
    h = np.zeros((4, 4))
    h[0, 3] = h[3, 0] = t
    return one_body_operator(space, h)


def local_operator(space: FockSpace, modes, op: np.ndarray, hermitian: bool = False) -> OperatorMatrix:
    """Lift an operator on the sub-Fock space of ``modes`` to the full space.

    The selected modes are moved to the front of every creation string (with
    the fermionic reordering sign) and the operator acts there.
    """
    sel = space.modes_of(modes)
    sub = space.subspace(sel)
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (sub.dim, sub.dim):
        raise SystemMismatchError(f"local operator must be {sub.dim}x{sub.dim}")
    cols = [space.mode_index(m) for m in sel]
    rest = [k for k in range(len(space.modes)) if k not in cols]
    pats = space.patterns
    k_idx = pats[:, cols] @ sub.strides
    rest_key = pats[:, rest] @ space.strides[rest] if rest else np.zeros(space.dim, dtype=np.int64)
    if space.is_fermionic:
        lead = np.zeros(len(space.modes), dtype=np.bool_)
        lead[cols] = True
        s = _kernels.reorder_signs(np.ascontiguousarray(pats), lead)
    else:
        s = np.ones(space.dim)
    same_rest = rest_key[:, None] == rest_key[None, :]
    full = np.where(same_rest, op[k_idx[:, None], k_idx[None, :]], 0.0) * s[:, None] * s[None, :]
    return OperatorMatrix(full, space, hermitian)


def _check_hermitian(H: OperatorMatrix, state: QuantumState):
    if H.space != state.space:
        raise SystemMismatchError("Hamiltonian and state live on different spaces")
    if np.max(np.abs(H.matrix - H.matrix.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise FockentError("generator must be Hermitian")


def evolve_exact(state: QuantumState, H: OperatorMatrix, eps: float) -> QuantumState:
    """``exp(-i eps H)|state>`` via the spectral decomposition of ``H``."""
    _check_hermitian(H, state)
    lam, vecs = np.linalg.eigh(0.5 * (H.matrix + H.matrix.conj().T))
    out = vecs @ (np.exp(-1j * eps * lam) * (vecs.conj().T @ state.vector))
    return QuantumState(state.space, out, state.normalized, state.truncation_loss)


def first_order_map(state: QuantumState, H: OperatorMatrix, eps: float) -> QuantumState:
    """``(1 - i eps H)|state>`` renormalized."""
    _check_hermitian(H, state)
    raw = state.vector - 1j * eps * (H.matrix @ state.vector)
    return QuantumState(state.space, raw, False, state.truncation_loss).normalize()


PROPAGATORS = {"exact": evolve_exact, "first_order": first_order_map}


def measure_function(name: str, reference: QuantumState, keep="B") -> Callable[[QuantumState], float]:
    """``site_entropy``, ``eta`` or ``rho_norm`` (Frobenius distance of the reduced matrix from the reference)."""
    if name == "site_entropy":
        return lambda psi: von_neumann_entropy(reduced_density(psi, keep))
    if name == "eta":
        return schliemann_eta
    if name == "rho_norm":
        ref = reduced_density(reference, keep).matrix
        return lambda psi: float(np.linalg.norm(reduced_density(psi, keep).matrix - ref))
    raise ValueError(f"unknown measure {name!r}")


@dataclass
class ResponseFit:
    """Result of a log-log fit of |m(eps) - m(0)| against eps.

    ``order`` is None when no grid point rises above the noise floor (the
    measure does not respond at any resolvable order).
    """

    order: int | None
    coefficient: float
    slope: float
    first_order_coefficient: float
    eps: list[float]
    values: list[float]
    deltas: list[float]
    baseline: float
    propagator: str = "exact"
    notes: list[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "order": self.order,
            "coefficient": self.coefficient,
            "slope": self.slope,
            "first_order_coefficient": self.first_order_coefficient,
            "baseline": self.baseline,
            "propagator": self.propagator,
            "table": [{"eps": e, "value": v, "delta": d} for e, v, d in zip(self.eps, self.values, self.deltas)],
            "notes": list(self.notes),
        }


def response_order(
    measure: Callable[[QuantumState], float] | str,
    H: OperatorMatrix,
    state: QuantumState,
    eps_grid: Sequence[float] = DEFAULT_EPS,
    propagator: str = "exact",
    noise_floor: float = 1e-12,
    keep="B",
) -> ResponseFit:
    eps = sorted(float(e) for e in eps_grid)
    if len(eps) < 3 or eps[0] <= 0:
        raise ValueError("need at least three positive eps values")
    if np.log10(eps[-1] / eps[0]) < 2 - 1e-9:
        raise ValueError("eps grid should span at least three decades")
    fn = measure_function(measure, state, keep) if isinstance(measure, str) else measure
    step = PROPAGATORS[propagator]
    m0 = fn(state)
    values = [fn(step(state, H, e)) for e in eps]
    deltas = [abs(v - m0) for v in values]
    first = deltas[0] / eps[0]
    notes = []
    live = [(e, d) for e, d in zip(eps, deltas) if d > noise_floor]
    if len(live) < 2:
        notes.append(f"response below noise floor {noise_floor:g} on the grid")
        return ResponseFit(None, 0.0, float("nan"), first, eps, values, deltas, m0, propagator, notes)
    le = np.log([e for e, _ in live])
    ld = np.log([d for _, d in live])
    slope = float(np.polyfit(le, ld, 1)[0])
    order = int(round(slope))
    if abs(slope - order) > 0.2:
        msg = f"log-log slope {slope:.3f} is far from an integer"
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    coeff = float(np.exp(np.mean(ld - order * le)))
    if len(live) < len(eps):
        notes.append(f"{len(eps) - len(live)} grid point(s) below noise floor excluded from fit")
    return ResponseFit(order, coeff, slope, first, eps, values, deltas, m0, propagator, notes)
