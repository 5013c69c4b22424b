import itertools

import numpy as np
import pytest

from fockent.errors import DestroyedStateError
from fockent.measures import schliemann_eta, schliemann_eta_dual
from fockent.overlap import BellKind, bell_state_nonorthogonal, eta_vs_overlap_curve, orbital_coefficients

UP, DOWN = np.array([1.0, 0.0]), np.array([0.0, 1.0])
KIND_TERMS = {
    "psi-plus": ((UP, DOWN), (DOWN, UP), 1),
    "psi-minus": ((UP, DOWN), (DOWN, UP), -1),
    "phi-plus": ((UP, UP), (DOWN, DOWN), 1),
    "phi-minus": ((UP, UP), (DOWN, DOWN), -1),
}


def first_quantized(kind, S, boson=False):
    """Two-particle wavefunction over (orbital x spin)^2 built from raw, non-orthogonal orbitals."""
    phi_a = np.array([1.0, 0.0])
    phi_b = np.array([S, np.sqrt(1 - S * S)])  # Gram-Schmidt reference frame
    (sa1, sb1), (sa2, sb2), sign = KIND_TERMS[kind]
    psi = np.zeros((4, 4))
    for (sa, sb), c in (((sa1, sb1), 1), ((sa2, sb2), sign)):
        x, y = np.kron(phi_a, sa), np.kron(phi_b, sb)
        psi += c * (np.outer(x, y) + (1 if boson else -1) * np.outer(y, x)) / np.sqrt(2)
    psi /= np.sqrt(2)
    return psi, np.linalg.norm(psi)


def eps_contraction_eta(psi):
    eps = np.zeros((4,) * 4)
    for p in itertools.permutations(range(4)):
        eps[p] = np.linalg.det(np.eye(4)[list(p)])
    psi = psi / np.linalg.norm(psi)
    return abs(np.einsum("abcd,ab,cd->", eps, psi, psi)) / 2


@pytest.mark.parametrize("kind", [k.value for k in BellKind])
@pytest.mark.parametrize("S", [0.0, 0.3, 0.7, 0.95])
def test_against_first_quantized_oracle(kind, S):
    psi, norm = first_quantized(kind, S)
    b = bell_state_nonorthogonal(kind, S)
    assert b.prenormalization_norm == pytest.approx(norm, abs=1e-12)
    assert schliemann_eta(b.state) == pytest.approx(eps_contraction_eta(psi), abs=1e-12)


@pytest.mark.parametrize("kind", [k.value for k in BellKind])
def test_boson_prenorm_oracle(kind):
    for S in (0.0, 0.5, 0.9):
        _, norm = first_quantized(kind, S, boson=True)
        assert bell_state_nonorthogonal(kind, S, "boson").prenormalization_norm == pytest.approx(norm, abs=1e-12)


def test_psi_minus_closed_form():
    for S in np.linspace(0, 0.999, 17):
        eta = schliemann_eta(bell_state_nonorthogonal("psi-minus", S).state)
        assert eta == pytest.approx((1 - S * S) / (1 + S * S), abs=1e-12)


def test_fermionic_prenorms():
    S = 0.6
    assert bell_state_nonorthogonal("psi-plus", S).prenormalization_norm == pytest.approx(np.sqrt(1 - S * S))
    assert bell_state_nonorthogonal("psi-minus", S).prenormalization_norm == pytest.approx(np.sqrt(1 + S * S))
    assert bell_state_nonorthogonal("phi-plus", S).prenormalization_norm == pytest.approx(np.sqrt(1 - S * S))


def test_scheme_independence():
    for kind in BellKind:
        a = bell_state_nonorthogonal(kind, 0.8, scheme="symmetric")
        b = bell_state_nonorthogonal(kind, 0.8, scheme="sequential")
        assert a.prenormalization_norm == pytest.approx(b.prenormalization_norm)
        assert schliemann_eta(a.state) == pytest.approx(schliemann_eta_dual(b.state))


def test_lowdin_coefficients_reproduce_overlap():
    for S in (0.1, 0.5, 0.99):
        c = orbital_coefficients(S)
        assert c[:, 0] @ c[:, 1] == pytest.approx(S)
        assert np.linalg.norm(c[:, 0]) == pytest.approx(1.0)


def test_destroyed_state_error():
    with pytest.raises(DestroyedStateError):
        bell_state_nonorthogonal("psi-plus", 0.9999, min_norm=0.02)
    with pytest.raises(ValueError):
        orbital_coefficients(1.0)


def test_curve_marks_destroyed_points_and_boson_eta():
    pts = eta_vs_overlap_curve("psi-plus", [0.0, 0.9999], min_norm=0.02)
    assert not pts[0].destroyed and pts[0].eta == pytest.approx(1.0)
    assert pts[1].destroyed and pts[1].eta is None
    assert pts[1].prenormalization_norm == pytest.approx(np.sqrt(1 - 0.9999 ** 2))
    bos = eta_vs_overlap_curve("psi-minus", [0.0, 0.5], statistics="boson")
    assert all(p.eta is None for p in bos)
