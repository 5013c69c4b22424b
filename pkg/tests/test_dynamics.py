import numpy as np
import pytest

from fockent.dynamics import (
    OperatorMatrix,
    evolve_exact,
    first_order_map,
    hubbard_onsite,
    local_operator,
    one_body_operator,
    response_order,
    spinflip_hopping,
)
from fockent.errors import FockentError, ModeError, SystemMismatchError
from fockent.fock import FockSpace, QuantumState, basis_state, build_from_ops, two_site_modes
from fockent.measures import schliemann_eta, slater_rank
from fockent.teleport import channel_state


@pytest.fixture
def mo():
    return channel_state("fermion")


def test_hopping_action_on_molecular_state(mo):
    H = spinflip_hopping(mo.space, 1.0)
    out = H.apply(mo)
    expected = (-0.5 * build_from_ops(mo.space, ["A_up", "B_up"], normalize=False)
                + 0.5 * build_from_ops(mo.space, ["B_down", "A_down"], normalize=False))
    assert np.allclose(out.vector, expected.vector)


def test_hubbard_expectation(mo):
    assert hubbard_onsite(mo.space, 1.0, "A").expectation(mo) == pytest.approx(0.25)
    with pytest.raises(ModeError):
        hubbard_onsite(mo.space, 1.0, "Z")


def test_hopping_needs_fermionic_two_site_space():
    with pytest.raises(SystemMismatchError):
        spinflip_hopping(FockSpace(two_site_modes(), "boson", 2), 1.0)


def test_exact_evolution_is_unitary(mo):
    H = hubbard_onsite(mo.space, 1.3, "A")
    psi = evolve_exact(mo, H, 0.7)
    assert psi.norm() == pytest.approx(1.0)


def test_non_hermitian_generator_rejected(mo):
    m = np.zeros((16, 16), dtype=complex)
    m[0, 1] = 1
    with pytest.raises(FockentError):
        evolve_exact(mo, OperatorMatrix(m, mo.space), 0.1)


def test_one_body_evolution_keeps_slater_rank(mo, rng):
    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = one_body_operator(mo.space, h + h.conj().T)
    psi = evolve_exact(mo, H, 0.9)
    assert slater_rank(psi) == 1
    assert schliemann_eta(psi) < 1e-9


def test_eta_response_to_hubbard(mo):
    for eps in (1e-2, 1e-3):
        psi = evolve_exact(mo, hubbard_onsite(mo.space, 1.0, "A"), eps)
        assert schliemann_eta(psi) == pytest.approx(eps / 2, rel=1e-4)


def test_first_order_map_eta_under_hopping(mo):
    eps = 1e-3
    psi = first_order_map(mo, spinflip_hopping(mo.space, 1.0), eps)
    assert schliemann_eta(psi) == pytest.approx(eps ** 2 / 2, rel=1e-4)


def test_response_order_fits(mo):
    hop = spinflip_hopping(mo.space, 1.0)
    fit = response_order("rho_norm", hop, mo)
    assert fit.order == 1
    fit = response_order("site_entropy", hop, mo)
    assert fit.order == 2
    fit = response_order("eta", hop, mo)
    assert fit.order is None  # one-body unitary: still a single Slater determinant
    assert fit.to_dict()["order"] is None


def test_response_order_validates_grid(mo):
    hop = spinflip_hopping(mo.space, 1.0)
    with pytest.raises(ValueError):
        response_order("eta", hop, mo, eps_grid=(1e-2, 1e-3))
    with pytest.raises(ValueError):
        response_order("eta", hop, mo, eps_grid=(1e-2, 2e-2, 3e-2))
    with pytest.raises(ValueError):
        response_order("nonsense", hop, mo)


def test_local_operator_matches_direct_construction(mo):
    sub_n = np.diag([0.0, 0.0, 0.0, 1.0])  # n_up n_down on one site
    lifted = local_operator(mo.space, "A", sub_n, hermitian=True)
    assert np.allclose(lifted.matrix, hubbard_onsite(mo.space, 1.0, "A").matrix)


def test_local_operator_fermionic_sign():
    sp = FockSpace(two_site_modes(), "fermion")
    # c†_{B↑} lifted from the B subspace must equal the global ladder operator
    sub = np.zeros((4, 4))
    sub[1, 0] = 1.0
    sub[3, 2] = -1.0
    lifted = local_operator(sp, "B", sub)
    psi = basis_state(sp, [1, 0, 0, 0])
    out = lifted.apply(psi)
    assert out.amplitude([1, 0, 1, 0]) == pytest.approx(-1.0)
    assert isinstance(out, QuantumState)


def test_site_entropy_has_no_first_order_response_to_one_site_generators(mo, rng):
    for _ in range(20):
        h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        H = local_operator(mo.space, "A", h + h.conj().T, hermitian=True)
        for prop in ("exact", "first_order"):
            fit = response_order("site_entropy", H, mo, propagator=prop)
            assert fit.first_order_coefficient < 1e-6
            assert fit.order is None or fit.order >= 2


def test_hubbard_rho_b_changes_at_second_order_under_truncated_map(mo):
    fit = response_order("rho_norm", hubbard_onsite(mo.space, 1.0, "A"), mo, propagator="first_order")
    assert fit.order == 2


def test_eta_hubbard_coefficient_is_half_u(mo):
    for U in (0.5, 2.0):
        fit = response_order("eta", hubbard_onsite(mo.space, U, "A"), mo)
        assert fit.order == 1
        assert fit.coefficient / U == pytest.approx(0.5, rel=1e-3)


def test_first_order_map_agrees_with_exact_to_second_order(mo):
    H = spinflip_hopping(mo.space, 1.0)
    for eps in (1e-2, 1e-3):
        gap = np.linalg.norm(first_order_map(mo, H, eps).vector - evolve_exact(mo, H, eps).vector)
        assert gap <= 1.0 * eps ** 2


def test_exact_evolution_keeps_particle_number(mo):
    psi = evolve_exact(mo, hubbard_onsite(mo.space, 1.0, "A"), 0.3)
    assert set(mo.space.particle_numbers[np.abs(psi.vector) > 1e-14]) == {2}
