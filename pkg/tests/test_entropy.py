import numpy as np
import pytest

from fockent.entropy import (
    DensityMatrix,
    density_from_state,
    entropy_of_eigenvalues,
    occupancy_sector_decompose,
    partial_trace,
    reduced_density,
    von_neumann_entropy,
)
from fockent.errors import InvalidDensityMatrix, ModeError
from fockent.fock import FockSpace, QuantumState, basis_state, two_site_modes
from fockent.teleport import channel_state


def test_molecular_orbital_site_b_is_maximally_mixed():
    rho = reduced_density(channel_state("fermion"), "B")
    assert np.allclose(rho.matrix, np.eye(4) / 4)
    assert von_neumann_entropy(rho) == pytest.approx(2.0, abs=1e-12)


def test_sector_split_of_molecular_state():
    rep = occupancy_sector_decompose(reduced_density(channel_state("fermion"), "B"))
    assert rep.sector_eigenvalues == {0: pytest.approx([0.25]), 1: pytest.approx([0.25, 0.25]), 2: pytest.approx([0.25])}
    assert rep.sector_entropy_contributions == pytest.approx({0: 0.5, 1: 1.0, 2: 0.5})
    assert rep.block_diagonal


def test_fast_reduction_matches_generic_partial_trace(rng):
    sp = FockSpace(two_site_modes(("A", "B", "C")), "fermion")
    psi = QuantumState(sp, rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)).normalize()
    for keep in ("A", "B", "C", ["A_up", "C_down"]):
        generic = partial_trace(density_from_state(psi), keep)
        fast = reduced_density(psi, keep)
        assert np.allclose(generic.matrix, fast.matrix, atol=1e-13)


def test_boson_partial_trace_has_no_signs(rng):
    sp = FockSpace(two_site_modes(), "boson", 2)
    psi = QuantumState(sp, rng.normal(size=sp.dim) + 0j).normalize()
    rho = reduced_density(psi, "A")
    amp = psi.vector.reshape(9, 9)  # B patterns slow, A patterns fast
    assert np.allclose(rho.matrix, amp.T @ amp.conj())


def test_product_state_has_zero_entropy():
    sp = FockSpace(two_site_modes(), "fermion")
    rho = reduced_density(basis_state(sp, [1, 0, 0, 1]), "A")
    assert von_neumann_entropy(rho) == 0.0


def test_partial_trace_rejects_bad_keep():
    sp = FockSpace(two_site_modes(), "fermion")
    rho = density_from_state(basis_state(sp, [1, 0, 0, 0]))
    with pytest.raises(ModeError):
        partial_trace(rho, ["A_up", "A_down", "B_up", "B_down"])
    with pytest.raises(ModeError):
        partial_trace(rho, "Z_up")


def test_invalid_density_matrices():
    sp = FockSpace(["A_up"], "fermion")
    with pytest.raises(InvalidDensityMatrix):
        von_neumann_entropy(DensityMatrix(np.array([[0.5, 0.3], [0.0, 0.5]]), sp))
    with pytest.raises(InvalidDensityMatrix):
        von_neumann_entropy(DensityMatrix(np.diag([1.2, -0.2]), sp))
    with pytest.raises(InvalidDensityMatrix):
        von_neumann_entropy(DensityMatrix(np.diag([0.5, 0.4]), sp))
    with pytest.raises(InvalidDensityMatrix):
        DensityMatrix(np.eye(3) / 3, sp)


def test_entropy_of_eigenvalues():
    assert entropy_of_eigenvalues([0.5, 0.5]) == pytest.approx(1.0)
    assert entropy_of_eigenvalues([1.0, 0.0]) == 0.0


def test_restrict_and_embed():
    rho = reduced_density(channel_state("fermion"), "B")
    block = rho.restrict([(1, 0), (0, 1)])
    assert np.allclose(block.matrix, np.eye(2) / 4)
    assert np.allclose(block.embed().matrix, np.diag([0, 0.25, 0.25, 0]))


def test_group_sector_key_labels():
    from fockent.omar import run_apparatus

    out = run_apparatus()
    rep = occupancy_sector_decompose(reduced_density(out.state, "1"), key="group")
    assert set(rep.sector_eigenvalues) >= {"2+0", "1+1"}
    assert sum(rep.sector_entropy_contributions.values()) == pytest.approx(rep.total_entropy, abs=1e-9)
