import json

import numpy as np
import pytest

from fockent.errors import ModeError, NormalizationError, SystemMismatchError, ZeroNormError
from fockent.fock import (
    FockSpace,
    ModeLabel,
    QuantumState,
    Spin,
    apply_annihilation,
    apply_creation,
    basis_state,
    build_from_ops,
    coherent_state,
    inner_product,
    ladder_matrix,
    load_state,
    number_distribution,
    number_sector_project,
    parse_mode,
    save_state,
    state_from_dict,
    state_to_dict,
    transform_modes,
    two_site_modes,
    vacuum,
)


@pytest.fixture
def fspace():
    return FockSpace(two_site_modes(), "fermion")


def test_canonical_order_and_dimension():
    sp = FockSpace(["B_down", "A_up", "B_up", "A_down"])
    assert [str(m) for m in sp.modes] == ["A_up", "A_down", "B_up", "B_down"]
    assert sp.dim == 16
    bsp = FockSpace(two_site_modes(), "boson", 2)
    assert bsp.dim == 81


def test_first_mode_varies_fastest():
    sp = FockSpace(["A_up", "A_down"])
    assert [sp.pattern_label(p) for p in sp.patterns] == ["00", "10", "01", "11"]


def test_parse_mode_forms():
    assert parse_mode("1/L_down") == ModeLabel("1", Spin.DOWN, "L")
    assert parse_mode(("A", "up")) == ModeLabel("A", Spin.UP)
    assert str(ModeLabel("2", "up", "R")) == "2/R_up"
    with pytest.raises(ModeError):
        parse_mode("A_sideways")


def test_duplicate_modes_rejected():
    with pytest.raises(ModeError):
        FockSpace(["A_up", "A_up"])


def test_creation_sign_string(fspace):
    # c†_{B↑} on |A↑> picks up one sign from the occupied A↑
    psi = apply_creation(basis_state(fspace, [1, 0, 0, 0]), "B_up")
    assert psi.amplitude([1, 0, 1, 0]) == pytest.approx(-1.0)
    # c†_{A↑} c†_{B↑}|0> is the canonical basis vector with + sign
    assert build_from_ops(fspace, ["A_up", "B_up"]).amplitude([1, 0, 1, 0]) == pytest.approx(1.0)
    assert build_from_ops(fspace, ["B_up", "A_up"]).amplitude([1, 0, 1, 0]) == pytest.approx(-1.0)


def test_pauli_exclusion(fspace):
    assert apply_creation(basis_state(fspace, [1, 0, 0, 0]), "A_up").is_zero()
    with pytest.raises(ZeroNormError):
        build_from_ops(fspace, ["A_up", "A_up"])


def test_boson_ladder_factors():
    sp = FockSpace(["A_up"], "boson", 3)
    psi = apply_creation(apply_creation(vacuum(sp), "A_up"), "A_up")
    assert psi.amplitude([2]) == pytest.approx(np.sqrt(2))
    down = apply_annihilation(psi, "A_up")
    assert down.amplitude([1]) == pytest.approx(2.0)


def test_boson_truncation_is_recorded():
    sp = FockSpace(["A_up"], "boson", 1)
    psi = apply_creation(basis_state(sp, [1]), "A_up")
    assert psi.is_zero()
    assert psi.truncation_loss == pytest.approx(1.0)


def test_ladder_matrices_anticommute(fspace):
    c = [ladder_matrix(fspace, m, True) for m in fspace.modes]
    for i in range(4):
        for j in range(4):
            anti = c[i] @ c[j].T + c[j].T @ c[i]
            assert np.allclose(anti, np.eye(16) * (i == j))
            assert np.allclose(c[i] @ c[j] + c[j] @ c[i], 0)


def test_molecular_orbital_amplitudes(fspace):
    up = {"A_up": 1, "B_up": 1}
    dn = {"A_down": 1, "B_down": 1}
    psi = build_from_ops(fspace, [[up, dn]], [0.5])
    amps = {fspace.pattern_label(k): v for k, v in psi.amplitudes.items()}
    assert amps == pytest.approx({"1100": 0.5, "1001": 0.5, "0110": -0.5, "0011": 0.5})


def test_normalization_flag_and_error(fspace):
    raw = build_from_ops(fspace, [["A_up", "B_down"], ["A_down", "B_up"]], normalize=False)
    assert not raw.normalized
    assert raw.norm() == pytest.approx(np.sqrt(2))
    assert raw.normalize().normalized
    with pytest.raises(ZeroNormError):
        (0 * raw).normalize()


def test_state_mismatch(fspace):
    other = FockSpace(two_site_modes(), "boson", 2)
    with pytest.raises(SystemMismatchError):
        vacuum(fspace) + vacuum(other)


def test_number_sector_projection(fspace):
    psi = (vacuum(fspace) + basis_state(fspace, [1, 1, 0, 0])).normalize()
    proj, kept = number_sector_project(psi, 2)
    assert kept == pytest.approx(2 ** -0.5)
    assert number_distribution(psi) == pytest.approx({0: 0.5, 2: 0.5})
    assert proj.normalize().amplitude([1, 1, 0, 0]) == pytest.approx(1.0)


def test_transform_modes_unitary_preserves_inner_products(fspace, rng):
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    a = QuantumState(fspace, rng.normal(size=16) + 0j).normalize()
    b = QuantumState(fspace, rng.normal(size=16) + 0j).normalize()
    ta, tb = transform_modes(a, q), transform_modes(b, q)
    assert inner_product(ta, tb) == pytest.approx(inner_product(a, b))


def test_transform_modes_matches_orbital_products(fspace):
    u = np.zeros((4, 4))
    u[0, 0] = u[2, 0] = u[0, 2] = 2 ** -0.5
    u[2, 2] = -(2 ** -0.5)
    u[1, 1] = u[3, 3] = 1
    psi = transform_modes(build_from_ops(fspace, ["A_up", "A_down"]), u)
    direct = build_from_ops(fspace, [[{"A_up": 2 ** -0.5, "B_up": 2 ** -0.5}, "A_down"]])
    assert np.allclose(psi.vector, direct.vector)


def test_coherent_state_eigen():
    sp = FockSpace(["D"], "boson", 40)
    psi = coherent_state(sp, "D", 2.0)
    lowered = apply_annihilation(psi, "D")
    assert np.linalg.norm(lowered.vector - 2.0 * psi.vector) < 1e-6
    assert psi.norm() == pytest.approx(1.0, abs=1e-9)


def test_state_file_round_trip(tmp_path, fspace, rng):
    psi = QuantumState(fspace, rng.normal(size=16) + 1j * rng.normal(size=16)).normalize()
    path = tmp_path / "s.state"
    save_state(psi, path)
    back, norm = load_state(path)
    assert norm == pytest.approx(1.0)
    assert np.allclose(back.vector, psi.vector)
    doc = json.loads(path.read_text())
    assert {"statistics", "modes", "terms"} <= set(doc)


def test_state_document_in_noncanonical_order(fspace):
    doc = {
        "statistics": "fermion",
        "modes": [{"site": "B", "spin": "up"}, {"site": "A", "spin": "up"}],
        "terms": [{"occupations": [1, 1], "re": 2.0, "im": 0.0}],
    }
    psi, norm = state_from_dict(doc)
    # c†_{B↑} c†_{A↑}|0> = -c†_{A↑} c†_{B↑}|0>
    assert norm == pytest.approx(2.0)
    assert psi.amplitude([1, 1]) == pytest.approx(-1.0)


def test_state_to_dict_boson_nmax():
    sp = FockSpace(two_site_modes(), "boson", 3)
    doc = state_to_dict(basis_state(sp, [2, 0, 0, 1]))
    assert doc["nmax"] == 3
    again, _ = state_from_dict(doc)
    assert again.space == sp


def test_normalization_error_reported(fspace):
    from fockent.entropy import reduced_density

    with pytest.raises(NormalizationError):
        reduced_density(2 * basis_state(fspace, [1, 0, 0, 1]), "B")
