import numpy as np
import pytest

from fockent.errors import SystemMismatchError
from fockent.fock import ModeLabel, Spin, basis_state, build_from_ops
from fockent.omar import (
    ChannelVariant,
    apparatus_space,
    beam_splitter,
    build_input_state,
    channel_equivalence_report,
    closed_form_arm_output_entropy,
    depolarizing_channel,
    omar_experiment,
    qubit_entropy,
    qubit_to_occupation,
    run_apparatus,
    virtual_qubit_map,
)


@pytest.fixture(scope="module")
def result():
    return omar_experiment()


def test_input_state(result):
    inp = build_input_state()
    assert np.all(inp.state.space.particle_numbers[np.abs(inp.state.vector) > 0] == 4)
    assert result.input_side_entropy == pytest.approx(2.0, abs=1e-12)
    assert result.input_arm_entropy == pytest.approx(1.0, abs=1e-12)
    # all input entanglement sits in the one-particle-per-arm sector
    assert result.input_sectors.sector_entropy_contributions["1+1"] == pytest.approx(2.0)


def test_output_state(result):
    assert result.output_side_entropy == pytest.approx(2.0, abs=1e-12)
    rep = result.output_sectors
    assert rep.sector_eigenvalues["2+0"] == pytest.approx([0.25, 0.0], abs=1e-12)
    assert rep.sector_eigenvalues["1+1"] == pytest.approx([0.25, 0.25, 0.25, 0.0], abs=1e-12)
    assert rep.sector_entropy_contributions["2+0"] == pytest.approx(0.5)
    assert rep.sector_entropy_contributions["1+1"] == pytest.approx(1.5)
    assert rep.off_block_norm < 1e-12
    assert result.output_arm_entropy == pytest.approx(closed_form_arm_output_entropy(), abs=1e-12)


def test_beam_splitter_unitary_and_involution():
    for side in ("1", "2"):
        bs = beam_splitter(side)
        assert bs.is_unitary()
        assert np.allclose(bs.matrix @ bs.matrix, np.eye(256))
        ph = beam_splitter(side, 0.8)
        assert np.allclose(ph.matrix.conj().T @ ph.matrix, np.eye(256))


def test_single_particle_splits_evenly():
    sp = apparatus_space()
    psi = build_from_ops(sp, [ModeLabel("1", Spin.UP, "L")])
    out = beam_splitter("1").apply(psi)
    amps = out.amplitudes
    assert len(amps) == 2
    assert all(abs(a) == pytest.approx(2 ** -0.5) for a in amps.values())


def test_beam_splitter_preserves_norm():
    out = run_apparatus()
    assert out.state.norm() == pytest.approx(1.0)


def test_bad_side():
    with pytest.raises(ValueError):
        beam_splitter("3")


@pytest.mark.parametrize("phases", [(0.3, -1.1), (np.pi / 2, 2.0)])
def test_entropies_invariant_under_arm_phases(phases, result):
    other = omar_experiment(phases)
    assert other.output_arm_entropy == pytest.approx(result.output_arm_entropy, abs=1e-10)
    assert other.output_side_entropy == pytest.approx(2.0, abs=1e-10)
    for k, v in result.output_sectors.sector_eigenvalues.items():
        assert other.output_sectors.sector_eigenvalues[k] == pytest.approx(v, abs=1e-10)


def test_virtual_qubit_map(result):
    q = result.arm_in
    assert np.allclose(q, np.diag([0, 0.5, 0.5, 0]))
    assert qubit_entropy(q) == pytest.approx(1.0)
    assert np.allclose(virtual_qubit_map(np.eye(4) / 4), np.eye(4) / 4)
    m = np.arange(16.0).reshape(4, 4)
    assert np.allclose(qubit_to_occupation(virtual_qubit_map(m)), m)
    with pytest.raises(SystemMismatchError):
        virtual_qubit_map(np.eye(3))


def test_virtual_qubit_orientation():
    sp = apparatus_space().subspace([ModeLabel("1", s, "L") for s in (Spin.UP, Spin.DOWN)])
    # only n_up occupied -> qubit 1 up (0), qubit 2 down (1) -> index 1
    rho = np.zeros((4, 4))
    rho[sp.index([1, 0]), sp.index([1, 0])] = 1
    assert virtual_qubit_map(rho)[1, 1] == 1
    assert basis_state(sp, [1, 0]).norm() == 1


def test_depolarizing_channel_examples(rng):
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    rho = np.outer(v, v.conj()) / np.vdot(v, v)
    for var in ChannelVariant:
        assert np.allclose(depolarizing_channel(rho, var, 0.0), rho)
        out = depolarizing_channel(rho, var, 0.6)
        assert np.trace(out) == pytest.approx(1.0)
        assert np.linalg.eigvalsh(out).min() > -1e-12
    assert np.allclose(depolarizing_channel(rho, "uniform_two_qubit", 1.0), np.eye(4) / 4)
    with pytest.raises(ValueError):
        depolarizing_channel(rho, "uniform_two_qubit", 1.5)


def test_single_qubit_channel_spectrum(result):
    out = depolarizing_channel(result.arm_in, "single_qubit_first", 3 / 8)
    assert np.sort(np.linalg.eigvalsh(out)) == pytest.approx([1 / 8, 1 / 8, 3 / 8, 3 / 8])
    assert qubit_entropy(out) == pytest.approx(closed_form_arm_output_entropy())


def test_channel_report(result):
    rep = result.channel
    assert rep.best.variant is ChannelVariant.SINGLE_QUBIT_FIRST
    assert rep.best.p == pytest.approx(0.375, abs=1e-6)
    assert rep.best.residual <= 1e-9
    uniform = np.linalg.norm(depolarizing_channel(result.arm_in, "uniform_two_qubit", 3 / 8) - result.arm_out)
    assert uniform > 1e-2
    assert set(rep.to_dict()["grid_residuals"]) == {v.value for v in ChannelVariant}


def test_channel_report_detects_uniform_noise():
    q_in = np.diag([0.0, 1.0, 0.0, 0.0]).astype(complex)
    q_out = depolarizing_channel(q_in, "uniform_two_qubit", 0.2)
    rep = channel_equivalence_report(q_in, q_out)
    assert rep.best.variant is ChannelVariant.UNIFORM_TWO_QUBIT
    assert rep.best.p == pytest.approx(0.2, abs=1e-6)
