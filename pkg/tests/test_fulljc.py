import math

import numpy as np
import pytest

from cavom.fulljc import (FIG9_BASE, FIG10_BASE, DegenerateEigenvector,
                          FullModelDecomposition, SingleExcitationBasis,
                          build_hamiltonian, decompose, detuning_sweep_point,
                          full_scattering, s_matrix_elements,
                          sideband_sweep_point, validity_sweep_detuning)
from cavom.params import DriveFrequency, SystemParams, drive_at, get_preset, \
    solve_resonant_drive
from cavom.scattering import Channel


def empty_system(delta_c=0.0):
    params = SystemParams(g0=0.0, gamma=0.0, kappa_r=0.5, kappa_t=0.5,
                          kappa_in=0.0, omega_m=0.3, omega_rec=0.003,
                          atom_cavity_detuning=100.0, x0=math.pi / 4)
    return params, drive_at(params, delta_c)


def fiber_system():
    params = get_preset("fiber-I").replace(omega_m=0.05, atom_cavity_detuning=164.0)
    return params, solve_resonant_drive(params, params.x0)


def test_hamiltonian_is_complex_symmetric():
    params, drive = fiber_system()
    h = build_hamiltonian(params, drive, 32)
    assert np.max(np.abs(h - h.T)) < 1e-14


def test_decoupled_photon_branch():
    params, drive = empty_system(delta_c=0.25)
    n = 16
    h = build_hamiltonian(params, drive, n)
    dec = decompose(h)
    expected = np.concatenate([
        params.omega_m * np.arange(n) - drive.delta_c - 0.5j * params.kappa,
        params.omega_m * np.arange(n) - drive.delta_0])
    expected = expected[np.lexsort((expected.imag, expected.real))]
    assert np.allclose(dec.eigenvalues, expected, atol=1e-10)


def test_pointlike_atom_polaritons():
    """eta = 0: each phonon sector carries the bare two-level anticrossing."""
    params = SystemParams(g0=3.0, gamma=0.8, kappa_r=0.6, kappa_t=0.4,
                          kappa_in=0.0, omega_m=0.5, omega_rec=0.0,
                          atom_cavity_detuning=2.0, x0=0.0)
    drive = drive_at(params, -1.0)
    n = 8
    dec = decompose(build_hamiltonian(params, drive, n))
    expected = []
    g = params.g0     # full coupling at the anti-node
    for m in range(n):
        a = params.omega_m * m - drive.delta_c - 0.5j * params.kappa
        b = params.omega_m * m - drive.delta_0 - 0.5j * params.gamma
        disc = np.sqrt(((a - b) / 2) ** 2 + g**2 + 0j)
        expected += [(a + b) / 2 - disc, (a + b) / 2 + disc]
    expected = np.array(expected)
    expected = expected[np.lexsort((expected.imag, expected.real))]
    assert np.allclose(dec.eigenvalues, expected, atol=1e-10)


def test_decompose_diagonal():
    diag = np.diag(np.array([1.0 - 0.1j, 2.0 - 0.2j, 3.0 - 0.3j, 4.0 - 0.4j]))
    dec = decompose(diag)
    assert np.allclose(dec.eigenvalues, np.diag(diag))
    assert np.allclose(np.abs(dec.vectors), np.eye(4), atol=1e-14)


def test_decompose_invariants():
    params, drive = fiber_system()
    h = build_hamiltonian(params, drive, 64)
    dec = decompose(h)
    assert dec.completeness_defect() < 1e-8
    h_norm = np.linalg.norm(h)
    assert np.max(dec.residuals(h)) < 1e-9 * h_norm


def test_degenerate_eigenvector_detected():
    # a 2x2 Jordan-like complex-symmetric block sits at an exceptional point
    block = np.array([[1.0, 1j], [1j, -1.0]], dtype=complex)
    h = np.zeros((4, 4), dtype=complex)
    h[:2, :2] = block
    h[2:, 2:] = np.diag([5.0, 6.0])
    with pytest.raises(DegenerateEigenvector):
        decompose(h)


def test_empty_cavity_s_matrix():
    params, drive = empty_system(delta_c=0.0)
    fs = full_scattering(params, drive, n_phonon=8)
    s_r = fs.amplitudes[Channel.REFLECTION]
    s_t = fs.amplitudes[Channel.TRANSMISSION]
    assert abs(s_r[0]) < 1e-12
    assert s_t[0] == pytest.approx(-1.0, abs=1e-12)
    assert np.allclose(s_r[1:], 0.0, atol=1e-12)
    assert np.allclose(s_t[1:], 0.0, atol=1e-12)


def test_probability_completeness():
    params, drive = fiber_system()
    fs = full_scattering(params, drive, n_phonon=64)
    assert fs.completeness_defect() < 1e-6


def test_truncation_convergence():
    params, drive = fiber_system()
    values = {}
    for n in (128, 256):
        fs = full_scattering(params, drive, n_phonon=n)
        values[n] = ([fs.probabilities[c] for c in fs.probabilities]
                     + [fs.phonon_numbers[c] for c in fs.phonon_numbers])
    assert np.max(np.abs(np.array(values[128]) - np.array(values[256]))) < 1e-6


def test_frequency_shift_identity():
    """Shifting the drive only shifts every eigenvalue: S-matrix elements
    from the shifted decomposition match a full rebuild."""
    params, drive = fiber_system()
    dec = decompose(build_hamiltonian(params, drive, 32))
    d_omega = 0.37
    shifted_drive = DriveFrequency(delta_c=drive.delta_c + d_omega,
                                   delta_0=drive.delta_0 + d_omega)
    rebuilt = decompose(build_hamiltonian(params, shifted_drive, 32))
    cheap = dec.shifted(d_omega)
    for channel in (Channel.REFLECTION, Channel.TRANSMISSION, Channel.ATOMIC_EMISSION):
        a = s_matrix_elements(rebuilt, params, shifted_drive, channel)
        b = s_matrix_elements(cheap, params, shifted_drive, channel)
        assert np.max(np.abs(a - b)) < 1e-12


def test_eigen_order_is_pure_relabeling():
    params, drive = fiber_system()
    dec = decompose(build_hamiltonian(params, drive, 32))
    rng = np.random.default_rng(2)
    perm = rng.permutation(dec.basis.dim)
    shuffled = FullModelDecomposition(basis=dec.basis,
                                      eigenvalues=dec.eigenvalues[perm],
                                      vectors=dec.vectors[:, perm])
    for channel in (Channel.REFLECTION, Channel.ATOMIC_EMISSION):
        a = s_matrix_elements(dec, params, drive, channel)
        b = s_matrix_elements(shuffled, params, drive, channel)
        assert np.max(np.abs(a - b)) < 1e-12


def test_atomic_emission_grows_with_gamma():
    base, _ = fiber_system()
    p_at = []
    for gamma in (2.0, 6.0, 11.2, 20.0):
        params = base.replace(gamma=gamma)
        drive = solve_resonant_drive(params, params.x0)
        fs = full_scattering(params, drive, n_phonon=48)
        p_at.append(fs.probabilities[Channel.ATOMIC_EMISSION])
    assert all(b > a for a, b in zip(p_at, p_at[1:]))


def test_detuning_validity_window():
    base = SystemParams(**FIG9_BASE)
    row = detuning_sweep_point(0.4, base, 64)
    for key in ("p_r", "p_t", "p_at"):
        rel = abs(row[f"{key}_eff"] - row[f"{key}_full"]) / abs(row[f"{key}_full"])
        assert rel < 0.05
    row = detuning_sweep_point(0.8, base, 64)
    assert abs(row["n_r_eff"] - row["n_r_full"]) / abs(row["n_r_full"]) < 0.10


def test_detuning_sweep_deviation_vanishes_in_joint_limit():
    """Effective vs exact agreement at small coupling ratio.

    The comparison floor is set by the mode linearization inside the exact
    model (O(eta^2)), so the limit is taken jointly: small g0/|delta_0| and
    a tight trap."""
    def dev(row, key):
        return abs(row[f"{key}_eff"] - row[f"{key}_full"]) / abs(row[f"{key}_full"])

    tight = SystemParams(**{**FIG9_BASE, "omega_rec": 0.2 * 0.05**2})
    rows = validity_sweep_detuning([0.1], n_phonon=64, base=tight)
    assert dev(rows[0], "p_r") < 1e-3
    assert dev(rows[0], "p_t") < 1e-3
    assert dev(rows[0], "p_at") < 5e-3
    assert dev(rows[0], "n_r") < 5e-3

    loose = SystemParams(**FIG9_BASE)      # eta = 0.2
    coarse = validity_sweep_detuning([0.1], n_phonon=64, base=loose)
    assert dev(coarse[0], "p_r") > dev(rows[0], "p_r")


def test_sideband_validity_window():
    base = SystemParams(**FIG10_BASE)
    row = sideband_sweep_point(0.2, base, 64)
    assert abs(row["n_r_eff"] - row["n_r_full"]) / abs(row["n_r_full"]) < 0.10
    row = sideband_sweep_point(1.0, base, 64)
    assert abs(row["n_r_eff"] - row["n_r_full"]) / abs(row["n_r_full"]) > 0.25
    row = sideband_sweep_point(0.05, base, 64)
    assert abs(row["n_r_eff"] - row["n_r_full"]) / abs(row["n_r_full"]) < 0.02


def test_basis_indexing():
    basis = SingleExcitationBasis(8)
    assert basis.dim == 16
    assert basis.photon_index(3) == 3
    assert basis.atom_index(3) == 11
