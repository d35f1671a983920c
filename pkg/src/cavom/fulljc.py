"""Exact single-photon scattering from the full atom-cavity model with motion.

The single-excitation subspace is spanned by {|g,1>|n>, |e,0>|n>} for
phonon numbers n = 0..N-1.  In a frame rotating with the drive the
Hamiltonian restricted to this subspace is

    H = omega_m b'b - (delta_c + i kappa/2) a'a - (delta_0 + i gamma/2) s_ee
        + g(x) (a' s_ge + h.c.),
    g(x) = g0 [cos(x0) - sin(x0) eta (b + b')],

i.e. the mode profile linearized around the trap centre (Lamb-Dicke
regime).  Losses make H complex symmetric rather than Hermitian, so the
spectral decomposition uses the unconjugated inner product: eigenvectors
are normalized to <beta*|beta> = v.T v = 1 and completeness reads
sum_beta |beta><beta*| = 1.

S-matrix elements for an incident photon follow from input-output theory:

    S_r,n  = delta_n0 + i kappa_r  sum_b <1_c,n|b> (1/lambda_b) <b|1_c,0>
    S_t,n  =          i sqrt(kappa_t kappa_r) sum_b ...
    S_at,n =          i sqrt(gamma kappa_r)   sum_b (recoil) ...

where the atomic-emission row projects onto the |e,0> block and applies the
photon recoil exp(i x) to the motional part.  Channel probabilities are
p_c = sum_n |S_c,n|^2 and conditional phonon numbers sum_n n |S_c,n|^2 / p_c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .params import DriveFrequency, SystemParams, solve_resonant_drive
from .scattering import Channel


class DegenerateEigenvector(RuntimeError):
    """An eigenvector with <beta*|beta> ~ 0 (exceptional point) was found."""


@dataclass(frozen=True)
class SingleExcitationBasis:
    """Index bookkeeping: photon block first, atom block second."""

    n_phonon: int

    def __post_init__(self):
        if self.n_phonon < 2:
            raise ValueError("need at least 2 phonon levels")

    @property
    def dim(self) -> int:
        return 2 * self.n_phonon

    def photon_index(self, n: int) -> int:
        return n

    def atom_index(self, n: int) -> int:
        return self.n_phonon + n


@dataclass(frozen=True)
class FullModelDecomposition:
    """Eigenvalues and right eigenvectors of the complex-symmetric H,
    normalized to v.T v = 1 and sorted by real part."""

    basis: SingleExcitationBasis
    eigenvalues: np.ndarray      # (2N,)
    vectors: np.ndarray          # (2N, 2N), columns

    def shifted(self, delta_omega: float) -> "FullModelDecomposition":
        """Decomposition at drive frequency shifted by delta_omega.

        In the single-excitation subspace s_ee + a'a = 1, so changing the
        drive frequency only shifts H by a multiple of the identity:
        eigenvectors are reused and lambda -> lambda - delta_omega.
        """
        return replace(self, eigenvalues=self.eigenvalues - delta_omega)

    def completeness_defect(self) -> float:
        """max-entry norm of sum_b |b><b*| - identity."""
        resolution = self.vectors @ self.vectors.T
        return float(np.max(np.abs(resolution - np.eye(self.basis.dim))))

    def residuals(self, hamiltonian: np.ndarray) -> np.ndarray:
        r = hamiltonian @ self.vectors - self.vectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)


def phonon_ladder(n_phonon: int) -> np.ndarray:
    """Matrix of b + b' in the Fock basis (real symmetric tridiagonal)."""
    off = np.sqrt(np.arange(1, n_phonon))
    return np.diag(off, 1) + np.diag(off, -1)


def build_hamiltonian(params: SystemParams, drive: DriveFrequency,
                      n_phonon: int = 64) -> np.ndarray:
    """Complex-symmetric single-excitation Hamiltonian, shape (2N, 2N)."""
    basis = SingleExcitationBasis(n_phonon)
    n = np.arange(n_phonon)
    coupling = params.g0 * (math.cos(params.x0) * np.eye(n_phonon)
                            - math.sin(params.x0) * params.eta_ld * phonon_ladder(n_phonon))
    h = np.zeros((basis.dim, basis.dim), dtype=complex)
    ph = slice(0, n_phonon)
    at = slice(n_phonon, basis.dim)
    h[ph, ph] = np.diag(params.omega_m * n - drive.delta_c - 0.5j * params.kappa)
    h[at, at] = np.diag(params.omega_m * n - drive.delta_0 - 0.5j * params.gamma)
    h[ph, at] = coupling
    h[at, ph] = coupling
    return h


def decompose(hamiltonian: np.ndarray, degeneracy_tol: float = 1e-10) -> FullModelDecomposition:
    """Eigen-decompose a complex-symmetric single-excitation Hamiltonian.

    Uses a dense general eigensolver; the complex symmetry is exploited only
    through the v.T v = 1 normalization.  Raises DegenerateEigenvector when
    the unconjugated norm of an eigenvector nearly vanishes, which signals
    an exceptional point rather than something to normalize through.
    """
    dim = hamiltonian.shape[0]
    if hamiltonian.shape != (dim, dim) or dim % 2:
        raise ValueError("expected a square matrix of even dimension")
    values, vectors = np.linalg.eig(hamiltonian)
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    bilinear = np.einsum("ij,ij->j", vectors, vectors)
    if np.any(np.abs(bilinear) < degeneracy_tol):
        worst = int(np.argmin(np.abs(bilinear)))
        raise DegenerateEigenvector(
            f"eigenvector {worst} has |v.T v| = {abs(bilinear[worst]):.2e}")
    vectors = vectors / np.sqrt(bilinear)
    return FullModelDecomposition(basis=SingleExcitationBasis(dim // 2),
                                  eigenvalues=values, vectors=vectors)


def _recoil_operator(params: SystemParams, n_phonon: int) -> np.ndarray:
    """exp(i x) on the motional Fock basis, x = x0 + eta (b + b')."""
    eigs, u = np.linalg.eigh(params.eta_ld * phonon_ladder(n_phonon))
    phase = np.exp(1j * eigs)
    return np.exp(1j * params.x0) * ((u * phase) @ u.T)


def s_matrix_elements(decomposition: FullModelDecomposition, params: SystemParams,
                      drive: DriveFrequency, channel: Channel) -> np.ndarray:
    """Exact S-matrix elements S_{c,n} for n = 0..N-1 in the given channel.

    All bras are unconjugated (<beta*|) per the complex-symmetric
    convention; the reflection channel carries the non-interacting photon
    delta_n0 term.
    """
    basis = decomposition.basis
    n_ph = basis.n_phonon
    vectors = decomposition.vectors
    weights = vectors[basis.photon_index(0), :] / decomposition.eigenvalues
    if channel in (Channel.REFLECTION, Channel.TRANSMISSION, Channel.INTRINSIC_LOSS):
        response = vectors[:n_ph, :] @ weights
        if channel is Channel.REFLECTION:
            s = 1j * params.kappa_r * response
            s[0] += 1.0
            return s
        if channel is Channel.TRANSMISSION:
            return 1j * math.sqrt(params.kappa_t * params.kappa_r) * response
        return 1j * math.sqrt(params.kappa_in * params.kappa_r) * response
    if channel is Channel.ATOMIC_EMISSION:
        atom_response = vectors[n_ph:, :] @ weights
        recoiled = _recoil_operator(params, n_ph) @ atom_response
        return 1j * math.sqrt(params.gamma * params.kappa_r) * recoiled
    raise ValueError(f"unknown channel {channel}")


@dataclass(frozen=True)
class FullScattering:
    """Channel-resolved exact scattering of one resonant photon."""

    amplitudes: dict
    probabilities: dict
    phonon_numbers: dict

    def completeness_defect(self) -> float:
        return abs(sum(self.probabilities.values()) - 1.0)


def full_scattering(params: SystemParams, drive: DriveFrequency,
                    n_phonon: int = 64) -> FullScattering:
    dec = decompose(build_hamiltonian(params, drive, n_phonon))
    channels = [Channel.REFLECTION, Channel.TRANSMISSION, Channel.ATOMIC_EMISSION]
    if params.kappa_in > 0:
        channels.append(Channel.INTRINSIC_LOSS)
    n = np.arange(n_phonon)
    amplitudes, probabilities, nbars = {}, {}, {}
    for channel in channels:
        s = s_matrix_elements(dec, params, drive, channel)
        p = float(np.sum(np.abs(s) ** 2))
        amplitudes[channel] = s
        probabilities[channel] = p
        nbars[channel] = float(np.sum(n * np.abs(s) ** 2) / p) if p > 0 else 0.0
    return FullScattering(amplitudes=amplitudes, probabilities=probabilities,
                          phonon_numbers=nbars)


# ---------------------------------------------------------------------------
# validity sweeps of the effective theory against the exact model


def _effective_observables(params: SystemParams, drive: DriveFrequency):
    from .scattering import added_phonons, family_ground_state, scatter_photon

    psi0 = family_ground_state(params, drive)
    outcome = scatter_photon(psi0, params, drive)
    heating = added_phonons(psi0, params, drive)
    return outcome, heating


def detuning_sweep_point(ratio: float, base: SystemParams,
                         n_phonon: int = 64) -> dict:
    """One point of the dispersive-validity sweep at g0/|delta_0| = ratio.

    The drive is put on resonance with the coupled system at the trap
    centre by choosing delta_c = -g_om u(x0)^2 for the target delta_0 and
    adjusting the atom-cavity detuning accordingly; no iteration is needed
    because delta_0 is the sweep variable itself.
    """
    delta_0 = -base.g0 / ratio
    lor = base.g0**2 / (delta_0**2 + base.gamma**2 / 4.0)
    delta_c = lor * delta_0 * math.cos(base.x0) ** 2
    params = base.replace(atom_cavity_detuning=delta_c - delta_0)
    drive = DriveFrequency(delta_c=delta_c, delta_0=delta_0)

    outcome, heating = _effective_observables(params, drive)
    exact = full_scattering(params, drive, n_phonon)
    return {
        "ratio": ratio,
        "p_r_eff": outcome.probabilities[Channel.REFLECTION],
        "p_t_eff": outcome.probabilities[Channel.TRANSMISSION],
        "p_at_eff": outcome.probabilities[Channel.ATOMIC_EMISSION],
        "n_r_eff": heating.n_r,
        "p_r_full": exact.probabilities[Channel.REFLECTION],
        "p_t_full": exact.probabilities[Channel.TRANSMISSION],
        "p_at_full": exact.probabilities[Channel.ATOMIC_EMISSION],
        "n_r_full": exact.phonon_numbers[Channel.REFLECTION],
    }


def sideband_sweep_point(ratio: float, base: SystemParams,
                         n_phonon: int = 64) -> dict:
    """One point of the sideband-validity sweep at omega_m/kappa = ratio.

    The trap frequency (and with it the Lamb-Dicke parameter) varies while
    the cavity is driven on resonance with the atom at the trap centre.
    """
    params = base.replace(omega_m=ratio * base.kappa)
    drive = solve_resonant_drive(params, params.x0)
    outcome, heating = _effective_observables(params, drive)
    exact = full_scattering(params, drive, n_phonon)
    return {
        "ratio": ratio,
        "n_r_eff": heating.n_r,
        "n_r_full": exact.phonon_numbers[Channel.REFLECTION],
    }


FIG9_BASE = dict(g0=21.0, gamma=11.2, kappa_r=2.8, kappa_t=0.8, kappa_in=0.0,
                 omega_m=0.2, omega_rec=0.2 * 0.2**2, atom_cavity_detuning=0.0,
                 x0=math.pi / 4.0)

FIG10_BASE = dict(g0=10000.0, gamma=6.0, kappa_r=16.0, kappa_t=4.0, kappa_in=0.0,
                  omega_m=1.0, omega_rec=0.0038, atom_cavity_detuning=1_000_000.0,
                  x0=math.pi / 4.0)


def validity_sweep_detuning(ratios, n_phonon: int = 64,
                            base: SystemParams | None = None) -> list[dict]:
    base = base or SystemParams(**FIG9_BASE)
    return [detuning_sweep_point(r, base, n_phonon) for r in ratios]


def validity_sweep_sideband(ratios, n_phonon: int = 64,
                            base: SystemParams | None = None) -> list[dict]:
    base = base or SystemParams(**FIG10_BASE)
    return [sideband_sweep_point(r, base, n_phonon) for r in ratios]
