"""Single-photon scattering in the unresolved-sideband regime.

For kappa >> omega_m the cavity responds to the instantaneous atomic
position and the scattering matrices are diagonal in x:

    S_r(x)  = 1 - i kappa_r / D(x)
    S_t(x)  = -i sqrt(kappa_t kappa_r) / D(x)
    S_at(x) = sqrt(g0^2/(delta_0^2+gamma^2/4)) * i sqrt(gamma kappa_r)/D(x)
              * u(x) * exp(i x)
    S_in(x) like S_t with kappa_t -> kappa_in,

with D(x) = Delta_c(x) + i kappa(x)/2.  Together the channels conserve
probability pointwise: sum_c |S_c(x)|^2 = 1.

Scattering one photon off a motional state psi_0 produces an entangled
output; detecting the photon in channel c projects the motion onto the
normalized conditional state S_c(x) psi_0(x) / sqrt(p_c) with
p_c = integral |S_c|^2 |psi_0|^2 dx.  The detector is assumed not to
resolve the outgoing photon frequency, so no frequency entanglement is
represented here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .motional import (MotionalWavefunction, PositionGrid, auto_grid,
                       fock_state, ground_state, phonon_expectation)
from .params import (DriveFrequency, SystemParams, _atomic_lorentzian,
                     drive_at, effective_linewidth, mode_profile,
                     optomechanical_coupling, position_detuning)


PROB_FLOOR = 1e-14


class ZeroProbability(ValueError):
    """A conditional quantity was requested for an empty channel."""


class Channel(enum.Enum):
    REFLECTION = "reflection"
    TRANSMISSION = "transmission"
    ATOMIC_EMISSION = "atomic_emission"
    INTRINSIC_LOSS = "intrinsic_loss"


@dataclass(frozen=True)
class ChannelAmplitudes:
    """Position-dependent S-matrix values on a grid, one array per channel."""

    grid: PositionGrid
    s_r: np.ndarray
    s_t: np.ndarray
    s_at: np.ndarray
    s_loss: np.ndarray

    def __getitem__(self, channel: Channel) -> np.ndarray:
        return {Channel.REFLECTION: self.s_r,
                Channel.TRANSMISSION: self.s_t,
                Channel.ATOMIC_EMISSION: self.s_at,
                Channel.INTRINSIC_LOSS: self.s_loss}[channel]

    def completeness_defect(self) -> float:
        """max over the grid of | sum_c |S_c|^2 - 1 |."""
        total = (np.abs(self.s_r) ** 2 + np.abs(self.s_t) ** 2
                 + np.abs(self.s_at) ** 2 + np.abs(self.s_loss) ** 2)
        return float(np.max(np.abs(total - 1.0)))


@dataclass(frozen=True)
class ScatteringOutcome:
    """Everything produced by scattering one photon off one motional state."""

    input: MotionalWavefunction
    amplitudes: ChannelAmplitudes
    probabilities: dict
    conditional_states: dict

    def probability(self, channel: Channel) -> float:
        return self.probabilities[channel]

    def conditional(self, channel: Channel) -> MotionalWavefunction:
        try:
            return self.conditional_states[channel]
        except KeyError:
            raise ZeroProbability(f"channel {channel.value} has zero probability")


def channel_amplitudes(params: SystemParams, drive: DriveFrequency,
                       grid: PositionGrid) -> ChannelAmplitudes:
    x = grid.x
    d = position_detuning(params, drive, x) + 0.5j * effective_linewidth(params, drive, x)
    s_r = 1.0 - 1j * params.kappa_r / d
    s_t = -1j * math.sqrt(params.kappa_t * params.kappa_r) / d
    lor = _atomic_lorentzian(params, drive)
    s_at = (math.sqrt(lor) * 1j * math.sqrt(params.gamma * params.kappa_r) / d
            * mode_profile(x) * np.exp(1j * x))
    s_loss = -1j * math.sqrt(params.kappa_in * params.kappa_r) / d
    return ChannelAmplitudes(grid=grid, s_r=s_r, s_t=s_t, s_at=s_at, s_loss=s_loss)


def scatter_photon(psi0: MotionalWavefunction, params: SystemParams,
                   drive: DriveFrequency) -> ScatteringOutcome:
    psi0.require_normalized()
    amps = channel_amplitudes(params, drive, psi0.grid)
    weights = psi0.density() * psi0.grid.dx
    probabilities = {}
    conditionals = {}
    for channel in Channel:
        s = amps[channel]
        p = float(np.sum(np.abs(s) ** 2 * weights))
        probabilities[channel] = p
        if p >= PROB_FLOOR:
            conditionals[channel] = psi0.apply(s / math.sqrt(p))
    return ScatteringOutcome(input=psi0, amplitudes=amps,
                             probabilities=probabilities,
                             conditional_states=conditionals)


def reflection_spectrum(psi0: MotionalWavefunction, params: SystemParams,
                        delta_c_values: Sequence[float]) -> np.ndarray:
    """p_r as a function of the drive detuning; returns rows (delta_c, p_r)."""
    psi0.require_normalized()
    weights = psi0.density() * psi0.grid.dx
    out = np.empty((len(delta_c_values), 2))
    for i, dc in enumerate(delta_c_values):
        drive = drive_at(params, dc)
        s_r = channel_amplitudes(params, drive, psi0.grid).s_r
        out[i] = dc, float(np.sum(np.abs(s_r) ** 2 * weights))
    return out


def conditional_transmission(psi0: MotionalWavefunction, params: SystemParams,
                             drive: DriveFrequency) -> float:
    """p(t|t): transmission probability given a photon was just transmitted.

    Equals (1/p_t) * integral |S_t|^4 |psi_0|^2; by the variance inequality
    it can never fall below p_t.
    """
    psi0.require_normalized()
    s_t = channel_amplitudes(params, drive, psi0.grid).s_t
    weights = psi0.density() * psi0.grid.dx
    st2 = np.abs(s_t) ** 2
    p_t = float(np.sum(st2 * weights))
    if p_t < PROB_FLOOR:
        raise ZeroProbability("transmission channel is empty")
    return float(np.sum(st2**2 * weights)) / p_t


def g2_statistics(psi0: MotionalWavefunction, params: SystemParams,
                  drive: DriveFrequency) -> tuple[float, float]:
    """Zero-delay correlations of the output fields for a weak coherent drive.

    g2_tt = (1/p_t^2) int |S_t|^4 |psi0|^2   (>= 1, bunching)
    g2_rt = (1/(p_t p_r)) int |S_t|^2 |S_r|^2 |psi0|^2
    """
    psi0.require_normalized()
    amps = channel_amplitudes(params, drive, psi0.grid)
    weights = psi0.density() * psi0.grid.dx
    st2 = np.abs(amps.s_t) ** 2
    sr2 = np.abs(amps.s_r) ** 2
    p_t = float(np.sum(st2 * weights))
    p_r = float(np.sum(sr2 * weights))
    if p_t < PROB_FLOOR or p_r < PROB_FLOOR:
        raise ZeroProbability("g2 needs both output channels populated")
    g2_tt = float(np.sum(st2**2 * weights)) / p_t**2
    g2_rt = float(np.sum(st2 * sr2 * weights)) / (p_t * p_r)
    return g2_tt, g2_rt


def heralded_phonon_state(psi0: MotionalWavefunction, params: SystemParams,
                          drive: DriveFrequency) -> tuple[MotionalWavefunction, float]:
    """Conditional motional state after detecting a reflected photon, and its
    single-phonon fidelity |<fock 1|psi_r>|^2.

    With the trap centred on a resonant position and unresolved zero-point
    motion, S_r is linear in x over the packet and the heralded state
    approaches the one-phonon Fock state.
    """
    outcome = scatter_photon(psi0, params, drive)
    if outcome.probabilities[Channel.REFLECTION] < PROB_FLOOR:
        raise ZeroProbability("reflection probability is numerically zero")
    psi_r = outcome.conditional(Channel.REFLECTION)
    one = fock_state(psi0.grid, psi0.trap_center, psi0.eta_ld, 1)
    fidelity = abs(one.inner(psi_r)) ** 2
    return psi_r, fidelity


@dataclass(frozen=True)
class AddedPhonons:
    n_r: float
    n_t: float
    n_total: float


def added_phonons(psi0: MotionalWavefunction, params: SystemParams,
                  drive: DriveFrequency) -> AddedPhonons:
    """Conditional phonon numbers after one scattering event, and the
    unconditional total n = sum_c p_c n_c over all populated channels."""
    outcome = scatter_photon(psi0, params, drive)
    nbars = {}
    total = 0.0
    for channel, p in outcome.probabilities.items():
        if channel in outcome.conditional_states:
            nbars[channel] = phonon_expectation(outcome.conditional_states[channel])
            total += p * nbars[channel]
    return AddedPhonons(n_r=nbars.get(Channel.REFLECTION, 0.0),
                        n_t=nbars.get(Channel.TRANSMISSION, 0.0),
                        n_total=total)


def phase_profile(params: SystemParams, drive: DriveFrequency,
                  grid: PositionGrid) -> np.ndarray:
    """Unwrapped phase arg[S_r(x)] of the reflected photon.

    For a one-sided lossless cavity |S_r| = 1 and the whole optomechanical
    interaction is this phase; its slope peaks at the resonant positions.
    """
    s_r = channel_amplitudes(params, drive, grid).s_r
    return np.unwrap(np.angle(s_r))


# ---------------------------------------------------------------------------
# idealized lossless family, parameterized by the zero-point resolution

def ideal_family(eta_ld: float = 0.05, kappa: float = 1.0,
                 x0: float = math.pi / 4.0, kappa_r: float | None = None,
                 omega_m: float | None = None) -> Callable[[float], tuple[SystemParams, DriveFrequency]]:
    """Family of gamma = 0 systems with a prescribed zero-point resolution.

    Given a target r_zp the dispersive coupling is g_om = r_zp*kappa/(2*eta)
    and the construction g0 = 2 g_om, omega_0 - omega_c = (4 - u(x0)^2) g_om
    makes the resonance condition Delta_c(x0) = 0 hold exactly at
    delta_c = -g_om u(x0)^2 (delta_0 = -4 g_om), with no iteration.
    Defaults to critical coupling kappa_r = kappa_t = kappa/2.
    """
    if kappa_r is None:
        kappa_r = kappa / 2.0
    kappa_t = kappa - kappa_r
    if kappa_t < 0:
        raise ValueError("kappa_r cannot exceed kappa")
    w_m = kappa / 100.0 if omega_m is None else omega_m
    u2 = mode_profile(x0) ** 2

    def build(r_zp: float) -> tuple[SystemParams, DriveFrequency]:
        if r_zp <= 0:
            raise ValueError("r_zp must be positive")
        g_om = r_zp * kappa / (2.0 * eta_ld)
        params = SystemParams(
            g0=2.0 * g_om, gamma=0.0, kappa_r=kappa_r, kappa_t=kappa_t,
            kappa_in=0.0, omega_m=w_m, omega_rec=eta_ld**2 * w_m,
            atom_cavity_detuning=(4.0 - u2) * g_om, x0=x0)
        drive = DriveFrequency(delta_c=-g_om * u2, delta_0=-4.0 * g_om)
        return params, drive

    return build


def family_ground_state(params: SystemParams, drive: DriveFrequency) -> MotionalWavefunction:
    """Trap ground state on an auto-sized grid for the given system."""
    g_om = optomechanical_coupling(params, drive)
    res = params.kappa / abs(g_om) if g_om != 0.0 else math.inf
    grid = auto_grid(params.x0, params.eta_ld, res)
    return ground_state(grid, params.x0, params.eta_ld)


def resolution_sweep(params_family: Callable[[float], tuple[SystemParams, DriveFrequency]],
                     r_zp_values: Iterable[float]) -> np.ndarray:
    """Reflection/transmission probabilities across a family of systems.

    Returns rows (r_zp, p_r, p_t); with critical coupling and no extra loss
    p_t -> 1 for unresolved zero-point motion and p_r -> 1 deep in the
    resolved regime.
    """
    rows = []
    for r_zp in r_zp_values:
        params, drive = params_family(r_zp)
        psi0 = family_ground_state(params, drive)
        outcome = scatter_photon(psi0, params, drive)
        rows.append((r_zp,
                     outcome.probabilities[Channel.REFLECTION],
                     outcome.probabilities[Channel.TRANSMISSION]))
    return np.array(rows)


def fit_loglog_slope(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of log(y) against log(x)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)
