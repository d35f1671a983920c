"""System parameters and closed-form derived quantities.

A single two-level atom is trapped inside a driven one-dimensional cavity
with mode profile u(x) = cos(x).  All angular frequencies are stored in
units of 2*pi*MHz and all positions are dimensionless (multiplied by the
cavity wavevector k_c).  In these units the Lamb-Dicke parameter is
eta_ld = sqrt(omega_rec / omega_m) and zero-point motion never requires an
explicit atomic mass.

In the dispersive regime the atom acts as a position-dependent dielectric:
the cavity-laser detuning becomes

    Delta_c(x) = delta_c + g_om * u(x)**2,
    g_om       = -g0**2 * delta_0 / (delta_0**2 + gamma**2 / 4),

and atomic spontaneous emission broadens the effective cavity linewidth,

    kappa(x) = kappa_r + kappa_t + kappa_in
               + gamma * g0**2 / (delta_0**2 + gamma**2 / 4) * u(x)**2.

Everything in this module is a pure function of immutable inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict, replace
from pathlib import Path

import numpy as np


class DegenerateDetuning(ValueError):
    """delta_0 = 0 with gamma = 0: the dispersive shift is singular."""


class NoConvergence(RuntimeError):
    """The self-consistent drive solver failed to converge."""


@dataclass(frozen=True)
class SystemParams:
    """Physical rates of the atom-cavity-trap system, in 2*pi*MHz.

    g0:      vacuum Rabi coupling at a cavity anti-node
    gamma:   atomic linewidth
    kappa_r: decay rate of the left (input/reflection) mirror
    kappa_t: decay rate of the right (transmission) mirror
    kappa_in: intrinsic cavity loss rate
    omega_m: trap frequency
    omega_rec: photon recoil frequency of the atom
    atom_cavity_detuning: omega_0 - omega_c
    x0:      trap equilibrium position (times k_c)
    drive_amplitude: E_0, square root of the incident photon flux
    """

    g0: float
    gamma: float
    kappa_r: float
    kappa_t: float
    kappa_in: float
    omega_m: float
    omega_rec: float
    atom_cavity_detuning: float
    x0: float
    drive_amplitude: float = 1.0

    def __post_init__(self):
        for name in ("g0", "gamma", "kappa_r", "kappa_t", "kappa_in",
                     "omega_m", "omega_rec"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if self.kappa <= 0:
            raise ValueError("total cavity linewidth kappa must be positive")
        if self.omega_m <= 0:
            raise ValueError("omega_m must be positive (eta_ld would diverge)")
        if not math.isfinite(self.atom_cavity_detuning):
            raise ValueError("atom_cavity_detuning must be finite")
        if not math.isfinite(self.x0):
            raise ValueError("x0 must be finite")

    @property
    def kappa(self) -> float:
        """Total bare cavity linewidth kappa_r + kappa_t + kappa_in."""
        return self.kappa_r + self.kappa_t + self.kappa_in

    @property
    def eta_ld(self) -> float:
        """Lamb-Dicke parameter sqrt(omega_rec / omega_m) = k_c * x_zp."""
        return math.sqrt(self.omega_rec / self.omega_m)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DriveFrequency:
    """Drive (laser) frequency relative to the bare cavity and atom.

    delta_c = omega_L - omega_c, delta_0 = omega_L - omega_0.  Both are
    stored so the pair is self-contained; use `drive_at` to build a
    consistent instance from SystemParams.
    """

    delta_c: float
    delta_0: float

    def __post_init__(self):
        if not (math.isfinite(self.delta_c) and math.isfinite(self.delta_0)):
            raise ValueError("drive detunings must be finite")


def drive_at(params: SystemParams, delta_c: float) -> DriveFrequency:
    """Drive with the given cavity detuning; delta_0 follows from params."""
    return DriveFrequency(delta_c=delta_c,
                          delta_0=delta_c - params.atom_cavity_detuning)


@dataclass(frozen=True)
class DerivedQuantities:
    """Closed-form quantities derived from (params, drive)."""

    g_om: float            # dispersive optomechanical coupling
    kappa_at_x0: float     # effective linewidth averaged over the ground state
    g_m: float             # single-photon single-phonon coupling g_om * eta_ld
    r_zp: float            # zero-point resolution
    resolution: float      # k_c * R = kappa / |g_om|, spatial resolution scale


def mode_profile(x):
    """Cavity mode amplitude u(x) = cos(x) with x = k_c * position."""
    return np.cos(x)


def _atomic_lorentzian(params: SystemParams, drive: DriveFrequency) -> float:
    """g0^2 / (delta_0^2 + gamma^2/4), the shared dispersive weight."""
    denom = drive.delta_0**2 + params.gamma**2 / 4.0
    if denom == 0.0:
        if params.g0 == 0.0:
            return 0.0
        raise DegenerateDetuning(
            "delta_0 = 0 with gamma = 0 makes the dispersive shift singular")
    return params.g0**2 / denom


def optomechanical_coupling(params: SystemParams, drive: DriveFrequency) -> float:
    """g_om = -g0^2 delta_0 / (delta_0^2 + gamma^2/4); sign follows -delta_0."""
    return -_atomic_lorentzian(params, drive) * drive.delta_0


def position_detuning(params: SystemParams, drive: DriveFrequency, x):
    """Position-dependent cavity-laser detuning Delta_c(x)."""
    g_om = optomechanical_coupling(params, drive)
    return drive.delta_c + g_om * mode_profile(x) ** 2


def effective_linewidth(params: SystemParams, drive: DriveFrequency, x):
    """kappa(x): bare linewidth plus atomic broadening, >= kappa everywhere."""
    lor = _atomic_lorentzian(params, drive)
    return params.kappa + params.gamma * lor * mode_profile(x) ** 2


def averaged_linewidth(params: SystemParams, drive: DriveFrequency,
                       x0: float | None = None, eta_ld: float | None = None,
                       nodes: int = 64) -> float:
    """kappa(x) averaged over the motional ground state at x0.

    Gauss-Hermite quadrature against |psi_0(x)|^2, a Gaussian of standard
    deviation eta_ld centred at x0 (>= 40 nodes keeps the cos^2 average
    exact to machine precision).
    """
    if nodes < 40:
        raise ValueError("use at least 40 Gauss-Hermite nodes")
    x0 = params.x0 if x0 is None else x0
    eta = params.eta_ld if eta_ld is None else eta_ld
    z, w = np.polynomial.hermite.hermgauss(nodes)
    x = x0 + math.sqrt(2.0) * eta * z
    return float(np.sum(w * effective_linewidth(params, drive, x)) / math.sqrt(math.pi))


def zero_point_resolution(params: SystemParams, drive: DriveFrequency) -> float:
    """Zero-point resolution r_zp = 2 |g_om| eta_ld / <kappa(x0)>.

    Equivalently eta_ld * 2 g0^2 |delta_0| / (kappa(x0) (delta_0^2 + gamma^2/4))
    with the ground-state averaged effective linewidth in the denominator.
    """
    lor = _atomic_lorentzian(params, drive)
    kappa_x0 = averaged_linewidth(params, drive)
    return params.eta_ld * 2.0 * lor * abs(drive.delta_0) / kappa_x0


def derived_quantities(params: SystemParams, drive: DriveFrequency) -> DerivedQuantities:
    g_om = optomechanical_coupling(params, drive)
    kappa_x0 = averaged_linewidth(params, drive)
    g_m = g_om * params.eta_ld
    r_zp = 2.0 * abs(g_m) / kappa_x0
    resolution = params.kappa / abs(g_om) if g_om != 0.0 else math.inf
    return DerivedQuantities(g_om=g_om, kappa_at_x0=kappa_x0, g_m=g_m,
                             r_zp=r_zp, resolution=resolution)


def solve_resonant_drive(params: SystemParams, x_r: float,
                         rtol: float = 1e-12, max_iter: int = 200) -> DriveFrequency:
    """Find delta_c such that Delta_c(x_r) = 0, self-consistently.

    delta_0 = delta_c - (omega_0 - omega_c) itself depends on delta_c,
    so the condition delta_c = -g_om(delta_c) u(x_r)^2 is solved by
    fixed-point iteration; if plain iteration oscillates or diverges a
    damping factor of 0.5 is applied.
    """
    u2 = mode_profile(x_r) ** 2

    def step(dc: float) -> float:
        drive = drive_at(params, dc)
        return -optomechanical_coupling(params, drive) * u2

    delta_c = 0.0
    damping = 1.0
    prev_update = 0.0
    prev_residual = math.inf
    for _ in range(max_iter):
        target = step(delta_c)
        update = target - delta_c
        residual = abs(update)
        if residual <= rtol * max(1.0, abs(target)):
            return drive_at(params, target)
        # oscillation (sign-alternating updates) or outright growth: the map
        # is not a plain contraction here, halve the step
        if update * prev_update < 0.0 or residual > prev_residual:
            damping = 0.5
        prev_update = update
        prev_residual = residual
        delta_c = delta_c + damping * update
    raise NoConvergence(
        f"resonant drive did not converge in {max_iter} iterations at x_r={x_r}")


def resonant_positions(params: SystemParams, drive: DriveFrequency,
                       n_scan: int = 2048, tol: float = 1e-12) -> np.ndarray:
    """All roots of Delta_c(x) = 0 in one period [0, pi].

    Roots are bracketed by sign changes on a scan grid and refined by
    bisection; tangent roots (where Delta_c touches zero at a node or
    anti-node) are caught through the condition u^2 = -delta_c/g_om hitting
    the boundary of [0, 1].  Returns an empty array when the drive is out
    of range of the position-dependent shift.
    """
    g_om = optomechanical_coupling(params, drive)
    if g_om == 0.0:
        return np.array([])
    c = -drive.delta_c / g_om          # required value of u(x)^2
    if c < -tol or c > 1.0 + tol:
        return np.array([])

    # tangent roots at the boundary of the u^2 range
    if abs(c) <= tol:
        return np.array([math.pi / 2.0])
    if abs(c - 1.0) <= tol:
        return np.array([0.0, math.pi])

    f = lambda x: position_detuning(params, drive, x)
    xs = np.linspace(0.0, math.pi, n_scan + 1)
    fs = f(xs)
    roots = []
    for i in range(n_scan):
        a, b = xs[i], xs[i + 1]
        fa, fb = fs[i], fs[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            # bisection to absolute tolerance on x
            while b - a > tol:
                m = 0.5 * (a + b)
                fm = f(m)
                if fm == 0.0:
                    a = b = m
                    break
                if fa * fm < 0.0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    if fs[-1] == 0.0:
        roots.append(xs[-1])
    return np.array(sorted(roots))


# ---------------------------------------------------------------------------
# presets

_PRESET_FIELDS = {
    # atom_cavity_detuning puts the resonance-solved laser at delta_0 = -2 g0
    # exactly; omega_m makes eta_ld = 0.25
    "photonic-crystal": dict(
        g0=10000.0, gamma=6.0, kappa_r=125.0, kappa_t=125.0, kappa_in=0.0,
        omega_m=0.0608, omega_rec=0.0038, atom_cavity_detuning=17500.0,
        x0=math.pi / 4.0, drive_amplitude=1.0),
    "fiber-I": dict(
        g0=41.0, gamma=11.2, kappa_r=4.0, kappa_t=4.0, kappa_in=0.0,
        omega_m=0.1, omega_rec=0.0068, atom_cavity_detuning=82.0,
        x0=math.pi / 4.0, drive_amplitude=1.0),
    "fiber-II": dict(
        g0=21.0, gamma=11.2, kappa_r=1.8, kappa_t=1.8, kappa_in=0.0,
        omega_m=0.1, omega_rec=0.0068, atom_cavity_detuning=42.0,
        x0=math.pi / 4.0, drive_amplitude=1.0),
}

PRESET_SOURCES = {
    "photonic-crystal": "Rb atom in a photonic-crystal nano-cavity",
    "fiber-I": "Ca+ ion in a tunable fiber cavity, short-cavity setting",
    "fiber-II": "Ca+ ion in a tunable fiber cavity, long-cavity setting",
}

PRESETS = tuple(_PRESET_FIELDS)


def get_preset(name: str) -> SystemParams:
    try:
        fields = _PRESET_FIELDS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return SystemParams(**fields)


def load_params(source) -> SystemParams:
    """Build SystemParams from a dict or a JSON file whose keys match
    the SystemParams field names."""
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            source = json.load(fh)
    if not isinstance(source, dict):
        raise TypeError("expected a mapping or a path to a JSON file")
    try:
        return SystemParams(**source)
    except TypeError as exc:
        raise ValueError(f"bad parameter file: {exc}") from None


def params_to_dict(params: SystemParams) -> dict:
    return asdict(params)
