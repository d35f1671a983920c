"""Motional wave functions on a position grid.

The position representation is primary because the single-photon scattering
matrices are diagonal in the atomic position: applying a scattering event is
a pointwise product over the grid.  The harmonic-oscillator (Fock) basis of
the external trap is a derived view, used for phonon observables and
heralding fidelities.

Units follow params.py: positions carry k_c, the trap ground state is a
Gaussian of standard deviation eta_ld, and the dimensionless momentum
conjugate to k_c*x enters phonon numbers through

    n = <(x - x0)^2> / (4 eta^2) + eta^2 <p^2> - 1/2 .

<p^2> is evaluated spectrally (FFT differentiation); the conditional states
produced by scattering have features much narrower than the wave packet and
finite differences would dominate the heating observables otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


EDGE_LEAK = 1e-8          # max |psi| allowed at the grid edges
NORM_TOL = 1e-8           # tolerance on |norm - 1| for normalized input


class GridTooNarrow(ValueError):
    """The wave function does not decay below EDGE_LEAK at the grid edges."""


class NotNormalized(ValueError):
    """Operation requires a unit-norm wave function."""


@dataclass(frozen=True)
class PositionGrid:
    """Uniform periodic grid on [x_min, x_max); spacing (x_max-x_min)/n_points."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be smaller than x_max")
        if self.n_points < 64:
            raise ValueError("need at least 64 grid points")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, d=self.dx)


def auto_grid(x0: float, eta_ld: float, resolution: float = math.inf,
              points_per_feature: int = 20, halfwidths: float = 10.0) -> PositionGrid:
    """Grid sized for a wave packet of width eta_ld and scattering features
    of width `resolution` (k_c*R).

    The half-span is max(10*eta, 10*R) but never more than one mode period
    pi beyond what the packet needs: all position-dependent couplings are
    pi-periodic, so a larger window only adds empty space.  The spacing
    satisfies dx <= min(eta, R)/points_per_feature and n_points is the
    smallest power of two that achieves it.
    """
    if eta_ld <= 0:
        raise ValueError("eta_ld must be positive")
    feature = min(eta_ld, resolution)
    half = max(halfwidths * eta_ld, min(halfwidths * resolution, math.pi))
    dx_max = feature / points_per_feature
    n = 64
    while 2.0 * half / n > dx_max:
        n *= 2
        if n > 2**22:
            raise ValueError("auto grid would exceed 2^22 points")
    return PositionGrid(x0 - half, x0 + half, n)


@dataclass(frozen=True)
class MotionalWavefunction:
    """Complex amplitude on a grid, with the trap it refers to."""

    grid: PositionGrid
    amplitudes: np.ndarray
    trap_center: float
    eta_ld: float

    def __post_init__(self):
        if self.amplitudes.shape != (self.grid.n_points,):
            raise ValueError("amplitude array does not match the grid")

    @property
    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.amplitudes) ** 2)) * self.grid.dx)

    def normalize(self) -> "MotionalWavefunction":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero function")
        psi = MotionalWavefunction(self.grid, self.amplitudes / n,
                                   self.trap_center, self.eta_ld)
        return psi

    def require_normalized(self):
        if abs(self.norm - 1.0) > NORM_TOL:
            raise NotNormalized(f"norm is {self.norm}, expected 1")

    def check_edges(self):
        a = np.abs(self.amplitudes)
        if max(a[0], a[-1]) > EDGE_LEAK * max(1.0, a.max()):
            raise GridTooNarrow("wave function has not decayed at the grid edges")

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def inner(self, other: "MotionalWavefunction") -> complex:
        if other.grid != self.grid:
            raise ValueError("wave functions live on different grids")
        return complex(np.sum(np.conj(self.amplitudes) * other.amplitudes) * self.grid.dx)

    def position_moment(self, order: int = 1, about: float = 0.0) -> float:
        w = self.density() * self.grid.dx
        return float(np.sum((self.grid.x - about) ** order * w))

    def momentum_squared(self) -> float:
        """<p^2> of the normalized state, p conjugate to k_c*x, spectral."""
        ft = np.fft.fft(self.amplitudes)
        w2 = np.sum(np.abs(ft) ** 2)
        return float(np.sum(self.grid.wavenumbers**2 * np.abs(ft) ** 2) / w2)

    def apply(self, values: np.ndarray) -> "MotionalWavefunction":
        """Pointwise product with a position-diagonal operator."""
        return MotionalWavefunction(self.grid, self.amplitudes * values,
                                    self.trap_center, self.eta_ld)

    def to_csv(self, path):
        """Export as CSV columns (x, Re psi, Im psi)."""
        with open(path, "w") as fh:
            fh.write("x,re_psi,im_psi\n")
            for x, a in zip(self.grid.x, self.amplitudes):
                fh.write(f"{x:.12g},{a.real:.12g},{a.imag:.12g}\n")


def _hermite_rows(z: np.ndarray, n_max: int):
    """Yield orthonormal Hermite functions h_0..h_n_max evaluated on z.

    Upward recurrence on the normalized functions themselves; the
    normalization is carried inside the recurrence so nothing overflows
    even for n of a few hundred.
    """
    h_prev = np.pi**-0.25 * np.exp(-0.5 * z**2)
    yield h_prev
    if n_max == 0:
        return
    h = math.sqrt(2.0) * z * h_prev
    yield h
    for k in range(1, n_max):
        h_prev, h = h, z * math.sqrt(2.0 / (k + 1)) * h - math.sqrt(k / (k + 1)) * h_prev
        yield h


def _fock_values(grid: PositionGrid, x0: float, eta_ld: float, n: int) -> np.ndarray:
    z = (grid.x - x0) / (math.sqrt(2.0) * eta_ld)
    for i, row in enumerate(_hermite_rows(z, n)):
        if i == n:
            return row / math.sqrt(math.sqrt(2.0) * eta_ld)
    raise AssertionError


def ground_state(grid: PositionGrid, x0: float, eta_ld: float) -> MotionalWavefunction:
    """Normalized trap ground state: Gaussian of standard deviation eta_ld."""
    return fock_state(grid, x0, eta_ld, 0)


def fock_state(grid: PositionGrid, x0: float, eta_ld: float, n: int) -> MotionalWavefunction:
    """n-th harmonic-oscillator eigenfunction of the trap, normalized."""
    if n < 0:
        raise ValueError("n must be >= 0")
    values = _fock_values(grid, x0, eta_ld, n).astype(complex)
    psi = MotionalWavefunction(grid, values, x0, eta_ld).normalize()
    psi.check_edges()
    return psi


def phonon_expectation(psi: MotionalWavefunction) -> float:
    """<b'b> of a normalized state: quadratic moments in x and p."""
    psi.require_normalized()
    x2 = psi.position_moment(2, about=psi.trap_center)
    p2 = psi.momentum_squared()
    eta2 = psi.eta_ld**2
    return x2 / (4.0 * eta2) + eta2 * p2 - 0.5


def fock_overlap(psi: MotionalWavefunction, n: int) -> complex:
    """Quadrature inner product <fock n | psi>."""
    psi.require_normalized()
    fn = _fock_values(psi.grid, psi.trap_center, psi.eta_ld, n)
    return complex(np.sum(fn * psi.amplitudes) * psi.grid.dx)


def fock_spectrum(psi: MotionalWavefunction, n_max: int) -> np.ndarray:
    """Overlaps <fock n | psi> for n = 0..n_max, in one recurrence sweep."""
    psi.require_normalized()
    z = (psi.grid.x - psi.trap_center) / (math.sqrt(2.0) * psi.eta_ld)
    scale = psi.grid.dx / math.sqrt(math.sqrt(2.0) * psi.eta_ld)
    out = np.empty(n_max + 1, dtype=complex)
    for n, row in enumerate(_hermite_rows(z, n_max)):
        out[n] = np.sum(row * psi.amplitudes) * scale
    return out
