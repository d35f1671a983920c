"""Motion-only dynamics of the trapped atom under a coherent cavity drive.

Tracing out the driven cavity leaves a master equation for the atomic motion
alone.  It can be written in two algebraically equal ways:

  conventional form
      drho = -i [H_m, rho] - 1/2 {sum_c J_c'J_c, rho} + sum_c J_c rho J_c'
      H_m  = omega_m b'b + kappa_r E0^2 Delta_c(x) / (Delta_c^2 + kappa(x)^2/4)

  scattering-jump form
      drho = -i (H_s rho - rho H_s') + E0^2 sum_c S_c rho S_c'
      H_s  = omega_m b'b - i E0^2 / 2

where the jump operators are the single-photon scattering matrices,
J_c = E0 S_c for transmission / atomic emission / intrinsic loss and
J_scat = E0 (S_r - 1) for the scattered part of reflection.  Both forms are
exposed and must generate identical drho; implementing them separately
catches operator-ordering mistakes.

Position-dependent operators act on the trap Fock basis.  They are built
as matrix functions of the truncated position operator
x_op = x0 + eta (b + b'): diagonalizing x_op once and mapping eigenvalues
through f preserves every pointwise identity between the channel functions
(probability conservation, the potential decomposition) at machine
precision, which a grid-projection of each function separately would not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .motional import PositionGrid
from .params import (DriveFrequency, SystemParams, _atomic_lorentzian,
                     effective_linewidth, mode_profile, position_detuning)


class TruncationExceeded(RuntimeError):
    """Population reached the top of the Fock basis during propagation."""


class StepSizeUnderflow(RuntimeError):
    """The adaptive integrator failed to take a step."""


TAIL_LIMIT = 1e-6        # allowed population of the highest Fock level


@dataclass(frozen=True)
class MotionalDensityMatrix:
    """Density matrix in the trap Fock basis, with trap metadata."""

    matrix: np.ndarray
    x0: float
    eta_ld: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def phonon_number(self) -> float:
        return float(np.real(np.sum(np.arange(self.dim) * np.diag(self.matrix))))

    def tail_population(self) -> float:
        return float(np.real(self.matrix[-1, -1]))

    def validate(self, trace_tol=1e-10, herm_tol=1e-12, psd_tol=1e-8):
        if abs(self.trace() - 1.0) > trace_tol:
            raise ValueError(f"trace deviates from one by {self.trace() - 1.0}")
        if self.hermiticity_defect() > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        eigs = np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))
        if eigs.min() < -psd_tol:
            raise ValueError(f"negative eigenvalue {eigs.min()}")


def fock_density(populated: dict[int, complex] | int, dim: int,
                 x0: float = 0.0, eta_ld: float = 0.1) -> MotionalDensityMatrix:
    """Pure Fock state |n><n| (int input) or pure superposition from a
    {n: amplitude} mapping."""
    vec = np.zeros(dim, dtype=complex)
    if isinstance(populated, int):
        vec[populated] = 1.0
    else:
        for n, a in populated.items():
            vec[n] = a
        vec /= np.linalg.norm(vec)
    return MotionalDensityMatrix(np.outer(vec, vec.conj()), x0, eta_ld)


@dataclass(frozen=True)
class ComplexPotential:
    """Complex quantum potential V(x) and the classical potential U(x)."""

    grid: PositionGrid
    re_v: np.ndarray
    im_v: np.ndarray
    u_classical: np.ndarray


def quantum_potential(params: SystemParams, drive: DriveFrequency,
                      grid: PositionGrid) -> ComplexPotential:
    """V(x) = kappa_r E0^2 Delta_c/(Delta_c^2 + kappa(x)^2/4) - (i/2) J'J.

    Re V vanishes at the resonant positions; Im V has sinks there (local
    maxima of the jump rate, i.e. enhanced heating).  The gamma = 0 case
    reduces to the bare-linewidth expression; with spontaneous emission the
    broadened kappa(x) enters.
    """
    e2 = params.drive_amplitude**2
    dc = position_detuning(params, drive, grid.x)
    kx = effective_linewidth(params, drive, grid.x)
    lorentz = 1.0 / (dc**2 + kx**2 / 4.0)
    re_v = params.kappa_r * e2 * dc * lorentz
    im_v = -0.5 * kx * params.kappa_r * e2 * lorentz
    return ComplexPotential(grid=grid, re_v=re_v, im_v=im_v,
                            u_classical=classical_potential(params, drive, grid))


def classical_potential(params: SystemParams, drive: DriveFrequency,
                        grid: PositionGrid) -> np.ndarray:
    """U(x) = -2 (kappa_r/kappa) E0^2 arctan(2 Delta_c(x)/kappa).

    Derived from the mean optical force; approaches a square well for
    strong dispersive coupling, with walls at the resonant positions.
    """
    e2 = params.drive_amplitude**2
    dc = position_detuning(params, drive, grid.x)
    return -2.0 * (params.kappa_r / params.kappa) * e2 * np.arctan(2.0 * dc / params.kappa)


# ---------------------------------------------------------------------------
# Lindblad generator in the trap Fock basis


def position_operator_diagonalization(x0: float, eta_ld: float, dim: int):
    """Eigen-decomposition of x_op = x0 + eta (b + b') truncated to dim.

    Returns (nodes, transform) with x_op = transform @ diag(nodes) @ transform.T;
    any position function f lifts to f(x_op) = transform @ diag(f(nodes)) @ transform.T.
    """
    off = eta_ld * np.sqrt(np.arange(1, dim))
    nodes, transform = np.linalg.eigh(np.diag(np.full(dim, x0))
                                      + np.diag(off, 1) + np.diag(off, -1))
    return nodes, transform


class LindbladGenerator:
    """Motion-only master-equation generator, conventional or jump form."""

    def __init__(self, params: SystemParams, drive: DriveFrequency, dim: int,
                 form: str = "jump"):
        if form not in ("jump", "conventional"):
            raise ValueError("form must be 'jump' or 'conventional'")
        self.params = params
        self.drive = drive
        self.dim = dim
        self.form = form
        self.e2 = params.drive_amplitude**2
        self.number_op = np.diag(np.arange(dim, dtype=float))

        nodes, u = position_operator_diagonalization(params.x0, params.eta_ld, dim)
        self._nodes = nodes
        self._u = u

        def lift(values: np.ndarray) -> np.ndarray:
            return (u * values) @ u.conj().T

        e0 = params.drive_amplitude
        d = (position_detuning(params, drive, nodes)
             + 0.5j * effective_linewidth(params, drive, nodes))
        lor = _atomic_lorentzian(params, drive)
        s_r = 1.0 - 1j * params.kappa_r / d
        s_t = -1j * math.sqrt(params.kappa_t * params.kappa_r) / d
        s_at = (math.sqrt(lor) * 1j * math.sqrt(params.gamma * params.kappa_r) / d
                * mode_profile(nodes) * np.exp(1j * nodes))
        s_loss = -1j * math.sqrt(params.kappa_in * params.kappa_r) / d

        if form == "jump":
            self.scattering_ops = [lift(s) for s in (s_r, s_t, s_at, s_loss)]
            self.hamiltonian = params.omega_m * self.number_op - 0.5j * self.e2 * np.eye(dim)
        else:
            dc = position_detuning(params, drive, nodes)
            kx = effective_linewidth(params, drive, nodes)
            potential = params.kappa_r * self.e2 * dc / (dc**2 + kx**2 / 4.0)
            self.hamiltonian = params.omega_m * self.number_op + lift(potential)
            self.jump_ops = [lift(e0 * (s_r - 1.0)), lift(e0 * s_t),
                             lift(e0 * s_at), lift(e0 * s_loss)]
            self.jump_rate = sum(j.conj().T @ j for j in self.jump_ops)

    def position_function(self, f) -> np.ndarray:
        """Lift a position function to an operator on the Fock basis."""
        return (self._u * f(self._nodes)) @ self._u.conj().T

    def apply_matrix(self, rho: np.ndarray) -> np.ndarray:
        if self.form == "jump":
            h = self.hamiltonian
            out = -1j * (h @ rho - rho @ h.conj().T)
            for s in self.scattering_ops:
                out += self.e2 * (s @ rho @ s.conj().T)
            return out
        h = self.hamiltonian
        out = -1j * (h @ rho - rho @ h)
        out -= 0.5 * (self.jump_rate @ rho + rho @ self.jump_rate)
        for j in self.jump_ops:
            out += j @ rho @ j.conj().T
        return out

    def apply(self, rho: MotionalDensityMatrix) -> MotionalDensityMatrix:
        return MotionalDensityMatrix(self.apply_matrix(rho.matrix),
                                     rho.x0, rho.eta_ld)

    def ground_state_heating_rate(self) -> float:
        """d<n>/dt at t=0 from the motional ground state.

        Analytically equal to E0^2 times the unconditional added phonons per
        photon of the single-photon scattering theory.
        """
        rho0 = np.zeros((self.dim, self.dim), dtype=complex)
        rho0[0, 0] = 1.0
        return float(np.real(np.trace(self.number_op @ self.apply_matrix(rho0))))


def lindblad_generator(params: SystemParams, drive: DriveFrequency,
                       dim: int = 64, form: str = "jump") -> LindbladGenerator:
    return LindbladGenerator(params, drive, dim, form=form)


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    rho: MotionalDensityMatrix
    n_expect: float

    @property
    def trace(self) -> float:
        return self.rho.trace()

    @property
    def purity(self) -> float:
        return self.rho.purity()

    @property
    def tail(self) -> float:
        return self.rho.tail_population()


def propagate(rho0: MotionalDensityMatrix, generator: LindbladGenerator,
              t_final: float, dt: float, rtol: float = 1e-9,
              atol: float = 1e-11) -> list[TrajectoryPoint]:
    """Integrate the master equation with adaptive RK error control.

    Trace is never renormalized: its drift is a diagnostic of integrator
    quality, not something to hide.  Raises TruncationExceeded if the top
    Fock level accumulates population beyond TAIL_LIMIT at any output step.
    """
    if rho0.dim != generator.dim:
        raise ValueError("state and generator dimensions differ")
    dim = generator.dim
    t_eval = np.linspace(0.0, t_final, max(2, int(round(t_final / dt)) + 1))

    def rhs(_t, y):
        rho = y.view(complex).reshape(dim, dim)
        return generator.apply_matrix(rho).ravel().view(float)

    sol = solve_ivp(rhs, (0.0, t_final),
                    rho0.matrix.astype(complex).ravel().view(float),
                    method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise StepSizeUnderflow(f"integrator failed: {sol.message}")

    points = []
    for k, t in enumerate(sol.t):
        flat = np.ascontiguousarray(sol.y[:, k]).view(complex)
        rho = MotionalDensityMatrix(flat.reshape(dim, dim), rho0.x0, rho0.eta_ld)
        if rho.tail_population() > TAIL_LIMIT:
            raise TruncationExceeded(
                f"top Fock level population {rho.tail_population():.2e} at t={t:g}")
        points.append(TrajectoryPoint(t=float(t), rho=rho,
                                      n_expect=rho.phonon_number()))
    return points


def export_trajectory_csv(points: list[TrajectoryPoint], path):
    """Trajectory CSV: (t, trace, purity, n_expect, population_tail)."""
    with open(path, "w") as fh:
        fh.write("t,trace,purity,n_expect,population_tail\n")
        for p in points:
            fh.write(f"{p.t:.12g},{p.trace:.12g},{p.purity:.12g},"
                     f"{p.n_expect:.12g},{p.tail:.12g}\n")
