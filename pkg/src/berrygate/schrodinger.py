"""Schrodinger-equation oracle for the 2-dim driven qubit and the 4-dim
coupled two-spin system.

Hamiltonians are stored as angular-frequency matrices (hbar = 1).  The
integrator is fixed-step RK4 on the complex ODE i d|psi>/dt = H(t)|psi>,
with no renormalization: norm drift is a measured diagnostic, and a step
size too large for the spectral spread is rejected outright.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import RabiParams
from .linalg import pauli

_SX = pauli("x")
_SY = pauli("y")
_SZ = pauli("z")

# Max allowed dt * (eigenvalue spread); RK4 stays phase-accurate below this.
STEP_SPREAD_LIMIT = 0.01


class StepSizeError(ValueError):
    """Raised when dt is too coarse for the Hamiltonian's spectral spread."""


@dataclass(frozen=True)
class TwoSpinParams:
    """Two coupled spins a, b with transition frequencies omega_a > omega_b
    (rad/s), scalar coupling J (Hz, enters as 2*pi*J S_az S_bz), and a shared
    rotating drive addressed to spin a."""

    omega_a: float
    omega_b: float
    J: float
    drive: RabiParams

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.omega_a, self.omega_b, self.J)):
            raise ValueError("non-finite two-spin parameter")
        if not self.omega_a > self.omega_b:
            raise ValueError("requires omega_a > omega_b")

    @property
    def omega_plus(self) -> float:
        """Spin-a transition frequency when spin b is up: omega_a + pi*J."""
        return self.omega_a + math.pi * self.J

    @property
    def omega_minus(self) -> float:
        """Spin-a transition frequency when spin b is down: omega_a - pi*J."""
        return self.omega_a - math.pi * self.J


def hamiltonian_1q(p: RabiParams, t: float) -> np.ndarray:
    """Rotating-wave lab-frame Hamiltonian of the driven qubit at time t:

        (1/2) [[omega0, omega1 e^{-i(wt+phi)}], [omega1 e^{+i(wt+phi)}, -omega0]]
    """
    off = 0.5 * p.omega1 * np.exp(-1j * (p.omega * t + p.phi))
    return np.array(
        [[0.5 * p.omega0, off], [np.conj(off), -0.5 * p.omega0]], dtype=complex
    )


def rotating_hamiltonian_1q(p: RabiParams) -> np.ndarray:
    """Time-independent Hamiltonian in the frame rotating at the drive
    frequency: (1/2) Omega' . sigma with Omega' = (w1 cos phi, w1 sin phi, w0 - w)."""
    off = 0.5 * p.omega1 * np.exp(-1j * p.phi)
    return np.array(
        [[0.5 * (p.omega0 - p.omega), off], [np.conj(off), -0.5 * (p.omega0 - p.omega)]],
        dtype=complex,
    )


def hamiltonian_2q(p: TwoSpinParams) -> np.ndarray:
    """Static two-spin Hamiltonian (no drive) in the basis
    {up-up, up-down, down-up, down-down}:

        diag(wa+wb+piJ, wa-wb-piJ, -wa+wb-piJ, -wa-wb+piJ) / 2
    """
    wa, wb, pj = p.omega_a, p.omega_b, math.pi * p.J
    return np.diag(
        np.array(
            [wa + wb + pj, wa - wb - pj, -wa + wb - pj, -wa - wb + pj], dtype=complex
        )
        / 2.0
    )


def drive_hamiltonian_2q(p: TwoSpinParams, t: float, drive_on_b: bool = False) -> np.ndarray:
    """Lab-frame drive term for the two-spin system at time t.

    The rotating field is addressed to spin a; with drive_on_b the same field
    also couples (off-resonantly) to spin b, which is physical but not part
    of the analytic treatment.
    """
    d = p.drive
    arg = d.omega * t + d.phi
    hx = 0.5 * d.omega1 * np.cos(arg)
    hy = 0.5 * d.omega1 * np.sin(arg)
    single = hx * _SX + hy * _SY
    h = np.kron(single, np.eye(2))
    if drive_on_b:
        h = h + np.kron(np.eye(2), single)
    return h


def hamiltonian_2q_full(p: TwoSpinParams, t: float, drive_on_b: bool = False) -> np.ndarray:
    """Static two-spin Hamiltonian plus the rotating drive at time t."""
    return hamiltonian_2q(p) + drive_hamiltonian_2q(p, t, drive_on_b)


@dataclass(frozen=True)
class SchrodingerTrajectory:
    """Sampled propagation record: times (n,), states (n, dim), and the
    continuously unwrapped phase arg<psi(0)|psi(t)> (n,)."""

    t: np.ndarray
    psi: np.ndarray
    phase: np.ndarray

    @property
    def final_psi(self) -> np.ndarray:
        return self.psi[-1]

    @property
    def accumulated_global_phase(self) -> float:
        return float(self.phase[-1])

    @property
    def final_norm(self) -> float:
        return float(np.linalg.norm(self.psi[-1]))


def _spectral_spread(h: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(h)
    return float(evals[-1] - evals[0])


def integrate_schrodinger(
    psi0: np.ndarray,
    h_of_t,
    t_span: tuple[float, float],
    dt: float,
    check_step: bool = True,
) -> SchrodingerTrajectory:
    """Fixed-step RK4 propagation of i d|psi>/dt = H(t)|psi>.

    Requires |psi0| = 1 and dt * (max eigenvalue spread of H) <= 0.01; a
    violating step size raises StepSizeError instead of silently degrading.
    The state is never renormalized.  The global phase arg<psi(0)|psi(t)> is
    unwrapped step to step; a jump >= pi between healthy samples (overlap
    magnitude above 1e-6) aborts, since it means the sampling cannot resolve
    the phase winding.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    t0, t1 = t_span
    if t1 <= t0:
        raise ValueError("t_span must be increasing")

    n_steps = max(1, int(round((t1 - t0) / dt)))
    h = (t1 - t0) / n_steps
    times = t0 + h * np.arange(n_steps + 1)

    if check_step:
        probe = times[:: max(1, n_steps // 32)]
        spread = max(_spectral_spread(h_of_t(t)) for t in probe)
        if h * spread > STEP_SPREAD_LIMIT * (1.0 + 1e-9):
            raise StepSizeError(
                f"dt * spectral spread = {h * spread:.3e} exceeds {STEP_SPREAD_LIMIT}; "
                "reduce dt"
            )

    dim = psi0.shape[0]
    out = np.empty((n_steps + 1, dim), dtype=complex)
    phase = np.empty(n_steps + 1)
    out[0] = psi0
    phase[0] = 0.0
    psi = psi0.copy()
    prev_angle = 0.0
    for k in range(n_steps):
        t = times[k]
        h1 = h_of_t(t)
        hm = h_of_t(t + 0.5 * h)
        h2 = h_of_t(t + h)
        k1 = -1j * (h1 @ psi)
        k2 = -1j * (hm @ (psi + 0.5 * h * k1))
        k3 = -1j * (hm @ (psi + 0.5 * h * k2))
        k4 = -1j * (h2 @ (psi + h * k3))
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = psi

        ov = np.vdot(psi0, psi)
        if abs(ov) > 1e-6:
            ang = math.atan2(ov.imag, ov.real)
            jump = ang - prev_angle
            jump -= 2.0 * math.pi * round(jump / (2.0 * math.pi))
            if abs(jump) >= math.pi * (1.0 - 1e-12):
                raise RuntimeError(
                    "global-phase unwrapping lost continuity (per-step jump >= pi); "
                    "reduce dt"
                )
            prev_angle = prev_angle + jump
        phase[k + 1] = prev_angle
    return SchrodingerTrajectory(t=times, psi=out, phase=phase)


def bloch_of_state(psi: np.ndarray) -> np.ndarray:
    """Bloch vector s_i = <psi|sigma_i|psi> of a normalized 2-dim state."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise ValueError("bloch_of_state expects a 2-dim state vector")
    a, b = psi
    sx = 2.0 * (np.conj(a) * b).real
    sy = 2.0 * (np.conj(a) * b).imag
    sz = (abs(a) ** 2 - abs(b) ** 2).real
    return np.array([sx, sy, sz])
