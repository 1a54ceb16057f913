"""Pulse schedules: piecewise-smooth time courses of the drive controls
(omega1, omega, phi) plus idealized pi pulses.

Adiabatic segments use shapes with zero endpoint slope (raised-cosine
amplitude ramps, smoothed phase sweeps), which keeps the controls C1 across
segment boundaries and suppresses the leading diabatic error of a loop
traversed in finite time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bloch import RabiParams
from .linalg import pauli, tensor

RAMP_KINDS = ("ramp_up", "ramp_down")
SEGMENT_KINDS = RAMP_KINDS + ("phase_sweep", "idle", "pi_pulse_a", "pi_pulse_b")


@dataclass(frozen=True)
class Segment:
    """One schedule segment.  params are (start, end) pairs for each control;
    pi-pulse segments have zero duration and are applied as discrete gates."""

    kind: str
    duration: float
    omega1: tuple[float, float]
    omega: tuple[float, float]
    phi: tuple[float, float]

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if self.is_pulse:
            if self.duration != 0.0:
                raise ValueError("pi-pulse segments are instantaneous")
        elif self.duration <= 0.0:
            raise ValueError("segment duration must be positive")

    @property
    def is_pulse(self) -> bool:
        return self.kind.startswith("pi_pulse")

    def controls_at(self, tau):
        """Controls (omega1, omega, phi) at local time tau in [0, duration].

        Ramps interpolate omega1 with a raised cosine; phase sweeps move phi
        along the smoothed profile x - sin(2 pi x)/(2 pi), so both have zero
        slope at the segment boundaries.  omega interpolates linearly (it is
        constant in every built-in schedule).
        """
        tau = np.asarray(tau, dtype=float)
        x = np.clip(tau / self.duration, 0.0, 1.0)
        w1s, w1e = self.omega1
        ps, pe = self.phi
        if self.kind in RAMP_KINDS:
            w1 = w1s + (w1e - w1s) * 0.5 * (1.0 - np.cos(math.pi * x))
            ph = ps + (pe - ps) * x
        elif self.kind == "phase_sweep":
            w1 = w1s + (w1e - w1s) * x
            ph = ps + (pe - ps) * (x - np.sin(2.0 * math.pi * x) / (2.0 * math.pi))
        else:  # idle
            w1 = w1s + (w1e - w1s) * x
            ph = ps + (pe - ps) * x
        om = self.omega[0] + (self.omega[1] - self.omega[0]) * x
        return w1, om, ph


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        # Controls must be continuous across adiabatic boundaries; only pi
        # pulses may sit between mismatched control values.
        prev_end = None
        for seg in self.segments:
            if seg.is_pulse:
                prev_end = None
                continue
            start = (seg.omega1[0], seg.omega[0], seg.phi[0])
            if prev_end is not None:
                jumps = [abs(a - b) for a, b in zip(start, prev_end)]
                if max(jumps) > 1e-9:
                    raise ValueError(
                        f"control discontinuity {jumps} at segment boundary"
                    )
            prev_end = (seg.omega1[1], seg.omega[1], seg.phi[1])

    @property
    def total_duration(self) -> float:
        return sum(seg.duration for seg in self.segments)

    @property
    def drive_frequency(self) -> float:
        """The (constant) drive frequency of the schedule."""
        omegas = [w for s in self.segments if not s.is_pulse for w in s.omega]
        if not omegas:
            return 0.0
        if max(omegas) - min(omegas) > 1e-9:
            raise ValueError("schedule varies the drive frequency")
        return omegas[0]

    def max_omega1(self) -> float:
        return max(
            (max(s.omega1) for s in self.segments if not s.is_pulse), default=0.0
        )


def build_cone_loop(
    p: RabiParams,
    ramp_time: float,
    sweep_time: float,
    orientation: str = "forward",
) -> PulseSchedule:
    """Adiabatic cone loop: ramp the drive amplitude 0 -> omega1, sweep the
    drive phase through a full turn (+2*pi forward, -2*pi reversed), ramp back
    to zero.  With omega1 = 0 the schedule degenerates to a single idle
    segment of the same total length.
    """
    if ramp_time <= 0.0 or sweep_time <= 0.0:
        raise ValueError("ramp_time and sweep_time must be positive")
    if orientation not in ("forward", "reversed"):
        raise ValueError("orientation must be 'forward' or 'reversed'")
    if p.omega1 == 0.0:
        total = 2.0 * ramp_time + sweep_time
        return PulseSchedule(
            (
                Segment(
                    "idle", total, (0.0, 0.0), (p.omega, p.omega), (p.phi, p.phi)
                ),
            )
        )
    dphi = 2.0 * math.pi if orientation == "forward" else -2.0 * math.pi
    phi0 = p.phi
    return PulseSchedule(
        (
            Segment(
                "ramp_up", ramp_time, (0.0, p.omega1), (p.omega, p.omega), (phi0, phi0)
            ),
            Segment(
                "phase_sweep",
                sweep_time,
                (p.omega1, p.omega1),
                (p.omega, p.omega),
                (phi0, phi0 + dphi),
            ),
            Segment(
                "ramp_down",
                ramp_time,
                (p.omega1, 0.0),
                (p.omega, p.omega),
                (phi0 + dphi, phi0 + dphi),
            ),
        )
    )


def pi_pulse(target: str = "single") -> np.ndarray:
    """Idealized instantaneous pi pulse: the unitary swapping |up> and |down>.

    target 'single' returns the 2x2 swap; 'a' or 'b' return the 4x4 operator
    acting on the named spin only.
    """
    sx = pauli("x")
    if target == "single":
        return sx
    if target == "a":
        return tensor(sx, np.eye(2, dtype=complex))
    if target == "b":
        return tensor(np.eye(2, dtype=complex), sx)
    raise ValueError(f"unknown pi-pulse target {target!r}")
