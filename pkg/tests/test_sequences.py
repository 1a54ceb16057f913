import math

import numpy as np
import pytest

from berrygate.bloch import RabiParams
from berrygate.engine import rk4_transition_matrices
from berrygate.gates import gate_fidelity, local_phase_equivalence
from berrygate.phase import circle_distance
from berrygate.schedules import build_cone_loop
from berrygate.schrodinger import TwoSpinParams, integrate_schrodinger
from berrygate.sequences import (
    AdiabaticityError,
    _aligned_start,
    _h1q_stack,
    _run_plan,
    _schedule_plan,
    default_times_1q,
    default_times_2q,
    delta_gamma,
    fault_tolerance_surface,
    hamiltonian_of_schedule_1q,
    measure_cone_phase,
    run_cone_loop,
    run_conditional_sequence,
    run_spin_echo_1q,
    write_peaks_csv,
    write_surface_csv,
)


def cone_params(theta, omega1=1.0, omega0=5.0):
    return RabiParams(omega0, omega1, omega0 - omega1 / math.tan(theta), 0.0)


# ---------------------------------------------------------------------------
# engine correctness


def test_engine_matches_stepwise_rk4():
    p = RabiParams(5.0, 1.0, 4.0, 0.0)
    sched = build_cone_loop(p, ramp_time=4.0, sweep_time=20.0)
    psi0 = np.array([1.0, 0.0], dtype=complex)
    dt = 0.004
    ref = integrate_schrodinger(
        psi0, hamiltonian_of_schedule_1q(p.omega0, sched), (0.0, sched.total_duration), dt
    )
    h = lambda times, w1, om, ph: _h1q_stack(p.omega0, times, w1, om, ph)
    res = _run_plan(_schedule_plan(sched), h, psi0, dt)
    assert np.max(np.abs(res.final[:, 0] - ref.final_psi)) < 1e-12


def test_transition_matrix_is_one_rk4_step():
    rng = np.random.default_rng(21)
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = 0.5 * (m + m.conj().T)
    dt = 0.003
    mat = rk4_transition_matrices(np.stack([h, h, h]), dt)[0]
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    k1 = -1j * h @ psi
    k2 = -1j * h @ (psi + 0.5 * dt * k1)
    k3 = -1j * h @ (psi + 0.5 * dt * k2)
    k4 = -1j * h @ (psi + dt * k3)
    stepped = psi + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    assert np.max(np.abs(mat @ psi - stepped)) < 1e-15


# ---------------------------------------------------------------------------
# single-qubit cone runs


def test_cone_adiabatic_following_angle():
    theta = math.pi / 3
    r = run_cone_loop(cone_params(theta))
    assert abs(r.theta - theta) < 1e-12
    assert abs(r.theta_measured - theta) < 1e-3
    assert r.closure_fidelity > 0.999
    assert abs(r.norm_drift) < 1e-8


def test_cone_symmetrized_phase():
    theta = math.pi / 4
    m = measure_cone_phase(cone_params(theta))
    assert circle_distance(m.geometric, m.expected) < 5e-3
    # raw runs carry the finite-rate correction with opposite signs
    raw_f = m.forward.decomposition.geometric - m.expected
    raw_r = m.reversed.decomposition.geometric + m.expected
    assert abs(raw_f) > 5e-3 and abs(raw_r) > 5e-3


def test_cone_holonomy_route_agrees_mod_2pi():
    r = run_cone_loop(cone_params(math.pi / 4))
    assert circle_distance(r.geometric_holonomy, r.decomposition.geometric) < 1e-3


def test_cone_zero_amplitude_idle():
    p = RabiParams(5.0, 0.0, 4.0, 0.0)
    r = run_cone_loop(p, ramp_time=1.0, sweep_time=5.0, dt=0.002)
    assert abs(r.decomposition.geometric) < 1e-6
    assert r.expected_geometric == 0.0


def test_forward_reversed_cancellation():
    # concatenated loop and inverse retraces the path: geometric phases cancel;
    # run well into the adiabatic regime where finite-rate corrections are
    # below the tolerance
    theta = math.pi / 12
    p = cone_params(theta, omega0=8.0)
    rt, st, dt = default_times_1q(p)
    f = 12.0
    fwd = build_cone_loop(p, f * rt, f * st, "forward")
    rev = build_cone_loop(p, f * rt, f * st, "reversed")
    h = lambda times, w1, om, ph: _h1q_stack(p.omega0, times, w1, om, ph)
    res = _run_plan(_schedule_plan(fwd) + _schedule_plan(rev), h, _aligned_start(p), dt)
    assert abs(res.total[0] - res.dynamic[0]) < 1e-3

    # schedule reversal invariant: gamma negated, delta preserved
    a = run_cone_loop(p, f * rt, f * st, dt, "forward")
    b = run_cone_loop(p, f * rt, f * st, dt, "reversed")
    assert abs(a.decomposition.geometric + b.decomposition.geometric) < 1e-3
    assert abs(a.decomposition.dynamic - b.decomposition.dynamic) < 1e-3


def test_engine_rejects_oversized_step():
    from berrygate.schrodinger import StepSizeError

    p = cone_params(math.pi / 3, omega0=50.0)
    with pytest.raises(StepSizeError):
        run_cone_loop(p, ramp_time=5.0, sweep_time=20.0, dt=0.5)


def test_default_times_respect_step_bound():
    p2 = two_spin_params(2.0, 1.2)
    rt, st, dt = default_times_2q(p2)
    max_omega = max(
        math.hypot(p2.omega_plus - p2.drive.omega, p2.drive.omega1),
        math.hypot(p2.omega_minus - p2.drive.omega, p2.drive.omega1),
    )
    assert dt * max_omega <= 0.01 + 1e-12
    with pytest.raises(ValueError):
        # drive resonant with the minus sector: no adiabatic connection
        default_times_2q(two_spin_params(1.0, 1.2))


def test_diabatic_run_flagged():
    p = cone_params(math.pi / 3)
    r = run_cone_loop(p, ramp_time=1.0, sweep_time=5.0, dt=0.002)
    assert not r.adiabatic_ok
    assert abs(r.decomposition.geometric - r.expected_geometric) > 0.05
    with pytest.raises(AdiabaticityError):
        run_cone_loop(p, ramp_time=1.0, sweep_time=5.0, dt=0.002, check=True)


# ---------------------------------------------------------------------------
# spin echo


def test_spin_echo_cancellation():
    theta = math.pi / 3
    p = cone_params(theta)
    rt, st, dt = default_times_1q(p)
    e = run_spin_echo_1q(p, 4 * rt, 4 * st, dt)
    assert circle_distance(e.phase_difference, e.expected_difference) < 5e-3
    assert abs(e.dynamic_residual) < 1e-3
    # both congruent targets agree mod 2pi
    assert circle_distance(e.expected_difference, e.expected_difference_alt) < 1e-12
    # each cyclic evolution's dynamic phase is large even though the branch
    # totals cancel
    assert all(abs(d) > 1.0 for branch in e.loop_dynamics for d in branch)
    assert abs(e.up.dynamic) < 1e-2
    assert min(e.closure_fidelities) > 0.999


def test_spin_echo_small_angle_limit():
    # far detuned, weak drive: tiny cone angle, difference goes to zero
    p = RabiParams(5.0, 0.05, 4.0, 0.0)
    e = run_spin_echo_1q(p)
    assert e.theta < 0.06
    assert abs(e.expected_difference) < 0.02
    assert circle_distance(e.phase_difference, e.expected_difference) < 1e-3


def test_spin_echo_adiabaticity_check():
    p = cone_params(math.pi / 3)
    with pytest.raises(AdiabaticityError):
        run_spin_echo_1q(p, ramp_time=0.5, sweep_time=2.0, dt=0.002, check=True)


# ---------------------------------------------------------------------------
# differential shift and conditional gate


def test_delta_gamma_closed_form_values():
    wa, J = 50.0, 2.0
    assert delta_gamma(wa, wa - 1.0, 1.0, 0.0) == 0.0
    assert abs(delta_gamma(wa, wa, math.pi * J, J) - math.pi * math.sqrt(2.0)) < 1e-12
    assert abs(delta_gamma(wa, wa, 1e-9, J) - 2.0 * math.pi) < 1e-6
    assert delta_gamma(wa, wa - 1.0, 1.0, J) == pytest.approx(
        -delta_gamma(wa, wa - 1.0, 1.0, -J)
    )
    with pytest.raises(ValueError):
        delta_gamma(wa, wa + math.pi * J, 0.0, J)


def two_spin_params(detuning, amplitude, J=1.0 / math.pi):
    pj = math.pi * J
    return TwoSpinParams(
        100.0, 80.0, J, RabiParams(100.0, amplitude * pj, 100.0 - detuning * pj, 0.0)
    )


def test_conditional_sequence_default_spot():
    p = two_spin_params(2.0, 1.2)
    r = run_conditional_sequence(p)
    assert r.fidelity >= 0.999
    assert r.off_diagonal_leakage < 1e-3
    assert r.dynamic_residual < 1e-3
    assert r.adiabatic_ok
    # diagonal phases follow the +,-,-,+ conditional pattern
    diag = np.angle(np.diag(r.gate))
    expect = np.array([2, -2, -2, 2]) * r.delta_gamma
    rel = diag - diag[0] + expect[0]
    assert max(circle_distance(a, b) for a, b in zip(rel, expect)) < 5e-3
    # locally equivalent to a controlled phase of 8 * delta_gamma
    _, _, phi_gate, _ = local_phase_equivalence(np.diag(np.diag(r.gate)))
    assert circle_distance(phi_gate, 8.0 * r.delta_gamma) < 5e-3


def test_conditional_sequence_no_coupling_is_identity():
    p = TwoSpinParams(100.0, 80.0, 0.0, RabiParams(100.0, 1.2, 98.0, 0.0))
    r = run_conditional_sequence(p)
    assert r.delta_gamma == 0.0
    assert gate_fidelity(r.gate, np.eye(4)) >= 0.999


def test_conditional_sequence_drive_on_b_variant():
    p = two_spin_params(2.0, 1.2)
    r = run_conditional_sequence(p, drive_on_b=True)
    assert r.drive_on_b
    # the off-resonant field on spin b perturbs but does not destroy the gate
    assert r.fidelity >= 0.999
    assert r.off_diagonal_leakage < 5e-3


def test_conditional_sequence_finite_pulses():
    p = two_spin_params(2.0, 1.2)
    r = run_conditional_sequence(p, pi_pulse_duration=0.05)
    # hard but finite pulses degrade the gate only mildly
    assert r.fidelity >= 0.99


def test_conditional_pattern_spot_grid():
    # 5x5 spot check of the simulated conditional phases against +-2*dg
    detunings = [1.5, 1.8, 2.1, 2.4, 2.7]
    amplitudes = [0.7, 0.95, 1.2, 1.45, 1.7]
    for d in detunings:
        for w in amplitudes:
            p = two_spin_params(d, w)
            r = run_conditional_sequence(p)
            diag = np.angle(np.diag(r.gate))
            expect = np.array([2, -2, -2, 2]) * r.delta_gamma
            rel = diag - diag[0] + expect[0]
            err = max(circle_distance(a, b) for a, b in zip(rel, expect))
            assert err < 5e-3, (d, w, err)
            assert r.off_diagonal_leakage < 1e-3, (d, w)


# ---------------------------------------------------------------------------
# fault-tolerance surface


def test_surface_shapes_and_peaks():
    det = np.linspace(0.2, 3.0, 15)
    amp = np.linspace(0.1, 5.0, 40)
    surf = fault_tolerance_surface(50.0, 2.0, det, amp)
    assert surf.delta_gamma.shape == (15, 40)
    assert len(surf.peaks) == 15
    for pk in surf.peaks:
        assert abs(pk.slope) < 1e-6 * pk.delta_gamma
        if pk.detuning_over_piJ <= 1.0:
            assert pk.boundary and pk.omega1_over_piJ == 0.0
        else:
            assert not pk.boundary
    heights = [pk.delta_gamma for pk in surf.peaks]
    assert all(a >= b - 1e-9 for a, b in zip(heights, heights[1:]))


def test_surface_vanishes_at_large_amplitude():
    surf = fault_tolerance_surface(
        50.0, 2.0, np.array([0.5, 2.0]), np.array([1.0, 50.0, 500.0])
    )
    assert np.all(np.abs(surf.delta_gamma[:, -1]) < 0.02)
    assert np.all(np.abs(surf.delta_gamma[:, -1]) < np.abs(surf.delta_gamma[:, 0]))


def test_surface_rejects_bad_grids():
    with pytest.raises(ValueError):
        fault_tolerance_surface(50.0, 2.0, np.array([]), np.array([1.0]))
    with pytest.raises(ValueError):
        fault_tolerance_surface(50.0, 2.0, np.array([1.0]), np.array([0.0, 1.0]))


def test_surface_csv_format(tmp_path):
    det = np.linspace(0.2, 3.0, 3)
    amp = np.linspace(0.1, 5.0, 4)
    surf = fault_tolerance_surface(50.0, 2.0, det, amp)
    path = tmp_path / "surface.csv"
    write_surface_csv(surf, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "detuning_over_piJ,omega1_over_piJ,delta_gamma_rad"
    assert len(lines) == 1 + 3 * 4
    # row-major: detuning outer, omega1 inner
    first = lines[1].split(",")
    second = lines[2].split(",")
    assert first[0] == second[0]
    assert float(first[1]) != float(second[1])
    # deterministic output
    path2 = tmp_path / "surface2.csv"
    write_surface_csv(surf, path2)
    assert path.read_bytes() == path2.read_bytes()
    peaks = tmp_path / "peaks.csv"
    write_peaks_csv(surf, peaks)
    assert peaks.read_text().startswith("detuning_over_piJ,omega1_peak_over_piJ,")
