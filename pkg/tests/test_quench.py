import math
import warnings

import numpy as np
import pytest

from nhchain.model import (
    ChainParams,
    Hamiltonian,
    ModelError,
    anti_pt_residual,
    apply_parity,
    build_hamiltonian,
)
from nhchain.spectral import dirac_overlap, numeric_spectrum
from nhchain.dynamics import IntegratorConfig, propagate
from nhchain.quench import (
    PulseSchedule,
    QuenchPlan,
    impulse_parity,
    pulse_amplitude,
    quenched_hamiltonian,
    run_switch_experiment,
)


# ---------------------------------------------------------------------------
# schedule and plan

def test_pulse_amplitude_window():
    sched = PulseSchedule(delta=0.02, start=1.0)
    mu = math.pi / 0.02
    assert sched.mu == mu
    assert pulse_amplitude(1.01, sched) == mu
    # open interval: zero at both endpoints and outside
    for t in (0.0, 1.0, 1.02, 2.0):
        assert pulse_amplitude(t, sched) == 0.0


@pytest.mark.parametrize("delta", [0.0, -0.1, math.inf, math.nan])
def test_schedule_rejects_bad_duration(delta):
    with pytest.raises(ModelError):
        PulseSchedule(delta=delta)


def test_pulse_area_is_pi():
    # mu * delta == pi independent of the duration
    for delta in (0.005, 0.02, 0.3):
        sched = PulseSchedule(delta=delta)
        assert sched.mu * sched.delta == pytest.approx(math.pi, rel=1e-15)


def test_hardness_ratio(params_small_ratio):
    sched = PulseSchedule(delta=0.02)
    # energy scale is max(2J, V M^2) = 2 for these parameters
    assert sched.hardness_ratio(params_small_ratio) == pytest.approx(
        math.pi / 0.02 / 2.0, rel=1e-12
    )


def test_plan_validation(params_small_ratio):
    sched = PulseSchedule(delta=0.02)
    with pytest.raises(ModelError):
        QuenchPlan(params=params_small_ratio, schedule=sched, t_relax=-1.0)
    with pytest.raises(ModelError):
        QuenchPlan(params=params_small_ratio, schedule=sched, dt_pulse=0.02 / 100.0)
    plan = QuenchPlan(params=params_small_ratio, schedule=sched)
    assert plan.resolved_dt_pulse() == pytest.approx(0.02 / 400.0)


# ---------------------------------------------------------------------------
# quenched Hamiltonian

def test_quenched_hamiltonian_identity_outside_window(h_small_ratio):
    sched = PulseSchedule(delta=0.02, start=5.0)
    assert quenched_hamiltonian(h_small_ratio, 0.0, sched) is h_small_ratio
    assert quenched_hamiltonian(h_small_ratio, 5.02, sched) is h_small_ratio


def test_quenched_hamiltonian_linear_shift(h_small_ratio):
    sched = PulseSchedule(delta=0.02)
    hq = quenched_hamiltonian(h_small_ratio, 0.01, sched)
    shift = hq.diagonal - h_small_ratio.diagonal
    mu = sched.mu
    assert shift[0] == pytest.approx(-100.0 * mu)
    assert shift[100] == 0.0
    assert shift[200] == pytest.approx(100.0 * mu)
    assert hq.off_diagonal == h_small_ratio.off_diagonal


def test_linear_field_breaks_antisymmetry(h_small_ratio):
    sched = PulseSchedule(delta=0.02)
    hq = quenched_hamiltonian(h_small_ratio, 0.01, sched)
    assert anti_pt_residual(hq) == pytest.approx(2.0 * sched.mu * 100.0, rel=1e-12)


# ---------------------------------------------------------------------------
# impulse limit

def test_impulse_is_parity(stable_modes):
    ground, _ = stable_modes
    out = impulse_parity(ground.right_vector)
    ref = apply_parity(ground.right_vector)
    assert np.array_equal(out.amplitudes, ref.amplitudes)
    back = impulse_parity(out)
    assert np.array_equal(back.amplitudes, ground.right_vector.amplitudes)


def test_parity_maps_ground_to_conjugate_excited(stable_modes):
    ground, excited = stable_modes
    flipped = impulse_parity(ground.right_vector)
    conj_excited = excited.right_vector.with_amplitudes(
        np.conj(excited.right_vector.amplitudes)
    )
    overlap = abs(dirac_overlap(conj_excited, flipped))
    assert overlap > 1.0 - 1e-6


def test_bare_pulse_propagator_approximates_parity():
    # the pulse term alone, integrated over the window, is the parity gate
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = ChainParams(J=1.0, V=2e-4, half_width=10)
    h = build_hamiltonian(p)
    sched = PulseSchedule(delta=0.02)
    bare = Hamiltonian(
        diagonal=(sched.mu * h.sites()).astype(complex),
        off_diagonal=0.0,
        half_width=10,
    )
    state = numeric_spectrum(h, 2).stable_pair()[0].right_vector
    out = propagate(bare, state, sched.delta, IntegratorConfig(dt=sched.delta / 8000.0))
    target = apply_parity(state)
    assert np.abs(out.amplitudes - target.amplitudes).max() < 1e-8
    assert abs(out.norm2() - 1.0) < 1e-10


# ---------------------------------------------------------------------------
# full switch experiment

@pytest.fixture(scope="module")
def short_plan(params_small_ratio):
    return QuenchPlan(
        params=params_small_ratio,
        schedule=PulseSchedule(delta=0.02),
        t_relax=200.0,
    )


def test_switch_ground_to_excited(short_plan):
    series = run_switch_experiment(short_plan, initial="g")
    assert series.fidelities["g"][0] == pytest.approx(1.0, abs=1e-9)
    assert series.fidelities["e"][-1] > 0.999
    assert series.times[-1] == pytest.approx(200.02)


def test_switch_is_symmetric(short_plan):
    forward = run_switch_experiment(short_plan, initial="g")
    backward = run_switch_experiment(short_plan, initial="e")
    assert backward.fidelities["g"][-1] == pytest.approx(
        forward.fidelities["e"][-1], abs=1e-9
    )


def test_finite_pulse_matches_impulse(short_plan):
    finite = run_switch_experiment(short_plan, initial="g")
    impulse = run_switch_experiment(short_plan, initial="g", use_impulse=True)
    assert abs(finite.fidelities["e"][-1] - impulse.fidelities["e"][-1]) < 1e-6


def test_outcome_independent_of_duration(params_small_ratio):
    # the pulse area is fixed at pi, so halving the duration changes nothing
    results = []
    for delta in (0.02, 0.01):
        plan = QuenchPlan(
            params=params_small_ratio,
            schedule=PulseSchedule(delta=delta),
            t_relax=200.0,
        )
        results.append(run_switch_experiment(plan, initial="g").fidelities["e"][-1])
    assert abs(results[0] - results[1]) < 1e-6


def test_soft_pulse_warns(params_small_ratio):
    plan = QuenchPlan(
        params=params_small_ratio,
        schedule=PulseSchedule(delta=1.0),
        t_relax=0.0,
    )
    with pytest.warns(UserWarning, match="hardness"):
        run_switch_experiment(plan, initial="g")


def test_soft_pulse_validated_raises(params_small_ratio):
    plan = QuenchPlan(
        params=params_small_ratio,
        schedule=PulseSchedule(delta=2.0),
        t_relax=0.0,
    )
    with pytest.raises(ModelError, match="hardness"):
        run_switch_experiment(plan, initial="g", validated=True)


def test_bad_initial_label(short_plan):
    with pytest.raises(ModelError):
        run_switch_experiment(short_plan, initial="x")
