import numpy as np
import pytest
from hypothesis import given, strategies as st

from nlcl.dynamics import (OrderViolation, RhsMode, StepRejected, auto_dt, equivalence_check,
                           integrate, rhs, velocity_field)
from nlcl.measure import DegenerateGap, Measure1D, QuantileGrid, quantile_of
from nlcl.model import builtin_model, gap_bound, linear_velocity
from oracles import follow_the_leader, rk4_scalar_system

IND = builtin_model("burgers_indicator")
EXP = builtin_model("exponential")
RAMP = builtin_model("ramp")


def grid(*xs):
    return QuantileGrid(np.array(xs, dtype=float))


# rhs -------------------------------------------------------------------

@pytest.mark.parametrize("mode", list(RhsMode))
def test_indicator_velocities_are_index_fractions(mode):
    N = 8
    x = grid(*np.sort(np.random.default_rng(0).uniform(0, 3, N + 1)))
    assert np.allclose(rhs(x, IND, mode), np.arange(N + 1) / N, atol=1e-15)


def test_coincident_particles_fan_out():
    assert rhs(grid(0, 0, 0), IND, RhsMode.PARTICLE_V).tolist() == [0.0, 0.5, 1.0]


@pytest.mark.parametrize("m", [EXP, RAMP], ids=["exp", "ramp"])
def test_particle_v_matches_loop_oracle(m):
    x = np.array([-1.0, -1.0, -0.4, 0.0, 0.0, 0.0, 0.3, 2.5])
    ref = follow_the_leader(x, lambda d: float(m.kernel.V(d)), m.lam, lambda r: 1.0 - r)
    assert np.allclose(rhs(grid(*x), m, RhsMode.PARTICLE_V), ref, atol=1e-15)


def test_particle_forms_agree_on_small_state():
    s = grid(0, 0.5, 1)
    assert np.max(np.abs(rhs(s, EXP, "particle_u") - rhs(s, EXP, "particle_v"))) <= 1e-15


def test_particle_v_refuses_decreasing_state():
    with pytest.raises(OrderViolation):
        rhs(np.array([0.0, 1.0, 0.5]), EXP, RhsMode.PARTICLE_V)


def test_quantile_mode_uses_trapezoid_weights():
    x = np.array([0.0, 0.3, 1.0])
    M = 2
    w = np.array([0.5, 1.0, 0.5])
    U = EXP.kernel.U(x[:, None] - x[None, :])
    expected = 1.0 - (U @ w / M - np.arange(3) / M)
    assert np.allclose(rhs(grid(*x), EXP, RhsMode.QUANTILE_U), expected, atol=1e-15)


def test_particle_u_keeps_full_weight_sum():
    # all M + 1 particles weigh 1/M, so the total weight is (M + 1) / M
    x = grid(0.0, 10.0)
    out = rhs(x, RAMP, RhsMode.PARTICLE_U)
    # particle 0 sees U(0) = 1 and U(-10) = 0, then subtracts lam * 1 / M
    assert out[0] == pytest.approx(1.0 - (1.0 + 0.0 - 1.0))


# equivalence -----------------------------------------------------------

def test_equivalence_with_coincident_blocks():
    s = grid(0, 0, 0, 0.2, 0.2, 1.0, 1.0, 1.0)
    assert equivalence_check(s, EXP) <= 8 * np.finfo(float).eps
    assert equivalence_check(s, RAMP) <= 8 * np.finfo(float).eps


def test_equivalence_fails_visibly_on_decreasing_state():
    assert equivalence_check(np.array([0.0, 1.0, 0.5]), EXP) > 1e-3


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=40), st.integers(0, 5))
def test_equivalence_on_random_ordered_states(xs, dup):
    x = np.sort(np.array(xs + xs[:dup]))
    assert equivalence_check(grid(*x), EXP) <= 8 * np.finfo(float).eps * max(1.0, len(x) / 8)


# integrate -------------------------------------------------------------

@pytest.mark.parametrize("N", [1, 4, 37])
@pytest.mark.parametrize("mode", list(RhsMode))
def test_indicator_from_dirac_is_exact_fan(N, mode):
    traj = integrate(quantile_of(Measure1D.dirac(0), N), IND, mode, T=1.0)
    assert np.allclose(traj.final.values, np.arange(N + 1) / N, atol=1e-14)


def test_tiny_horizon_returns_initial_state():
    X0 = quantile_of(Measure1D.uniform(0, 1), 16)
    traj = integrate(X0, EXP, "particle_u", T=1e-14)
    assert np.allclose(traj.final.values, X0.values, atol=1e-13)
    assert traj.snapshots[0].time == 0.0


def test_snapshots_land_on_requested_times():
    traj = integrate(quantile_of(Measure1D.uniform(), 8), EXP, T=1.0, times=[0.1, 1 / 3, 0.5])
    assert traj.times.tolist() == [0.0, 0.1, 1 / 3, 0.5, 1.0]
    assert traj.at(1 / 3).time == 1 / 3
    with pytest.raises(KeyError):
        traj.at(0.2)


def test_auto_dt_formula():
    assert auto_dt(EXP, 1.0) == pytest.approx(min(1 / 64, 0.1 / (1 * (1 + 1) + 1)))
    assert auto_dt(IND, 10.0) == pytest.approx(0.1 / 2)


def test_gap_bound_holds_on_exponential_run():
    traj = integrate(quantile_of(Measure1D.uniform(), 128), EXP, T=1.0)
    assert traj.final.gaps.min() >= gap_bound(EXP, 128, 1.0)


def test_coincident_initial_particles_detach_immediately():
    mu = Measure1D(atoms=((0.0, 0.5),), pieces=((1.0, 2.0, 0.5),))
    traj = integrate(quantile_of(mu, 32), EXP, T=0.2, times=[0.01, 0.2])
    assert traj.snapshots[0].gaps.min() == 0.0
    assert traj.at(0.01).gaps.min() > 0.0


def test_huge_step_is_rejected_with_suggestion():
    # a steep velocity map and one unit step overshoot the atom's fan
    stiff = type(EXP)(linear_velocity(1.0, 100.0), EXP.kernel)
    mu = Measure1D(atoms=((0.0, 0.5),), pieces=((1.0, 2.0, 0.5),))
    with pytest.raises(StepRejected) as info:
        integrate(quantile_of(mu, 16), stiff, "particle_u", T=1.0, dt=1.0)
    assert info.value.suggested_dt == pytest.approx(info.value.dt / 2)


def test_integrate_matches_textbook_rk4():
    X0 = quantile_of(Measure1D.uniform(), 12)
    ref = rk4_scalar_system(lambda x: rhs(x, EXP, "particle_u"), X0.values, 1.0, 40)
    traj = integrate(X0, EXP, "particle_u", T=1.0, dt=1 / 40)
    assert np.allclose(traj.final.values, ref, atol=1e-15)


def test_particle_velocity_bounded_by_lip_v_lambda():
    traj = integrate(quantile_of(Measure1D.uniform(), 32), EXP, T=1.0, times=np.linspace(0.1, 1, 10))
    for s in traj.snapshots:
        vel = rhs(s, EXP, "particle_u")
        assert np.all(np.abs(vel - vel[-1]) <= EXP.lip_v * EXP.lam + 1e-12)


@pytest.mark.parametrize("mode", list(RhsMode))
def test_runs_are_deterministic(mode):
    X0 = quantile_of(Measure1D(pieces=((0, 1, 0.5), (2, 3, 0.5))), 40)
    a = integrate(X0, RAMP, mode, T=1.0, times=[0.5, 1.0])
    b = integrate(X0, RAMP, mode, T=1.0, times=[0.5, 1.0])
    assert all(np.array_equal(s.values, r.values) for s, r in zip(a.snapshots, b.snapshots))


@given(st.floats(-100, 100).filter(lambda c: c == round(c * 64) / 64))
def test_translation_equivariance(c):
    # dyadic shifts are exact in binary, so the shift commutes with every flop
    X0 = quantile_of(Measure1D.uniform(0, 1), 16)
    a = integrate(X0, EXP, T=0.5, times=[0.25, 0.5])
    b = integrate(X0.shifted(c), EXP, T=0.5, times=[0.25, 0.5])
    for s, r in zip(a.snapshots, b.snapshots):
        assert np.allclose(r.values - s.values, c, rtol=0, atol=1e-12 * (1 + abs(c)))


@given(st.floats(0.05, 0.25), st.sampled_from([RhsMode.PARTICLE_U, RhsMode.QUANTILE_U]))
def test_step_halving_order(dt, mode):
    X0 = quantile_of(Measure1D.uniform(0, 1), 16)
    T = 1.0
    ends = [integrate(X0, EXP, mode, T, dt=h).final.values for h in (dt, dt / 2, dt / 4)]
    e1 = np.max(np.abs(ends[0] - ends[1]))
    e2 = np.max(np.abs(ends[1] - ends[2]))
    assert e1 / e2 >= 8.0


# velocity field --------------------------------------------------------

def test_indicator_field_equals_cdf():
    s = grid(0.0, 0.1, 0.4, 1.0)
    q = np.linspace(-0.5, 1.5, 41)
    G = velocity_field(s, IND, q).velocities
    F = np.interp(q, s.values, s.z, left=0.0, right=1.0)
    assert np.allclose(G, F, atol=1e-15)
    assert G[0] == pytest.approx(0.0, abs=1e-15) and G[-1] == pytest.approx(1.0)


def test_field_convolution_matches_midpoint_reference():
    s = grid(0.0, 0.2, 0.7, 1.5, 1.6)
    q = np.linspace(-1, 2, 31)
    ys = np.concatenate([np.linspace(a, b, 4001)[:-1] + (b - a) / 8000
                         for a, b in zip(s.values[:-1], s.values[1:])])
    w = np.repeat(s.mesh / 4000, ys.size)
    for m in (EXP, RAMP):
        F = np.interp(q, s.values, s.z, left=0.0, right=1.0)
        ref = 1.0 - (m.kernel.U(q[:, None] - ys[None, :]) @ w - m.lam * F)
        assert np.allclose(velocity_field(s, m, q).velocities, ref, atol=1e-7)


def test_field_bounded_by_velocity_range():
    s = quantile_of(Measure1D.uniform(0, 2), 20)
    G = velocity_field(s, EXP, np.linspace(-1, 3, 101)).velocities
    assert np.all(np.abs(G) <= 1.0 + EXP.lip_v * EXP.lam)


def test_field_refuses_atoms():
    with pytest.raises(DegenerateGap):
        velocity_field(grid(0, 0, 1), EXP, [0.5])
