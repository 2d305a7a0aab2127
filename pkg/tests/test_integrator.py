import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadbessel.bessel import besq_exact_transition
from quadbessel.integrator import (
    EventSpec,
    PathState,
    StepConfig,
    correlated_increments,
    drift_implicit_step,
    simulate_path,
    step,
    truncated_reciprocal,
    truncated_step,
)
from quadbessel.montecarlo import stream_generator
from quadbessel.params import O2BPParams
from quadbessel.stats import ks_two_sample


def P(alpha, beta, gamma, delta, rho=0.0, theta=0.0, eta=0.0):
    return O2BPParams(alpha, beta, gamma, delta, rho, theta, eta)


def test_correlated_increments_degenerate_and_moments():
    rng = np.random.default_rng(0)
    dB, dC = correlated_increments(1.0, 0.1, rng, size=1000)
    assert np.array_equal(dB, dC)
    dB, dC = correlated_increments(-1.0, 0.1, rng, size=1000)
    assert np.array_equal(dB, -dC)
    n = 1_000_000
    dB, dC = correlated_increments(0.5, 1.0, rng, size=n)
    cov = float(np.mean(dB * dC))
    assert cov == pytest.approx(0.5, abs=0.005)
    dB, dC = correlated_increments(0.0, 1e-3, rng, size=n)
    assert abs(np.mean(dB * dC)) <= 3 * 1e-3 / math.sqrt(n)


def test_drift_implicit_step_quadratic_oracle():
    # new x solves z^2 - q z - alpha dt = 0; oracle via polynomial roots
    cfg = StepConfig(dt=0.01)
    p = P(0.5, 0.0, 0.0, 0.5)
    out = drift_implicit_step(PathState(1.0, 1.0), p, -0.05, 0.0, cfg)
    root = max(np.roots([1.0, -0.95, -0.5 * 0.01]))
    assert out.x == pytest.approx(float(root), abs=1e-12)
    assert out.x == pytest.approx(0.955234, abs=1e-5)
    assert out.t == pytest.approx(0.01)


def test_drift_implicit_step_small_dt_fixed_point():
    p = P(0.5, 0.0, 0.0, 0.5)
    s = PathState(1.0, 1.0)
    for dt in (1e-6, 1e-9, 1e-12):
        out = drift_implicit_step(s, p, 0.0, 0.0, StepConfig(dt=dt))
        assert out.x == pytest.approx(1.0, abs=10 * dt)


@settings(max_examples=300)
@given(
    x=st.floats(1e-12, 1e6),
    y=st.floats(1e-12, 1e6),
    dB=st.floats(-1e6, 1e6),
    dC=st.floats(-1e6, 1e6),
    alpha=st.floats(1e-3, 10),
    delta=st.floats(1e-3, 10),
    beta=st.floats(-10, 10),
    gamma=st.floats(-10, 10),
    dt=st.floats(1e-8, 1.0),
)
def test_strict_positivity_under_extreme_inputs(x, y, dB, dC, alpha, delta, beta, gamma, dt):
    p = O2BPParams(alpha, beta, gamma, delta, 0.0, 0.0, 0.0)
    cfg = StepConfig(dt=dt)
    out = drift_implicit_step(PathState(x, y), p, dB, dC, cfg)
    assert out.x > 0.0
    assert out.y > 0.0
    out = truncated_step(PathState(x, y), p, dB, dC, cfg)
    assert out.x > 0.0
    assert out.y > 0.0


def test_step_scaling_equivariance():
    # scaling x by 1/c matches stepping the scaled state with scaled noise
    # and time, exactly up to roundoff, when theta = eta = 0
    rng = np.random.default_rng(3)
    p = P(0.7, -0.4, 0.3, 1.2, rho=0.2)
    for c in (2.0, 10.0, 0.25):
        cfg = StepConfig(dt=1e-3, cross_floor=1e-10)
        cfg_scaled = StepConfig(dt=1e-3 / c**2, cross_floor=1e-10 / c)
        s = PathState(1.3, 0.8)
        s_scaled = PathState(1.3 / c, 0.8 / c)
        for _ in range(50):
            dB, dC = correlated_increments(p.rho, cfg.dt, rng)
            s = drift_implicit_step(s, p, dB, dC, cfg)
            s_scaled = drift_implicit_step(s_scaled, p, dB / c, dC / c, cfg_scaled)
            assert s_scaled.x == pytest.approx(s.x / c, rel=1e-12)
            assert s_scaled.y == pytest.approx(s.y / c, rel=1e-12)


def test_truncated_reciprocal_shape():
    for n in (1, 2, 10, 100):
        thr = 1.0 / n
        above = truncated_reciprocal(thr * (1 + 1e-12), n)
        below = truncated_reciprocal(thr * (1 - 1e-12), n)
        assert above == pytest.approx(n - 1.0, rel=1e-9)
        assert below == pytest.approx(n - 1.0, rel=1e-9)
    assert truncated_reciprocal(1.0, 10) == pytest.approx(0.9)
    assert truncated_reciprocal(1.0, 100) == pytest.approx(0.99)
    assert truncated_reciprocal(0.5, 1) == 0.0
    assert truncated_reciprocal(2.0, 1) == 0.0
    with pytest.raises(ValueError):
        truncated_reciprocal(1.0, 0)


def test_truncated_level_one_drops_cross_terms():
    p = P(0.8, -2.0, 3.0, 0.6, theta=0.3, eta=0.1)
    p_nocross = P(0.8, 0.0, 0.0, 0.6, theta=0.3, eta=0.1)
    cfg = StepConfig(dt=1e-2, scheme="truncated", truncation_level=1)
    s = PathState(0.9, 1.1)
    a = truncated_step(s, p, 0.02, -0.01, cfg)
    b = drift_implicit_step(s, p_nocross, 0.02, -0.01, cfg)
    assert (a.x, a.y) == (b.x, b.y)


def test_kernel_matches_scalar_reference():
    # the compiled path must reproduce the scalar step map bit for bit
    for scheme, level in (("drift-implicit", 1), ("truncated", 7)):
        p = P(0.6, -0.3, 0.4, 0.9, rho=-0.35, theta=0.2, eta=0.1)
        cfg = StepConfig(dt=2e-3, scheme=scheme, truncation_level=level)
        n = 200
        rng = stream_generator(11, 0)
        dB, dC = correlated_increments(p.rho, cfg.dt, rng, size=n)
        path = simulate_path(
            p, PathState(0.7, 1.4), n * cfg.dt, cfg, increments=(dB, dC)
        )
        s = PathState(0.7, 1.4)
        for k in range(n):
            s = step(s, p, dB[k], dC[k], cfg)
        assert path.x[-1] == s.x
        assert path.y[-1] == s.y


def test_simulate_path_zero_horizon_and_validation():
    p = P(1, 0, 0, 1)
    cfg = StepConfig(dt=1e-3)
    path = simulate_path(p, PathState(0.5, 0.25, t=2.0), 0.0, cfg, rng=np.random.default_rng(0))
    assert path.t.tolist() == [2.0]
    assert path.x.tolist() == [0.5]
    assert path.final_state.y == 0.25
    with pytest.raises(ValueError):
        simulate_path(p, PathState(0.5, 0.5), -1.0, cfg, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        PathState(-0.1, 0.5)
    with pytest.raises(ValueError):
        simulate_path(p, PathState(0.5, 0.5), 1.0, cfg)  # no rng, no increments


def test_simulate_path_stride_and_serialization(tmp_path):
    p = P(1, 0.2, 0.1, 1, rho=0.3)
    cfg = StepConfig(dt=1e-3)
    rng = stream_generator(5, 0)
    path = simulate_path(p, PathState(1, 1), 0.0105, cfg, rng=rng, stride=4)
    # 11 steps: records at 0, 4, 8, plus the final step 11
    assert path.t.size == 4
    assert path.t[-1] == pytest.approx(0.011)
    csv_file = tmp_path / "p.csv"
    with open(csv_file, "w") as fh:
        path.write_csv(fh)
    lines = csv_file.read_text().strip().split("\n")
    assert lines[0] == "t,x,y"
    assert len(lines) == 5
    back = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.array_equal(back[:, 1], path.x)  # repr round-trips exactly
    ev_file = tmp_path / "p_events.json"
    with open(ev_file, "w") as fh:
        path.write_events_json(fh)
    ev = json.loads(ev_file.read_text())
    assert set(ev) == {"corner_time", "x_edge_time", "y_edge_time"}


def test_event_detection_grid_mode():
    # strong constant drift pushes y to its floor; the proxy must trigger
    p = P(1.0, 0.0, 0.0, 0.05, eta=3.0)
    cfg = StepConfig(dt=1e-3)
    events = EventSpec(eps_x=-1.0, eps_y=0.05, eps_corner=-1.0)
    path = simulate_path(
        p, PathState(1.0, 0.4), 5.0, cfg, events, rng=stream_generator(1, 0)
    )
    assert path.y_edge_time is not None
    assert path.x_edge_time is None
    assert path.corner_time is None
    assert min(path.y) <= 0.05


def test_event_detection_bridge_mode_reports_probabilities():
    p = P(0.25, 0.0, 0.0, 1.0)
    cfg = StepConfig(dt=1e-3)
    events = EventSpec(eps_x=1e-3, eps_y=-1.0, eps_corner=-1.0, crossing="bridge")
    path = simulate_path(
        p, PathState(0.3, 1.0), 2.0, cfg, events, rng=stream_generator(8, 0)
    )
    assert set(path.hit_probabilities) == {"x_edge", "y_edge", "corner"}
    assert 0.0 <= path.hit_probabilities["x_edge"] <= 1.0
    assert path.hit_probabilities["y_edge"] == 0.0


def test_comparison_dominance_single_seed():
    # identical noise, beta >= 0: the coupled x-path dominates the bare
    # Bessel path at every grid time, exactly
    p = P(0.4, 0.7, -0.5, 0.8, rho=0.0)
    p0 = P(0.4, 0.0, 0.0, 0.8, rho=0.0)
    cfg = StepConfig(dt=1e-3)
    n = 2000
    dB, dC = correlated_increments(0.0, cfg.dt, stream_generator(21, 3), size=n)
    full = simulate_path(p, PathState(0.5, 0.5), 2.0, cfg, increments=(dB, dC))
    bare = simulate_path(p0, PathState(0.5, 0.5), 2.0, cfg, increments=(dB, dC))
    assert np.all(full.x >= bare.x)


def test_truncated_monotone_in_level_single_seed():
    p = P(0.6, -0.8, -0.5, 0.7)
    n = 1000
    dB, dC = correlated_increments(0.0, 1e-3, stream_generator(77, 0), size=n)
    prev = None
    for level in (1, 2, 4, 8, 16, 64):
        cfg = StepConfig(dt=1e-3, scheme="truncated", truncation_level=level)
        path = simulate_path(p, PathState(1.0, 1.0), 1.0, cfg, increments=(dB, dC))
        if prev is not None:
            assert np.all(path.x <= prev.x + 1e-12)
            assert np.all(path.y <= prev.y + 1e-12)
        prev = path


def test_decoupled_marginal_matches_exact_transition():
    # beta = gamma = 0, rho = 0: terminal x is a Bessel marginal; compare
    # against the square root of exact squared-Bessel draws
    p = P(1.0, 0.0, 0.0, 1.0)
    cfg = StepConfig(dt=1e-3)
    n_paths = 4000
    terminals = np.empty(n_paths)
    for i in range(n_paths):
        rng = stream_generator(123, i)
        path = simulate_path(p, PathState(1.0, 1.0), 1.0, cfg, rng=rng, stride=10**9)
        terminals[i] = path.x[-1]
    oracle = np.sqrt(
        besq_exact_transition(1.0, 3.0, 1.0, np.random.default_rng(9), size=50_000)
    )
    assert ks_two_sample(terminals, oracle) <= 0.03
