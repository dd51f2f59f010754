import math

import numpy as np
import pytest

from phaselock import (
    TWO_PI,
    ExperimentConfig,
    PointDelay,
    SineCoupling,
    SweepReport,
    TabulatedCoupling,
    UniformDelay,
    basin_mc,
    cluster_destab,
    cluster_layout,
    critical_sigma,
    make_banded,
    meanfield_compare,
    order_parameter,
    sync_probability_sweep,
    third_harmonic_coupling,
    trial_rng,
    twisted_state,
    uniform_delay_family,
    wrap_angle,
)
from phaselock.errors import BadNError, DisconnectedError, ValidationError
from phaselock.graph import build_graph, path_graph, ring_graph


def test_trial_rng_reproducible_and_keyed():
    a = trial_rng(7, 3, 1).uniform(size=5)
    b = trial_rng(7, 3, 1).uniform(size=5)
    np.testing.assert_array_equal(a, b)
    # a different key gives an independent stream
    c = trial_rng(7, 3, 2).uniform(size=5)
    assert np.max(np.abs(a - c)) > 1e-10
    # and the construction is the documented SeedSequence spawn
    direct = np.random.default_rng(
        np.random.SeedSequence(entropy=7, spawn_key=(3, 1))
    ).uniform(size=5)
    np.testing.assert_array_equal(a, direct)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"seed": -1},
        {"seed": 0, "trials": 0},
        {"seed": 0, "threads": 0},
        {"seed": 0, "sync_threshold": 0.0},
        {"seed": 0, "sync_threshold": 1.0},
    ],
)
def test_experiment_config_rejects_bad_values(kwargs):
    with pytest.raises(ValidationError):
        ExperimentConfig(**kwargs)


def test_experiment_config_defaults():
    cfg = ExperimentConfig(seed=5)
    assert cfg.trials == 50
    assert cfg.t_end is None and cfg.h is None
    assert cfg.sync_threshold == 0.99
    assert cfg.threads == 1


def test_basin_two_oscillators_always_lock():
    # a coupled pair with an odd coupling positive on (0, pi) locks from
    # every start except the measure-zero antipodal state
    g = path_graph(2)
    report = basin_mc(g, make_banded(3.0), 1.0, ExperimentConfig(seed=1, trials=20))
    assert report.fraction == 1.0
    assert report.synced.all()
    assert report.final_r.shape == (20,)
    assert np.all(report.final_r > 0.99)
    assert np.all(report.stop_times > 0.0)


def test_basin_sees_competing_attractor():
    # starts near the stable twisted state on the 6-ring stay there, so the
    # synchrony basin fraction drops below one
    g = ring_graph(6)
    base = twisted_state(6, 1)

    def near_twist(rng):
        return wrap_angle(base + 0.2 * rng.uniform(-1.0, 1.0, 6))

    report = basin_mc(
        g, SineCoupling(1.0), 1.0, ExperimentConfig(seed=2, trials=12), sampler=near_twist
    )
    assert report.fraction < 1.0
    assert np.all(report.final_r[~report.synced] < 0.9)


def test_basin_requires_connected_graph():
    g = build_graph(4, ((0, 1), (2, 3)))
    with pytest.raises(DisconnectedError):
        basin_mc(g, SineCoupling(1.0), 1.0, ExperimentConfig(seed=0, trials=2))


def test_basin_thread_count_does_not_change_results():
    g = ring_graph(5)
    kw = dict(seed=9, trials=6, t_end=40.0)
    serial = basin_mc(g, SineCoupling(1.0), 1.0, ExperimentConfig(**kw))
    pooled = basin_mc(g, SineCoupling(1.0), 1.0, ExperimentConfig(threads=3, **kw))
    np.testing.assert_array_equal(serial.final_r, pooled.final_r)
    np.testing.assert_array_equal(serial.stop_times, pooled.stop_times)
    assert serial.fraction == pooled.fraction


def test_meanfield_point_delay_matches_shifted_coupling():
    # a point mass at psi0 makes the averaged coupling an exact shift, so the
    # paired runs integrate the same vector field term by term
    grid = TWO_PI * np.arange(1024) / 1024
    f = TabulatedCoupling(-np.sin(grid))
    cfg = ExperimentConfig(seed=4, trials=2, t_end=20.0)
    report = meanfield_compare(4, cfg, coupling=f, delay=PointDelay(0.9))
    # the two runs agree to rounding; the repulsive flow amplifies the table
    # evaluation differences slowly, so leave a few orders of headroom
    assert float(np.max(report.sup_distance)) < 1e-6


def test_meanfield_gap_shrinks_with_population():
    cfg = ExperimentConfig(seed=5, trials=8, t_end=120.0)
    small = meanfield_compare(5, cfg)
    large = meanfield_compare(10, cfg)
    assert large.median_sup_distance < small.median_sup_distance
    # the delay-averaged default coupling is attractive, so the effective
    # model locks even though the bare coupling is repulsive
    assert float(np.min(large.r_effective[:, -1])) > 0.95
    assert report_shapes_match(small) and report_shapes_match(large)


def report_shapes_match(report):
    return (
        report.r_pairwise.shape == report.r_effective.shape
        and report.times.shape[0] == report.r_pairwise.shape[1]
        and report.sup_distance.shape[0] == report.r_pairwise.shape[0]
    )


def test_meanfield_rejects_tiny_population():
    with pytest.raises(ValidationError):
        meanfield_compare(1, ExperimentConfig(seed=0, trials=1))


def test_meanfield_thread_count_does_not_change_results():
    cfg_a = ExperimentConfig(seed=6, trials=4, t_end=40.0)
    cfg_b = ExperimentConfig(seed=6, trials=4, t_end=40.0, threads=2)
    a = meanfield_compare(5, cfg_a)
    b = meanfield_compare(5, cfg_b)
    np.testing.assert_array_equal(a.sup_distance, b.sup_distance)
    np.testing.assert_array_equal(a.r_pairwise, b.r_pairwise)


def test_third_harmonic_coupling_matches_formula(rng):
    f = third_harmonic_coupling()
    theta = rng.uniform(0.0, TWO_PI, 64)
    np.testing.assert_allclose(
        f(theta), np.sin(theta) - 0.32 * np.sin(3.0 * theta), atol=1e-10
    )
    np.testing.assert_allclose(f.deriv(0.0), 1.0 - 3.0 * 0.32, atol=1e-9)
    g = third_harmonic_coupling(a3=0.1)
    np.testing.assert_allclose(g.deriv(0.0), 1.3, atol=1e-9)


def test_cluster_layout_balanced_thirds():
    base = cluster_layout(9)
    assert base.shape == (9,)
    r, _ = order_parameter(base)
    assert r < 1e-12
    thirds = np.round(base / (TWO_PI / 3.0)).astype(int) % 3
    np.testing.assert_allclose(base, thirds * TWO_PI / 3.0, atol=1e-12)
    assert sorted(np.bincount(thirds)) == [3, 3, 3]
    for bad in (0, 7):
        with pytest.raises(BadNError):
            cluster_layout(bad)


def test_uniform_delay_family_spread_and_degenerate_point():
    family = uniform_delay_family(1.15)
    law = family(0.3)
    assert isinstance(law, UniformDelay)
    assert law.mu == 1.15
    # half-width sigma*sqrt(3) gives a uniform law with standard deviation sigma
    np.testing.assert_allclose(law.w / math.sqrt(3.0), 0.3, atol=1e-12)
    point = family(0.0)
    assert isinstance(point, PointDelay)
    assert point.psi0 == 1.15
    with pytest.raises(ValueError):
        family(0.7)  # support would dip below zero


def test_critical_sigma_known_value_and_population_free():
    cs6 = critical_sigma(6)
    cs12 = critical_sigma(12)
    assert cs6 == cs12
    np.testing.assert_allclose(cs6, 0.5031, atol=0.005)
    # a window that stops short of the critical spread reports no crossing
    assert critical_sigma(6, hi=0.45) is None


def test_cluster_destab_zero_spread_keeps_clusters():
    # the sweep family's zero-spread member: every edge carries the mean lag
    cfg = ExperimentConfig(seed=3, trials=1, t_end=600.0, sync_threshold=0.8)
    report = cluster_destab(
        9, PointDelay(1.15), cfg, jitter=0.0, run_phase_model=False
    )
    assert report.outcome == "ClustersPersist"
    assert report.tail_min_r < 0.1
    assert report.verdict in ("Stable", "Marginal")
    assert report.agrees()
    # a point mass shifts the coupling, so the slope at 0 is f'(-1.15) up to
    # the resolution of the mass splitting on the convolution grid
    np.testing.assert_allclose(
        report.slopes[0], math.cos(1.15) - 0.96 * math.cos(3.45), atol=1e-5
    )
    assert report.phase_times.shape == (0,)
    assert report.phase_r.shape == (0,)


def test_cluster_destab_without_delays_falls_into_sync():
    # with no transmission lag at all the third-harmonic population does not
    # hold its clusters: the collapse is what the mean delay prevents
    cfg = ExperimentConfig(seed=3, trials=1, t_end=600.0, sync_threshold=0.8)
    report = cluster_destab(
        9, PointDelay(0.0), cfg, jitter=0.0, run_phase_model=False
    )
    assert report.outcome == "InPhase"
    assert report.verdict == "Unstable"
    assert report.agrees()
    np.testing.assert_allclose(report.slopes[0], 0.04, atol=1e-9)


def test_cluster_outcome_consistent_with_tail():
    cfg = ExperimentConfig(seed=12, trials=1, t_end=600.0, sync_threshold=0.8)
    report = cluster_destab(
        9, UniformDelay(1.15, 0.6 * math.sqrt(3.0)), cfg, run_phase_model=True
    )
    assert (report.outcome == "InPhase") == (report.tail_min_r > 0.8)
    assert report.verdict == "Unstable"
    assert report.n == 9
    # the lagged phase model ran from the same state
    assert report.phase_times.shape[0] > 0
    assert np.all((report.phase_r >= 0.0) & (report.phase_r <= 1.0))
    assert report.phase_times[-1] <= 600.0 + 1e-9


def test_sweep_zero_spread_cell_and_prediction():
    cfg = ExperimentConfig(seed=20, trials=3, t_end=600.0, sync_threshold=0.8)
    report = sync_probability_sweep(
        [6], [0.0, 0.6], cfg, critical_grid=61
    )
    assert report.probs.shape == (1, 2)
    # no spread, no quenched disorder: the clusters always persist
    assert report.probs[0, 0] == 0.0
    assert report.trials == 3
    np.testing.assert_allclose(report.sigma_star[0], 0.5031, atol=0.015)


def test_sweep_report_crossing():
    report = SweepReport(
        n_values=(5,),
        sigma_values=np.array([0.1, 0.2, 0.3]),
        probs=np.array([[0.0, 0.6, 1.0]]),
        trials=10,
        sigma_star=(0.15,),
    )
    assert report.crossing(0) == 0.2
    assert report.crossing(0, level=0.7) == 0.3
    low = SweepReport(
        n_values=(5,),
        sigma_values=np.array([0.1, 0.2]),
        probs=np.array([[0.0, 0.2]]),
        trials=10,
        sigma_star=(None,),
    )
    assert low.crossing(0) is None
