"""Whole-system checks, one numbered test per shipped guarantee.

``pytest -v tests/test_acceptance.py`` prints one pass/fail line per check.
Tolerances are stated inline next to each assertion. The Monte Carlo checks
(5, 11, 12, 13) are sized for a single core; 13 is the long one.
"""

import json
import math
import os

import numpy as np

from helpers import char_poly_eigenvalues
from phaselock import (
    TWO_PI,
    EmpiricalDelay,
    ExperimentConfig,
    GaussianDelay,
    IsotropySpec,
    Partition,
    PhaseModel,
    PointDelay,
    SineCoupling,
    TabulatedCoupling,
    UniformDelay,
    basin_mc,
    classify,
    cluster_destab,
    complete_graph,
    constellation_sum,
    convolve_delay,
    cut_sum,
    even_order_cut_certificate,
    integrate,
    linearize,
    make_banded,
    meanfield_compare,
    min_cut_scan,
    min_cut_surface,
    odd_order_cut_certificate,
    phase_rhs,
    random_connected_graph,
    symmetric_eigenvalues,
    symmetric_equilibrium,
    sync_probability_sweep,
    third_harmonic_coupling,
    twisted_state,
    uniform_delay_family,
)
from phaselock.cli import run as cli_run
from phaselock.graph import circulant_graph

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def _pass(num, detail):
    print("criterion %02d PASS — %s" % (num, detail))


def _twist_linearization():
    model = PhaseModel(circulant_graph(6, (1, 2)), SineCoupling(1.0), 1.0)
    return linearize(model, twisted_state(6, 1))


def test_criterion_01_twisted_ring_cut_values():
    lin = _twist_linearization()
    for v in range(6):
        lone = cut_sum(lin, Partition.from_side(6, [v]))
        assert abs(lone) < 1e-12
    arc = cut_sum(lin, Partition.from_side(6, [0, 1, 5]))
    assert abs(arc - (-1.0)) < 1e-12
    _pass(1, "lone-vertex cuts all 0, arc cut %+.15f" % arc)


def test_criterion_02_twisted_ring_spectrum_unstable():
    lin = _twist_linearization()
    verdict = classify(lin)
    assert verdict.verdict == "Unstable"
    assert verdict.max_nonflow_eigenvalue > 0.0
    # the iterative eigensolver against an independent characteristic-
    # polynomial route on the same 6x6 matrix; this spectrum has a triple
    # root at 0, which a polynomial solver can only locate to ~eps^(1/3),
    # so the full-spectrum comparison gets a matching tolerance while the
    # decisive largest eigenvalue is held tight
    got = symmetric_eigenvalues(lin.matrix)
    oracle = char_poly_eigenvalues(lin.matrix)
    np.testing.assert_allclose(got, oracle, atol=2e-5)
    assert abs(got[-1] - oracle[-1]) < 1e-7
    _pass(2, "Unstable, max nonflow eigenvalue %+.6f" % verdict.max_nonflow_eigenvalue)


def test_criterion_03_twist_family_surface_all_negative():
    model = PhaseModel(circulant_graph(6, (1, 2)), SineCoupling(1.0), 1.0)
    lams, values = min_cut_surface(model, grid=41)
    assert lams.shape == (41,) and values.shape == (41, 41)
    assert lams[0] == -math.pi and lams[-1] == math.pi
    assert np.max(values) < 0.0
    _pass(3, "41x41 min-cut surface max %.6f < 0" % float(np.max(values)))


def test_criterion_04_potential_descends_at_the_squared_speed():
    rng = np.random.default_rng(404)
    h = 0.001
    worst_rel = 0.0
    for i in range(50):
        n = int(rng.integers(3, 9))
        g = random_connected_graph(n, 0.5, rng)
        f = SineCoupling(1.0) if i % 2 == 0 else make_banded(1.2)
        eps = float(rng.uniform(0.2, 1.0))
        model = PhaseModel(g, f, eps)
        phi0 = rng.uniform(0.0, TWO_PI, n)
        traj = integrate(model, phi0, h=h, t_end=3.0)
        v = traj.potentials
        assert v is not None
        scale = max(1.0, float(np.max(np.abs(v))))
        assert np.all(np.diff(v) <= 1e-9 * scale)
        # step-differenced dV/dt against -(1/eps)*||phi_dot||^2, relative 1e-4
        ks = np.arange(100, v.shape[0] - 1, 50)
        dv = (v[ks + 1] - v[ks - 1]) / (2.0 * h)
        target = np.array(
            [-float(np.sum(phase_rhs(model, traj.states[k]) ** 2)) / eps for k in ks]
        )
        mask = np.abs(target) > 1e-8 * float(np.max(np.abs(target)))
        rel = np.max(np.abs(dv[mask] - target[mask]) / np.abs(target[mask]))
        assert rel < 1e-4
        worst_rel = max(worst_rel, float(rel))
    _pass(4, "50 models descend; worst dV/dt relative error %.2e" % worst_rel)


def test_criterion_05_band_limited_coupling_syncs_from_everywhere():
    rng = np.random.default_rng(505)
    for i in range(10):
        n = 4 + i % 5
        g = random_connected_graph(n, 0.6, rng)
        f = make_banded(math.pi / (n - 1))
        report = basin_mc(g, f, 1.0, ExperimentConfig(seed=500 + i, trials=100))
        assert report.fraction == 1.0, "graph %d: only %.2f synced" % (
            i,
            report.fraction,
        )
    _pass(5, "10 graphs x 100 starts all reached r > 0.99")


def test_criterion_06_negative_cut_implies_positive_eigenvalue():
    rng = np.random.default_rng(606)
    grid = TWO_PI * np.arange(512) / 512
    couplings = [
        SineCoupling(1.0),
        make_banded(0.9),
        TabulatedCoupling(np.sin(grid) - 0.25 * np.sin(3.0 * grid)),
        SineCoupling(0.7),
    ]
    exercised = 0
    for i in range(200):
        n = int(rng.integers(3, 9))
        g = random_connected_graph(n, 0.6, rng)
        model = PhaseModel(g, couplings[i % 4], float(rng.uniform(0.2, 1.5)))
        lin = linearize(model, rng.uniform(0.0, TWO_PI, n))
        _, value = min_cut_scan(lin)
        if value < -1e-10:
            exercised += 1
            verdict = classify(lin)
            assert verdict.max_nonflow_eigenvalue > 0.0, (
                "fixture %d: cut %.3e but max eigenvalue %.3e"
                % (i, value, verdict.max_nonflow_eigenvalue)
            )
    assert exercised >= 30
    _pass(6, "%d/200 fixtures had a negative cut; all had a positive eigenvalue" % exercised)


def test_criterion_07_constellation_sums_vanish_for_even_order():
    deltas = TWO_PI * np.arange(256) / 256
    fixtures = [SineCoupling(1.0), third_harmonic_coupling(a3=-0.15)]
    worst = 0.0
    for f in fixtures:
        for m in (2, 4, 6, 8):
            g = constellation_sum(f, m, deltas)
            worst = max(worst, float(np.max(np.abs(g))))
    assert worst < 1e-12
    _pass(7, "|g_m| <= %.2e for m in {2,4,6,8}, both fixtures" % worst)


def test_criterion_08_even_order_certificates():
    f2 = third_harmonic_coupling(a3=-0.15)
    cases = [
        (IsotropySpec(2, (3,)), SineCoupling(1.0), -9.0),
        (IsotropySpec(4, (1, 1), (0.0, math.pi / 5)), SineCoupling(1.0), -1.0),
        (IsotropySpec(2, (2,)), f2, -2.2),
    ]
    values = []
    for spec, f, expected in cases:
        part, raw = even_order_cut_certificate(spec, f)
        np.testing.assert_allclose(raw, expected, atol=1e-9)
        assert raw < 0.0
        lin = linearize(
            PhaseModel(complete_graph(spec.n), f, 1.0), symmetric_equilibrium(spec)
        )
        assert classify(lin).verdict == "Unstable"
        values.append(raw)
    _pass(8, "block-isolating cuts %s, all Unstable" % np.round(values, 9).tolist())


def test_criterion_09_odd_order_certificates():
    f = SineCoupling(1.0)
    specs = [IsotropySpec(7, (1,)), IsotropySpec(9, (1, 2), (0.0, math.pi / 9))]
    raws = []
    for spec in specs:
        part, raw, report = odd_order_cut_certificate(spec, f)
        assert raw < 0.0
        assert max(report.pair_values) < 0.0
        assert float(np.max(report.grid_values)) < 0.0
        assert report.terminal_value <= 0.0
        lin = linearize(
            PhaseModel(complete_graph(spec.n), f, 1.0), symmetric_equilibrium(spec)
        )
        assert classify(lin).verdict == "Unstable"
        raws.append(raw)
    _pass(9, "arc cuts %s for m in {7, 9}, bounds negative, both Unstable" % np.round(raws, 6).tolist())


def test_criterion_10_delay_averaged_sine_closed_form():
    rng = np.random.default_rng(1010)
    gain = 1.7
    f = SineCoupling(gain)
    laws = [
        PointDelay(0.9),
        UniformDelay(1.2, 0.7),
        GaussianDelay(1.0, 0.5),
        EmpiricalDelay(rng.gamma(2.0, 0.5, 4000)),
    ]
    theta = TWO_PI * np.arange(512) / 512
    worst = 0.0
    for law in laws:
        effective = convolve_delay(f, law, m=4096)
        c, xi = law.order_parameter()
        target = gain * c * np.sin(theta - xi)
        err = float(np.max(np.abs(effective(theta) - target)))
        assert err < 1e-3, "%s: error %.2e" % (law.kind, err)
        worst = max(worst, err)
    _pass(10, "all four delay kinds within %.2e of gain*C*sin(theta-xi)" % worst)


def test_criterion_11_meanfield_gap_shrinks_and_locks():
    cfg = ExperimentConfig(seed=99, trials=20, t_end=120.0)
    medians = []
    final_r = None
    for n in (5, 10, 50):
        report = meanfield_compare(n, cfg)
        medians.append(report.median_sup_distance)
        final_r = report.r_pairwise[:, -1]
    assert medians[0] > medians[1] > medians[2]
    assert float(np.min(final_r)) > 0.95
    _pass(
        11,
        "median sup-distance %.3f > %.3f > %.3f; N=50 final r >= %.4f"
        % (medians[0], medians[1], medians[2], float(np.min(final_r))),
    )


def test_criterion_12_delay_spread_destroys_clusters():
    cfg = ExperimentConfig(seed=12, trials=1, sync_threshold=0.8)
    family = uniform_delay_family(1.15)
    narrow = cluster_destab(45, family(0.30), cfg)
    assert narrow.outcome == "ClustersPersist"
    assert narrow.verdict == "Stable"
    assert narrow.agrees()
    wide = cluster_destab(45, family(0.60), cfg)
    assert wide.outcome == "InPhase"
    assert wide.verdict == "Unstable"
    assert wide.agrees()
    _pass(
        12,
        "narrow tail r %.3f persists (Stable); wide tail r %.3f in phase (Unstable)"
        % (narrow.tail_min_r, wide.tail_min_r),
    )


def test_criterion_13_sync_probability_crosses_at_the_predicted_spread():
    sigmas = np.round(np.linspace(0.30, 0.66, 7), 10)
    cfg = ExperimentConfig(seed=20, trials=50, sync_threshold=0.8)
    report = sync_probability_sweep([45], sigmas, cfg)
    star = report.sigma_star[0]
    crossing = report.crossing(0)
    assert star is not None and crossing is not None
    assert abs(crossing - star) <= 0.06 + 1e-9
    _pass(
        13,
        "probabilities %s cross 0.5 at sigma=%.2f vs predicted %.4f"
        % (np.round(report.probs[0], 2).tolist(), crossing, star),
    )


def test_criterion_14_reruns_are_byte_identical(tmp_path, capsys):
    jobs = [
        ("stability", os.path.join(CONFIG_DIR, "stability_circulant_twist.json"), []),
        ("surface", os.path.join(CONFIG_DIR, "surface_twist_family.json"), ["--grid", "11"]),
    ]
    for verb, cfg_path, extra in jobs:
        out1 = str(tmp_path / (verb + "_one"))
        out2 = str(tmp_path / (verb + "_two"))
        assert cli_run([verb, cfg_path, "--output-dir", out1] + extra) == 0
        assert cli_run([verb, cfg_path, "--output-dir", out2] + extra) == 0
        names1 = sorted(os.listdir(out1))
        assert names1 == sorted(os.listdir(out2))
        for name in names1:
            with open(os.path.join(out1, name), "rb") as fh:
                a = fh.read()
            with open(os.path.join(out2, name), "rb") as fh:
                b = fh.read()
            assert a == b, "%s/%s differs between reruns" % (verb, name)
    capsys.readouterr()
    _pass(14, "stability and surface outputs byte-identical across reruns")
