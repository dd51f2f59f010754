import math

import numpy as np
import pytest

from phaselock import (
    TWO_PI,
    IsotropySpec,
    PhaseModel,
    SineCoupling,
    arc_diameter,
    canonicalize,
    find_equilibrium,
    make_banded,
    phase_rhs,
    symmetric_equilibrium,
    twisted_state,
)
from phaselock.equilibria import residual
from phaselock.errors import BadSpecError, EmptySetError
from phaselock.graph import complete_graph, random_connected_graph, ring_graph


def test_canonicalize_pins_vertex_zero():
    phi = np.array([1.2, 2.0, -0.5])
    out = canonicalize(phi)
    assert out[0] == 0.0
    np.testing.assert_allclose(out, [0.0, 0.8, TWO_PI - 1.7], atol=1e-12)


def test_arc_diameter_cases():
    assert arc_diameter(np.array([0.3])) == 0.0
    np.testing.assert_allclose(arc_diameter(np.array([0.0, 1.0])), 1.0, atol=1e-12)
    # wrap-around cluster: phases near 0 and near 2*pi are close
    np.testing.assert_allclose(
        arc_diameter(np.array([0.1, TWO_PI - 0.2])), 0.3, atol=1e-12
    )
    splay = TWO_PI * np.arange(6) / 6
    np.testing.assert_allclose(arc_diameter(splay), TWO_PI - TWO_PI / 6, atol=1e-12)
    np.testing.assert_allclose(arc_diameter(splay, subset=[0, 1]), TWO_PI / 6, atol=1e-12)
    with pytest.raises(EmptySetError):
        arc_diameter(splay, subset=[])


def test_find_equilibrium_near_sync(rng):
    g = random_connected_graph(7, 0.5, rng)
    model = PhaseModel(g, SineCoupling(1.0), 0.8)
    phi0 = 0.15 * rng.uniform(-1.0, 1.0, 7)
    report = find_equilibrium(model, phi0)
    assert report.converged
    assert report.residual < 1e-12
    assert abs(report.omega_star) < 1e-10
    # converged to the in-phase state
    assert arc_diameter(report.phi) < 1e-6


def test_find_equilibrium_keeps_twisted_ring_state():
    n = 8
    model = PhaseModel(ring_graph(n), SineCoupling(1.0), 1.0)
    phi0 = twisted_state(n, 1) + 0.02 * np.sin(np.arange(n))
    report = find_equilibrium(model, phi0)
    assert report.converged
    # the winding-1 state is an exact equilibrium with omega* = 0
    want = canonicalize(twisted_state(n, 1))
    np.testing.assert_allclose(canonicalize(report.phi), want, atol=1e-8)
    assert abs(report.omega_star) < 1e-10


def test_find_equilibrium_on_singular_manifold():
    """Balanced three-cluster states form a manifold (rank-deficient Jacobian);
    the damped iteration must still land on an equilibrium."""
    n = 9
    model = PhaseModel(complete_graph(n), SineCoupling(1.0), 1.0)
    base = np.asarray(symmetric_equilibrium(IsotropySpec(3, (3,))))
    rng = np.random.default_rng(5)
    report = find_equilibrium(model, base + 1e-3 * rng.uniform(-1, 1, n))
    assert report.converged
    assert report.residual < 1e-12


def test_find_equilibrium_residual_definition(rng):
    g = random_connected_graph(5, 0.6, rng)
    model = PhaseModel(g, make_banded(1.0), 0.5)
    phi = rng.uniform(0.0, TWO_PI, 5)
    r = residual(model, phi, 0.3)
    want = float(np.max(np.abs(0.3 - phase_rhs(model, phi))))
    assert abs(r - want) < 1e-15


def test_symmetric_equilibrium_layouts():
    # single constellation: m evenly spaced blocks of k oscillators
    phi = symmetric_equilibrium(IsotropySpec(3, (2,)))
    np.testing.assert_allclose(
        phi, [0, 0, TWO_PI / 3, TWO_PI / 3, 2 * TWO_PI / 3, 2 * TWO_PI / 3], atol=1e-12
    )
    # two constellations with a shift
    spec = IsotropySpec(2, (1, 1), (0.0, 0.7))
    phi = symmetric_equilibrium(spec)
    np.testing.assert_allclose(phi, [0.0, math.pi, 0.7, 0.7 + math.pi], atol=1e-12)
    assert spec.n == 4


def test_symmetric_states_are_equilibria_of_complete_graphs():
    for spec in (IsotropySpec(3, (3,)), IsotropySpec(4, (2,)), IsotropySpec(2, (1, 2), (0.0, 1.0))):
        model = PhaseModel(complete_graph(spec.n), SineCoupling(1.0), 1.0)
        phi = np.asarray(symmetric_equilibrium(spec))
        assert residual(model, phi, 0.0) < 1e-12


def test_isotropy_spec_validation():
    with pytest.raises(BadSpecError):
        IsotropySpec(0, (1,))
    with pytest.raises(BadSpecError):
        IsotropySpec(2, ())
    with pytest.raises(BadSpecError):
        IsotropySpec(2, (1, 1))  # two constellations need explicit shifts
    with pytest.raises(BadSpecError):
        IsotropySpec(2, (1, 1), (0.0, 4.0))  # shift outside [0, 2*pi/m)
    with pytest.raises(BadSpecError):
        IsotropySpec(2, (1, 1), (0.5, 0.7))  # first shift must be zero
    with pytest.raises(BadSpecError):
        IsotropySpec(2, (1, 1), (0.0, 0.0))  # shifts must be distinct
