"""Phase-difference and pulse-coupled dynamics on oscillator networks.

Two model families share a graph and per-edge couplings:

* ``PhaseModel`` — relative-frame dynamics
  ``dphi_i/dt = eps * sum_j f_ij(phi_j - phi_i - psi_ij)``, integrated with a
  fixed-step classical Runge-Kutta scheme. When all lags vanish and every
  coupling is odd, the flow descends the potential
  ``V(phi) = sum_edges F_e((B^T phi)_e)`` and the potential is recorded along
  trajectories.
* ``PulseModel`` — integrate-and-fire rotation at rate ``omega`` with pulses
  that travel along edges for ``delay`` seconds and kick the receiver by
  ``eps * kappa(theta)``.

The natural-frequency term is dropped during phase-model integration: in
relative coordinates it contributes a rigid rotation only, so ``omega`` is
bookkeeping. The pulse simulator keeps absolute time because delays are in
seconds.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .coupling import CouplingFunction, PulseResponse, wrap_angle
from .errors import (
    BadShapeError,
    EventOverflowError,
    NonFiniteError,
    NotPotentialFormError,
    ValidationError,
)
from .graph import Graph

TWO_PI = 2.0 * math.pi

DEFAULT_EVENT_CAP = 20_000_000


def _per_edge(graph, value, kind):
    """Broadcast a shared coupling/response to a per-edge tuple."""
    if isinstance(value, kind):
        return (value,) * graph.n_edges
    items = tuple(value)
    if len(items) != graph.n_edges:
        raise BadShapeError(
            "expected one %s per edge (%d), got %d" % (kind.__name__, graph.n_edges, len(items))
        )
    for it in items:
        if not isinstance(it, kind):
            raise BadShapeError("per-edge entries must be %s instances" % kind.__name__)
    return items


def _edge_lags(graph, lags):
    """Normalize lags to a per-edge vector; (E, 2) pairs must be symmetric."""
    if lags is None:
        return np.zeros(graph.n_edges)
    arr = np.asarray(lags, dtype=float)
    if arr.shape == (graph.n_edges, 2):
        if np.max(np.abs(arr[:, 0] - arr[:, 1])) > 0:
            raise ValidationError("asymmetric lags: psi_ij != psi_ji")
        arr = arr[:, 0]
    if arr.shape != (graph.n_edges,):
        raise BadShapeError("lags must have one entry (or symmetric pair) per edge")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValidationError("lags must be finite and >= 0")
    return arr


def _compile_couplings(couplings):
    """Flatten coupling objects into the arrays the kernels consume.

    Couplings shared across edges (the common case) are flattened once: the
    kernel parameters are memoized by object identity, so a model with one
    coupling on every edge costs one table build, not one per edge.
    """
    ne = len(couplings)
    kinds = np.empty(ne, dtype=np.int32)
    pa = np.zeros(ne)
    pb = np.zeros(ne)
    tab_idx = np.zeros(ne, dtype=np.int32)
    seen = {}
    tab_couplings = []
    tab_raw = []
    for e, f in enumerate(couplings):
        key = id(f)
        if key not in seen:
            kind, a, b, raw = f.as_kernel()
            row = 0
            if kind == 2:
                row = len(tab_couplings)
                tab_couplings.append(f)
                tab_raw.append(raw)
            seen[key] = (kind, a, b, row)
        kind, a, b, row = seen[key]
        kinds[e] = kind
        pa[e] = a
        pb[e] = b
        tab_idx[e] = row
    if tab_couplings:
        size = max(r.shape[0] for r in tab_raw)
        rows = []
        for f, raw in zip(tab_couplings, tab_raw):
            t = raw if raw.shape[0] == size else f.dense_table(size)
            rows.append(np.concatenate([t, t[:1]]))
        tables = np.array(rows)
    else:
        tables = np.zeros((1, 2))
    return kinds, pa, pb, tab_idx, tables


@dataclass
class Trajectory:
    """Sampled states: times (K,), states (K, N), optional potentials (K,)."""

    times: np.ndarray
    states: np.ndarray
    potentials: np.ndarray | None = None


class PhaseModel:
    """Relative-frame phase dynamics on a graph.

    `coupling` is either a single CouplingFunction shared by every edge or a
    sequence with one entry per edge (the symmetric assignment f_ij = f_ji is
    implied by evaluating the same f from both endpoints). `lags` likewise:
    None, a per-edge vector, or (E, 2) symmetric pairs.
    """

    def __init__(self, graph, coupling, epsilon, lags=None, omega=0.0):
        if not isinstance(graph, Graph):
            raise BadShapeError("graph must be a Graph")
        if not (epsilon > 0):
            raise ValidationError("epsilon must be > 0")
        self.graph = graph
        self.couplings = _per_edge(graph, coupling, CouplingFunction)
        self.epsilon = float(epsilon)
        self.lags = _edge_lags(graph, lags)
        self.omega = float(omega)
        self._compiled = None

    def is_potential_form(self):
        if not np.all(self.lags == 0.0):
            return False
        unique = {id(f): f for f in self.couplings}
        return all(f.is_odd() for f in unique.values())

    def compiled(self):
        if self._compiled is None:
            self._compiled = _compile_couplings(self.couplings)
        return self._compiled


def phase_rhs(model, phi):
    """Exact right-hand side eps * sum_j f_ij(phi_j - phi_i - psi_ij)."""
    phi = np.asarray(phi, dtype=float)
    g = model.graph
    if phi.shape != (g.n,):
        raise BadShapeError("phi must have length %d" % g.n)
    tails = g.tails()
    heads = g.heads()
    d = phi[heads] - phi[tails]
    fu = np.empty(g.n_edges)
    fv = np.empty(g.n_edges)
    u = d - model.lags
    v = -d - model.lags
    by_obj = {}
    for e, f in enumerate(model.couplings):
        by_obj.setdefault(id(f), (f, []))[1].append(e)
    for f, idx in by_obj.values():
        sel = np.asarray(idx)
        fu[sel] = f.eval(u[sel])
        fv[sel] = f.eval(v[sel])
    acc = np.bincount(tails, weights=fu, minlength=g.n) + np.bincount(
        heads, weights=fv, minlength=g.n
    )
    return model.epsilon * acc


def potential(model, phi):
    """V(phi) = sum over edges of the antiderivative at the edge difference."""
    if not model.is_potential_form():
        raise NotPotentialFormError("potential requires zero lags and odd couplings")
    phi = np.asarray(phi, dtype=float)
    g = model.graph
    d = phi[g.heads()] - phi[g.tails()]
    total = 0.0
    for e, f in enumerate(model.couplings):
        total += float(f.antideriv(d[e]))
    return total


def _potential_series(model, states):
    g = model.graph
    d = states[:, g.heads()] - states[:, g.tails()]
    out = np.zeros(states.shape[0])
    by_obj = {}
    for e, f in enumerate(model.couplings):
        by_obj.setdefault(id(f), (f, []))[1].append(e)
    for f, idx in by_obj.values():
        out += f.antideriv(d[:, np.asarray(idx)]).sum(axis=1)
    return out


def integrate(model, phi0, h=None, t_end=None, record_every=1, stop_r=-1.0, check_every=0):
    """Fixed-step RK4 integration; states wrapped to [0, 2*pi) every step.

    Defaults: h = 0.01/(eps*N) and t_end = 500/(eps*N). The state is recorded
    every `record_every` steps. With `stop_r` >= 0 the run ends early once the
    order-parameter modulus exceeds it (checked every `check_every` steps);
    the trajectory is truncated at the stopping point.
    """
    g = model.graph
    eps = model.epsilon
    if h is None:
        h = 0.01 / (eps * g.n)
    if t_end is None:
        t_end = 500.0 / (eps * g.n)
    if not (h > 0) or t_end < h:
        raise ValidationError("need h > 0 and t_end >= h")
    phi0 = np.asarray(phi0, dtype=float)
    if phi0.shape != (g.n,):
        raise BadShapeError("phi0 must have length %d" % g.n)
    n_steps = int(round(t_end / h))
    record_every = int(record_every)
    if record_every < 1:
        raise ValidationError("record_every must be >= 1")
    kinds, pa, pb, tab_idx, tables = model.compiled()
    states, filled, status, last = _kernels.integrate_phase(
        phi0,
        g.tails(),
        g.heads(),
        model.lags,
        kinds,
        pa,
        pb,
        tab_idx,
        tables,
        eps,
        h,
        n_steps,
        record_every,
        stop_r,
        check_every,
    )
    if status == 1:
        raise NonFiniteError("state became non-finite near t = %g" % (last * h))
    states = np.asarray(states[:filled])
    times = h * record_every * np.arange(filled)
    pot = _potential_series(model, states) if model.is_potential_form() else None
    return Trajectory(times=times, states=states, potentials=pot)


def order_parameter(phi):
    """Modulus and argument (in [0, 2*pi)) of the circular mean of phases."""
    phi = np.asarray(phi, dtype=float)
    z = np.exp(1j * phi).mean()
    return float(np.abs(z)), float(wrap_angle(np.angle(z)))


def order_parameter_series(states):
    z = np.exp(1j * np.asarray(states)).mean(axis=-1)
    return np.abs(z)


class PulseModel:
    """Pulse-coupled oscillators: rotation at ``omega`` plus delayed kicks."""

    def __init__(self, graph, response, epsilon, delays=None, omega=TWO_PI):
        if not isinstance(graph, Graph):
            raise BadShapeError("graph must be a Graph")
        if not (epsilon > 0):
            raise ValidationError("epsilon must be > 0")
        if not (omega > 0):
            raise ValidationError("omega must be > 0")
        self.graph = graph
        self.responses = _per_edge(graph, response, PulseResponse)
        for r in self.responses:
            if abs(r.omega - omega) > 1e-9 * max(1.0, abs(omega)):
                raise ValidationError(
                    "response curve was mapped at omega=%g, model has omega=%g"
                    % (r.omega, omega)
                )
        self.epsilon = float(epsilon)
        self.omega = float(omega)
        if delays is None:
            delays = np.zeros(graph.n_edges)
        self.delays = np.asarray(delays, dtype=float)
        if self.delays.shape != (graph.n_edges,):
            raise BadShapeError("delays must have one entry per edge")
        if not np.all(np.isfinite(self.delays)) or np.any(self.delays < 0):
            raise ValidationError("delays must be finite and >= 0")
        # jump sanity: a single kick must not exceed a full revolution
        probe = TWO_PI * np.arange(4096) / 4096
        unique_curves = {id(r.curve): r.curve for r in self.responses}
        peak = max(
            (float(np.max(np.abs(c.eval(probe)))) for c in unique_curves.values()),
            default=0.0,
        )
        if epsilon * peak >= TWO_PI:
            raise ValidationError("eps * max|kappa| must be < 2*pi")
        self._compiled = None

    def compiled(self):
        if self._compiled is None:
            self._compiled = _compile_couplings([r.curve for r in self.responses])
        return self._compiled


def simulate_pulse(
    model,
    theta0,
    t_end,
    sample_dt=None,
    event_cap=DEFAULT_EVENT_CAP,
    fire_on_wrap=True,
):
    """Event-driven simulation; returns (Trajectory, firing times, firing oscillators).

    Phases advance linearly at rate omega between events. A firing resets the
    source to 0 and schedules one arrival per incident edge after that edge's
    delay; an arrival at phase theta applies theta += eps*kappa(theta). With
    `fire_on_wrap` (default) a kick across 2*pi counts as an immediate firing;
    a backward kick across 0 wraps silently. Samples on the ``k*sample_dt``
    grid reflect every event at or before the sample time.
    """
    g = model.graph
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (g.n,):
        raise BadShapeError("theta0 must have length %d" % g.n)
    if np.any(theta0 < 0) or np.any(theta0 >= TWO_PI):
        raise ValidationError("theta0 must lie in [0, 2*pi)")
    if not (t_end > 0):
        raise ValidationError("t_end must be > 0")
    if sample_dt is None:
        sample_dt = 0.25 * TWO_PI / model.omega
    if not (sample_dt > 0):
        raise ValidationError("sample_dt must be > 0")
    kinds, pa, pb, tab_idx, tables = model.compiled()
    samples, fire_t, fire_osc, status = _kernels.run_pulse(
        theta0,
        model.omega,
        model.epsilon,
        g.tails(),
        g.heads(),
        model.delays,
        kinds,
        pa,
        pb,
        tab_idx,
        tables,
        float(t_end),
        float(sample_dt),
        bool(fire_on_wrap),
        int(event_cap),
    )
    if status == 3:
        raise EventOverflowError("event budget (%d) exhausted" % event_cap)
    times = sample_dt * np.arange(samples.shape[0])
    return Trajectory(times=times, states=np.asarray(samples)), fire_t, fire_osc


def write_trajectory_csv(path, traj):
    """CSV with header t,phi_0,...,phi_{N-1}[,V]; 17 significant digits."""
    n = traj.states.shape[1]
    cols = ["t"] + ["phi_%d" % i for i in range(n)]
    data = [traj.times, *(traj.states[:, i] for i in range(n))]
    if traj.potentials is not None:
        cols.append("V")
        data.append(traj.potentials)
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in zip(*data):
            fh.write(",".join("%.17g" % x for x in row) + "\n")


def write_firings_csv(path, fire_t, fire_osc):
    with open(path, "w") as fh:
        fh.write("t,oscillator\n")
        for t, i in zip(fire_t, fire_osc):
            fh.write("%.17g,%d\n" % (t, i))
