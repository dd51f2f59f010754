"""Phase-locked states: search, construction by symmetry, normalization.

A phase-locked state satisfies ``omega* = eps * sum_j f_ij(phi_j - phi_i -
psi_ij)`` for every vertex. The solver works in the quotient chart with
vertex 0 pinned to phase 0 (removing the rigid-rotation null direction) and
keeps the collective frequency omega* as an unknown, which squares the
system; for zero-lag odd couplings omega* converges to ~0 on its own.

``symmetric_equilibrium`` builds the highly symmetric states on complete
graphs: ``m`` evenly spaced blocks per constellation, constellations offset
by shifts delta_l, vertices ordered constellation-major then block-minor.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .coupling import wrap_angle
from .dynamics import phase_rhs
from .errors import BadShapeError, BadSpecError, EmptySetError, ValidationError

TWO_PI = 2.0 * math.pi


def residual(model, phi, omega_star):
    """Max-norm defect of the phase-locked equation at (phi, omega*)."""
    return float(np.max(np.abs(omega_star - phase_rhs(model, phi))))


def canonicalize(phi):
    """Rotate so vertex 0 sits at phase 0; wraps to [0, 2*pi)."""
    phi = np.asarray(phi, dtype=float)
    return wrap_angle(phi - phi[0])


def arc_diameter(phi, subset=None):
    """Length of the shortest closed circular arc containing the phases.

    Computed as 2*pi minus the largest gap between consecutive sorted
    phases. `subset` restricts to those vertices (default: all).
    """
    phi = np.asarray(phi, dtype=float)
    if subset is not None:
        idx = np.asarray(sorted(subset), dtype=int)
        if idx.size == 0:
            raise EmptySetError("subset must be nonempty")
        phi = phi[idx]
    if phi.size == 0:
        raise EmptySetError("need at least one phase")
    if phi.size == 1:
        return 0.0
    s = np.sort(wrap_angle(phi))
    gaps = np.diff(s)
    biggest = max(float(np.max(gaps)) if gaps.size else 0.0, float(TWO_PI - (s[-1] - s[0])))
    return float(TWO_PI - biggest)


@dataclass
class EquilibriumReport:
    phi: np.ndarray
    omega_star: float
    residual: float
    converged: bool
    iterations: int

    def to_json(self):
        return json.dumps(
            {
                "phi": [float(x) for x in self.phi],
                "omega_star": self.omega_star,
                "residual": self.residual,
                "converged": self.converged,
                "iterations": self.iterations,
            },
            indent=2,
        )


def _residual_vector(model, phi, omega_star):
    return omega_star - phase_rhs(model, phi)


def _jacobian(model, phi, omega_star):
    """Jacobian of the residual vector in unknowns (phi_1..phi_{N-1}, omega*)."""
    g = model.graph
    n = g.n
    jac = np.zeros((n, n))
    tails = g.tails()
    heads = g.heads()
    d = phi[heads] - phi[tails]
    for e in range(g.n_edges):
        f = model.couplings[e]
        lag = model.lags[e]
        i, j = tails[e], heads[e]
        # residual_i depends on f(phi_j - phi_i - lag); residual_j on f(-d - lag)
        du = float(f.deriv(d[e] - lag))
        dv = float(f.deriv(-d[e] - lag))
        jac[i, j] += -model.epsilon * du
        jac[i, i] += model.epsilon * du
        jac[j, i] += -model.epsilon * dv
        jac[j, j] += model.epsilon * dv
    # columns: unknowns phi_1..phi_{N-1} then omega*
    out = np.empty((n, n))
    out[:, : n - 1] = jac[:, 1:]
    out[:, n - 1] = 1.0
    return out


def find_equilibrium(model, phi0, tol=1e-12, max_iter=200):
    """Damped Newton search for a phase-locked state near phi0.

    Returns an EquilibriumReport with the canonical representative. When the
    Newton system is singular the step falls back to steepest descent on
    ||residual||^2. Non-convergence is reported, not raised.
    """
    if not (tol > 0):
        raise ValidationError("tol must be > 0")
    phi = canonicalize(phi0).astype(float)
    if phi.shape != (model.graph.n,):
        raise BadShapeError("phi0 must have length %d" % model.graph.n)
    omega_star = 0.0
    r = _residual_vector(model, phi, omega_star)
    best = float(np.max(np.abs(r)))
    it = 0
    def _armijo(step):
        # backtracking on the squared residual norm; None if nothing helps
        base = float(r @ r)
        alpha = 1.0
        for _ in range(40):
            phi_try = phi.copy()
            phi_try[1:] += alpha * step[: model.graph.n - 1]
            om_try = omega_star + alpha * step[-1]
            r_try = _residual_vector(model, phi_try, om_try)
            if float(r_try @ r_try) <= base * (1.0 - 1e-4 * alpha):
                return phi_try, om_try, r_try
            alpha *= 0.5
        return None

    for it in range(1, max_iter + 1):
        if best < tol:
            break
        jac = _jacobian(model, phi, omega_star)
        # Residual-scaled damping: equilibria come in connected families, so
        # the Jacobian turns rank-deficient along the family; the damping
        # suppresses steps in those flat directions (which would otherwise
        # wander along the family) and vanishes as the root is approached.
        mu = 0.1 * float(np.linalg.norm(r)) + 1e-14
        jtj = jac.T @ jac
        jtj[np.diag_indices_from(jtj)] += mu
        step = np.linalg.solve(jtj, -(jac.T @ r))
        accepted = _armijo(step)
        if accepted is None:
            accepted = _armijo(-(jac.T @ r))  # steepest descent on ||r||^2
        if accepted is None:
            break  # no acceptable step; report current best
        phi_try, om_try, r = accepted
        phi = wrap_angle(phi_try)
        omega_star = om_try
        best = float(np.max(np.abs(r)))
    converged = best < tol
    return EquilibriumReport(
        phi=canonicalize(phi),
        omega_star=float(omega_star),
        residual=best,
        converged=bool(converged),
        iterations=it,
    )


class IsotropySpec:
    """Symmetric-state recipe: m blocks per constellation, shifted copies.

    `block_sizes[l]` oscillators sit at each of the m evenly spaced block
    phases of constellation l, whose shift is `shifts[l]` (shift 0 for the
    first constellation, others strictly inside (0, 2*pi/m) and distinct).
    """

    def __init__(self, m, block_sizes, shifts=None):
        m = int(m)
        if m < 1:
            raise BadSpecError("m must be >= 1")
        sizes = tuple(int(k) for k in block_sizes)
        if not sizes or any(k < 1 for k in sizes):
            raise BadSpecError("block sizes must be positive")
        if shifts is None:
            if len(sizes) > 1:
                raise BadSpecError("multiple constellations need explicit shifts")
            shifts = (0.0,)
        deltas = tuple(float(s) for s in shifts)
        if len(deltas) != len(sizes):
            raise BadSpecError("need one shift per constellation")
        if deltas[0] != 0.0:
            raise BadSpecError("first shift must be 0")
        width = TWO_PI / m
        if any(not (0.0 <= d < width) for d in deltas):
            raise BadSpecError("shifts must lie in [0, 2*pi/m)")
        if len(set(deltas)) != len(deltas):
            raise BadSpecError("shifts must be distinct")
        self.m = m
        self.block_sizes = sizes
        self.shifts = deltas

    @property
    def n(self):
        return self.m * sum(self.block_sizes)


def symmetric_equilibrium(spec):
    """Phases of the symmetric state; constellation-major, block-minor order."""
    out = []
    for k, delta in zip(spec.block_sizes, spec.shifts):
        for j in range(spec.m):
            out.extend([delta + TWO_PI * j / spec.m] * k)
    return wrap_angle(np.array(out))
