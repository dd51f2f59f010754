"""Linear stability of phase-locked states and the cut-based certificate.

The linearization of the phase model around an equilibrium is
``A = -eps * B diag(w) B^T`` where ``B`` is the oriented incidence matrix
and ``w_e`` is the coupling derivative at the equilibrium edge difference.
For a vertex bipartition P with signed indicator x_P (+-1/2), the quadratic
form satisfies ``x_P^T A x_P = -eps * sum over cut edges of w_e``: a
negative cut sum therefore certifies a positive eigenvalue (instability).
The converse fails — the cut criterion is sufficient, not necessary.

Also here: the analytic certificates for the symmetric complete-graph
states (block-isolating cut for even cyclic order, adjacent-block arc cut
with the slope bound chain for odd order), the coupling-structure checks
they rely on, and a compact cyclic-Jacobi eigensolver so verdicts do not
depend on LAPACK internals.
"""

import math
from dataclasses import dataclass

import numpy as np

from .coupling import wrap_angle
from .dynamics import PhaseModel
from .equilibria import symmetric_equilibrium
from .errors import (
    BadShapeError,
    LaggedModelError,
    NotSymmetricError,
    NumericalError,
    PreconditionFailedError,
    TooLargeError,
    ValidationError,
)
from .graph import ENUMERATION_LIMIT, Partition, complete_graph, cut_edges

TWO_PI = 2.0 * math.pi


@dataclass
class Linearization:
    """A = -eps*B*diag(edge_weights)*B^T plus the data needed to reuse it."""

    matrix: np.ndarray
    edge_weights: np.ndarray
    graph: object
    epsilon: float
    lagged: bool


def linearize(model, phi_star):
    """Linearize the phase model at phi_star.

    Edge weights are the direction-averaged derivative
    ``(f'(d - psi) + f'(-d - psi)) / 2`` — identical to f'(d) for the odd
    zero-lag case, and the symmetric part of the true Jacobian otherwise
    (for block-symmetric states the symmetric part carries the real parts
    of the spectrum, which is what the verdict needs).
    """
    phi_star = np.asarray(phi_star, dtype=float)
    g = model.graph
    if phi_star.shape != (g.n,):
        raise BadShapeError("phi_star must have length %d" % g.n)
    tails = g.tails()
    heads = g.heads()
    d = phi_star[heads] - phi_star[tails]
    w = np.empty(g.n_edges)
    groups = {}
    for e, f in enumerate(model.couplings):
        groups.setdefault(id(f), (f, []))[1].append(e)
    for f, idx in groups.values():
        sel = np.asarray(idx, dtype=int)
        w[sel] = 0.5 * (
            np.asarray(f.deriv(d[sel] - model.lags[sel]), dtype=float)
            + np.asarray(f.deriv(-d[sel] - model.lags[sel]), dtype=float)
        )
    a = np.zeros((g.n, g.n))
    eps = model.epsilon
    np.add.at(a, (tails, heads), eps * w)
    np.add.at(a, (heads, tails), eps * w)
    np.add.at(a, (tails, tails), -eps * w)
    np.add.at(a, (heads, heads), -eps * w)
    return Linearization(
        matrix=a,
        edge_weights=w,
        graph=g,
        epsilon=eps,
        lagged=bool(np.any(model.lags != 0.0)),
    )


def symmetric_eigenvalues(matrix, tol=1e-12, max_sweeps=100):
    """All eigenvalues of a symmetric matrix, ascending (cyclic Jacobi).

    Sweeps Givens rotations over the upper triangle until the off-diagonal
    Frobenius norm falls below ``tol * max(1, ||M||_F)``.
    """
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise BadShapeError("matrix must be square")
    n = m.shape[0]
    scale = max(1.0, float(np.linalg.norm(m)))
    if float(np.max(np.abs(m - m.T))) > 1e-10 * scale:
        raise NotSymmetricError("matrix is not symmetric within 1e-10")
    m = 0.5 * (m + m.T)
    if n == 1:
        return np.array([m[0, 0]])
    for _ in range(max_sweeps):
        # Sum off-diagonal squares directly: subtracting the diagonal part
        # from ||M||_F^2 would cancel catastrophically once nearly converged.
        strict = m - np.diag(np.diag(m))
        off = float(np.linalg.norm(strict))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (m[q, q] - m[p, p]) / apq
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rp = m[p, :].copy()
                rq = m[q, :].copy()
                m[p, :] = c * rp - s * rq
                m[q, :] = s * rp + c * rq
                cp = m[:, p].copy()
                cq = m[:, q].copy()
                m[:, p] = c * cp - s * cq
                m[:, q] = s * cp + c * cq
                m[p, q] = 0.0
                m[q, p] = 0.0
    else:
        raise NumericalError("eigensolver failed to converge in %d sweeps" % max_sweeps)
    return np.sort(np.diag(m))


def _flow_complement_basis(n):
    """Orthonormal basis of the hyperplane orthogonal to the all-ones vector."""
    h = np.zeros((n - 1, n))
    for k in range(1, n):
        h[k - 1, :k] = 1.0
        h[k - 1, k] = -float(k)
        h[k - 1] /= math.sqrt(k * (k + 1.0))
    return h


@dataclass
class StabilityVerdict:
    verdict: str  # "Stable" | "Unstable" | "Marginal"
    max_nonflow_eigenvalue: float
    eigenvalues: np.ndarray
    certificate: tuple | None = None  # (Partition, cut sum) when one is attached


def classify(lin, tol=None):
    """Stability verdict from the nonflow spectrum of the linearization.

    The structural zero eigenvalue along the all-ones direction is removed
    by projecting onto its orthogonal complement, so physically meaningful
    near-zero eigenvalues are kept and judged against the marginal band
    (default 1e-9 * ||A||).
    """
    if lin.lagged:
        raise LaggedModelError("classify requires a zero-lag model")
    a = lin.matrix
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))
    if float(np.max(np.abs(a - a.T))) > 1e-10 * scale:
        raise NotSymmetricError("linearization matrix is not symmetric")
    if tol is None:
        tol = 1e-9 * scale
    if n == 1:
        return StabilityVerdict("Marginal", 0.0, np.zeros(0))
    h = _flow_complement_basis(n)
    reduced = h @ a @ h.T
    eigs = symmetric_eigenvalues(reduced)
    top = float(eigs[-1])
    if top > tol:
        verdict = "Unstable"
    elif top < -tol:
        verdict = "Stable"
    else:
        verdict = "Marginal"
    return StabilityVerdict(verdict, top, eigs)


def cut_sum(lin, partition):
    """Sum of edge weights across the cut; negative certifies instability."""
    total = 0.0
    for e, _sign in cut_edges(lin.graph, partition):
        total += float(lin.edge_weights[e])
    return total


def _scan_exhaustive(lin):
    g = lin.graph
    n = g.n
    if n > ENUMERATION_LIMIT:
        raise TooLargeError("exhaustive scan needs n <= %d" % ENUMERATION_LIMIT)
    tails = g.tails().astype(np.int64)
    heads = g.heads().astype(np.int64)
    w = lin.edge_weights
    # vertex 0 pinned to V-: masks encode vertices 1..n-1
    shift_t = np.where(tails == 0, 0, tails - 1)
    shift_h = np.where(heads == 0, 0, heads - 1)
    zero_t = tails == 0
    zero_h = heads == 0
    best_val = math.inf
    best_mask = 0
    total = (1 << (n - 1)) - 1
    chunk = 1 << 16
    for lo in range(1, total + 1, chunk):
        ms = np.arange(lo, min(lo + chunk, total + 1), dtype=np.int64)
        side_t = np.where(zero_t[None, :], 0, (ms[:, None] >> shift_t[None, :]) & 1)
        side_h = np.where(zero_h[None, :], 0, (ms[:, None] >> shift_h[None, :]) & 1)
        vals = ((side_t != side_h) * w[None, :]).sum(axis=1)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_mask = int(ms[k])
    return Partition(n=n, mask=best_mask << 1), best_val


def _scan_heuristic(lin, restarts, seed):
    g = lin.graph
    n = g.n
    w = lin.edge_weights
    tails = g.tails()
    heads = g.heads()
    incident = [[] for _ in range(n)]
    for e in range(g.n_edges):
        incident[tails[e]].append(e)
        incident[heads[e]].append(e)
    best_val = math.inf
    best_side = None
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed))
    for _ in range(restarts):
        side = rng.integers(0, 2, n).astype(np.int64)
        side[0] = 0
        if not side.any():
            side[1 + int(rng.integers(0, n - 1))] = 1
        cut = side[tails] != side[heads]
        val = float(w[cut].sum())
        improved = True
        while improved:
            improved = False
            best_delta = -1e-12
            best_v = -1
            for v in range(1, n):
                delta = 0.0
                for e in incident[v]:
                    delta += w[e] if not cut[e] else -w[e]
                flipped = side.copy()
                flipped[v] ^= 1
                if not flipped[1:].any():
                    continue  # would empty V+
                if delta < best_delta:
                    best_delta = delta
                    best_v = v
            if best_v >= 0:
                side[best_v] ^= 1
                for e in incident[best_v]:
                    cut[e] = ~cut[e]
                val += best_delta
                improved = True
        val = float(w[side[tails] != side[heads]].sum())
        if val < best_val:
            best_val = val
            best_side = side.copy()
    mask = 0
    for v in range(n):
        if best_side[v]:
            mask |= 1 << v
    return Partition(n=n, mask=mask), best_val


def min_cut_scan(lin, mode="exhaustive", restarts=32, seed=0):
    """Minimum cut-weight partition.

    ``exhaustive`` enumerates every proper bipartition (vertex 0 pinned to
    V-, n <= 25); ``heuristic`` runs a seeded greedy single-vertex-flip local
    search with restarts and returns the best found — an upper bound on the
    true minimum.
    """
    if lin.graph.n < 2:
        raise BadShapeError("need at least two vertices")
    if mode == "exhaustive":
        return _scan_exhaustive(lin)
    if mode == "heuristic":
        return _scan_heuristic(lin, int(restarts), seed)
    raise ValidationError("mode must be 'exhaustive' or 'heuristic'")


# --- the six-oscillator twist family ----------------------------------------


def twisted_state(n, winding=1):
    """Phases wound `winding` times around the circle: 2*pi*w*i/n."""
    return wrap_angle(TWO_PI * winding * np.arange(n) / n)


def twist_surface_phases(lam1, lam2):
    """Member (lam1, lam2) of the two-parameter twist family on six vertices."""
    base = twisted_state(6, 1)
    out = base.copy()
    out[1] += lam1
    out[4] += lam1
    out[2] += lam2
    out[5] += lam2
    return wrap_angle(out)


def min_cut_surface(model, grid=41, threads=1):
    """Exhaustive min-cut value over the twist family on a (grid x grid) mesh.

    Returns (lambda values, value matrix) with values[i, j] the minimum cut
    at (lam1=lams[i], lam2=lams[j]). Grid cells are independent; `threads`
    only batches the rows.
    """
    if model.graph.n != 6:
        raise BadShapeError("the twist family lives on six vertices")
    lams = np.linspace(-math.pi, math.pi, int(grid))
    values = np.empty((lams.size, lams.size))

    def _row(i):
        for j in range(lams.size):
            lin = linearize(model, twist_surface_phases(lams[i], lams[j]))
            values[i, j] = min_cut_scan(lin)[1]

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            list(pool.map(_row, range(lams.size)))
    else:
        for i in range(lams.size):
            _row(i)
    return lams, values


# --- symmetric complete-graph states: sums, structure, certificates ---------


def constellation_sum(f, m, delta):
    """Sum of f over one constellation: sum_j f(2*pi*j/m + delta)."""
    delta = np.asarray(delta, dtype=float)
    j = np.arange(int(m))
    return np.asarray(f.eval(TWO_PI * j / m + delta[..., None])).sum(axis=-1)


def constellation_sum_deriv(f, m, delta):
    """Same sum with f' in place of f."""
    delta = np.asarray(delta, dtype=float)
    j = np.arange(int(m))
    return np.asarray(f.deriv(TWO_PI * j / m + delta[..., None])).sum(axis=-1)


@dataclass
class StructureReport:
    odd: bool
    even_about_half_pi: bool
    concave_on_0_pi: bool
    deriv_concave_on_half_band: bool
    half_slope_ok: bool  # f'(pi/m) > f'(0)/2 for m in 4..64, when flags hold


def check_structure(f, grid=2048, tol=1e-8):
    """Grid-sampled structure flags used by the analytic certificates."""
    theta = TWO_PI * np.arange(grid) / grid
    vals = np.asarray(f.eval(theta), dtype=float)
    scale = max(1.0, float(np.max(np.abs(vals))))
    mirrored = np.asarray(f.eval(-theta), dtype=float)
    odd = float(np.max(np.abs(vals + mirrored))) <= tol * scale

    t = np.linspace(0.0, math.pi, 1025)
    a = np.asarray(f.eval(t), dtype=float)
    b = np.asarray(f.eval(math.pi - t), dtype=float)
    even_half = float(np.max(np.abs(a - b))) <= tol * scale

    second = a[:-2] - 2.0 * a[1:-1] + a[2:]
    concave = float(np.max(second)) <= tol * scale

    th = np.linspace(-math.pi / 2, math.pi / 2, 1025)
    dv = np.asarray(f.deriv(th), dtype=float)
    second_d = dv[:-2] - 2.0 * dv[1:-1] + dv[2:]
    dconcave = float(np.max(second_d)) <= tol * scale

    half_ok = True
    if concave and dconcave:
        d0 = float(f.deriv(0.0))
        for m in range(4, 65):
            if not (float(f.deriv(math.pi / m)) > 0.5 * d0):
                half_ok = False
                break
    return StructureReport(
        odd=bool(odd),
        even_about_half_pi=bool(even_half),
        concave_on_0_pi=bool(concave),
        deriv_concave_on_half_band=bool(dconcave),
        half_slope_ok=bool(half_ok),
    )


def _block_slices(spec):
    """Vertex index ranges per (constellation, block), matching state order."""
    out = []
    offset = 0
    for k in spec.block_sizes:
        blocks = []
        for _ in range(spec.m):
            blocks.append(range(offset, offset + k))
            offset += k
        out.append(blocks)
    return out


def even_order_cut_certificate(spec, f):
    """Block-isolating cut for even cyclic order m on the complete graph.

    Isolates block 0 of the first constellation; the raw cut sum equals
    -k0^2 * f'(0) when the constellation derivative sums cancel, which the
    preconditions (odd f, even about pi/2, even m) guarantee.
    Returns (partition, raw cut sum).
    """
    if spec.m % 2 != 0:
        raise PreconditionFailedError("cyclic order m must be even")
    rep = check_structure(f)
    if not (rep.odd and rep.even_about_half_pi):
        raise PreconditionFailedError("coupling must be odd and even about pi/2")
    blocks = _block_slices(spec)
    plus = list(blocks[0][0])
    part = Partition.from_side(spec.n, plus)
    model = PhaseModel(complete_graph(spec.n), f, epsilon=1.0)
    lin = linearize(model, symmetric_equilibrium(spec))
    return part, cut_sum(lin, part)


def adjacent_block_cut_bound(f, m, delta):
    """Upper bound on one constellation pair's arc-cut contribution.

    Evaluates ``2*g'_m(delta) - f'(delta + 2*pi/m) - 2*f'(delta) -
    f'(delta - 2*pi/m)`` where g'_m is the constellation derivative sum.
    Negative values (for every pair) drive the odd-order certificate.
    """
    delta = np.asarray(delta, dtype=float)
    step = TWO_PI / m
    return (
        2.0 * constellation_sum_deriv(f, m, delta)
        - np.asarray(f.deriv(delta + step))
        - 2.0 * np.asarray(f.deriv(delta))
        - np.asarray(f.deriv(delta - step))
    )


@dataclass
class ArcCutBoundReport:
    pair_deltas: list  # (l1, l2, shift difference) per ordered constellation pair
    pair_values: list  # bound at each pair's shift difference
    grid_deltas: np.ndarray
    grid_values: np.ndarray  # bound on the [0, 2*pi/m] grid
    terminal_value: float  # f'(0) - 2*f'(pi/m)


def odd_order_cut_certificate(spec, f, grid=257):
    """Adjacent-block arc cut for odd cyclic order m >= 7 on the complete graph.

    The cut side S takes the first two blocks of every constellation (an arc
    of diameter below 4*pi/m). Returns (partition, raw cut sum, bound report);
    the report carries the per-pair slope bound at the actual shift
    differences, its sweep over [0, 2*pi/m], and the terminal bound
    f'(0) - 2*f'(pi/m).
    """
    if spec.m % 2 == 0 or spec.m < 7:
        raise PreconditionFailedError("cyclic order m must be odd and >= 7")
    rep = check_structure(f)
    if not (rep.odd and rep.concave_on_0_pi and rep.deriv_concave_on_half_band):
        raise PreconditionFailedError(
            "coupling must be odd, concave on [0, pi], with f' concave on [-pi/2, pi/2]"
        )
    blocks = _block_slices(spec)
    plus = []
    for const_blocks in blocks:
        plus.extend(const_blocks[0])
        plus.extend(const_blocks[1])
    part = Partition.from_side(spec.n, plus)
    model = PhaseModel(complete_graph(spec.n), f, epsilon=1.0)
    lin = linearize(model, symmetric_equilibrium(spec))
    raw = cut_sum(lin, part)

    pair_deltas = []
    pair_values = []
    nc = len(spec.shifts)
    for l1 in range(nc):
        for l2 in range(nc):
            dlt = spec.shifts[l2] - spec.shifts[l1]
            dlt = dlt % (TWO_PI / spec.m)
            pair_deltas.append((l1, l2, float(dlt)))
            pair_values.append(float(adjacent_block_cut_bound(f, spec.m, dlt)))
    grid_d = np.linspace(0.0, TWO_PI / spec.m, int(grid))
    grid_v = adjacent_block_cut_bound(f, spec.m, grid_d)
    terminal = float(f.deriv(0.0)) - 2.0 * float(f.deriv(math.pi / spec.m))
    report = ArcCutBoundReport(
        pair_deltas=pair_deltas,
        pair_values=pair_values,
        grid_deltas=grid_d,
        grid_values=np.asarray(grid_v, dtype=float),
        terminal_value=terminal,
    )
    return part, raw, report
