"""Independent reference implementations used to cross-check the library.

Everything here is deliberately written the slow, obvious way — these are
oracles, not production code.
"""

import numpy as np


def char_poly_eigenvalues(a):
    """Eigenvalues via Faddeev-LeVerrier characteristic coefficients + roots.

    Exercises a completely different algorithm than the Jacobi sweeps in the
    library: build det(lambda*I - A) coefficient by coefficient, then find
    the polynomial's roots. Fine for the small matrices used in tests.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -(a @ m).trace() / k
    roots = np.roots(coeffs)
    return np.sort(roots.real)


def brute_min_cut(lin):
    """Minimum cut weight over every proper bipartition, by direct summation."""
    g = lin.graph
    best = np.inf
    for mask in range(1, (1 << g.n) - 1):
        total = 0.0
        for e, (i, j) in enumerate(g.edges):
            if ((mask >> i) & 1) != ((mask >> j) & 1):
                total += lin.edge_weights[e]
        best = min(best, total)
    return best


def quadratic_cut(lin, partition):
    """Cut weight via the quadratic form -(1/eps) * x^T A x with x = +-1/2."""
    x = partition.indicator()
    return float(-(x @ lin.matrix @ x) / lin.epsilon)


def numeric_deriv(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def rhs_jacobian_fd(model, phi, h=1e-7):
    """Finite-difference Jacobian of the phase right-hand side."""
    from phaselock import phase_rhs

    n = phi.shape[0]
    jac = np.zeros((n, n))
    for j in range(n):
        up = phi.copy()
        dn = phi.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (phase_rhs(model, up) - phase_rhs(model, dn)) / (2.0 * h)
    return jac
