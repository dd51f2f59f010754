"""Pairwise coupling functions and delay distributions.

Three coupling families are supported:

* ``SineCoupling(gain)`` — the classical Kuramoto interaction ``K sin(theta)``.
* ``BandedCoupling(band, amplitude)`` — an odd, C^1, 2*pi-periodic coupling
  whose derivative is positive only within ``band`` of the origin: it rises as
  ``A sin(pi theta / (2 b))`` on ``[0, b]``, falls as a half-cosine back to 0
  at ``pi``, and is extended by oddness. Narrow bands make the in-phase state
  the only stable equilibrium on connected graphs.
* ``TabulatedCoupling(values)`` — M uniform samples on ``[0, 2*pi)``;
  evaluation between nodes uses the trigonometric (Fourier) interpolant, and
  derivatives/antiderivatives are spectral.

A ``DelayDistribution`` is a probability law for pairwise phase lags on
``[0, inf)``.  ``convolve_delay`` turns a coupling plus a delay law into the
effective coupling ``H(theta) = integral f(theta - psi) g(psi) dpsi`` by
circular convolution of f's grid samples with the lag density wrapped onto
``[0, 2*pi)``; for ``f = K sin`` this reproduces the closed form
``K C sin(theta - xi)`` where ``C e^{i xi}`` is the circular mean of
``e^{i psi}`` under g.

``PulseResponse`` packages the phase-jump map of a pulse-coupled oscillator;
``response_from_coupling``/``coupling_from_response`` are the exact inverse
pair ``curve(theta) = (2 pi / omega) f(-theta)`` and
``f(theta) = (omega / 2 pi) curve(-theta)``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _sciint
from scipy import special as _special

from .errors import BadShapeError

TWO_PI = 2.0 * math.pi

# kernel kind tags shared with phaselock._kernels
KIND_SINE = 0
KIND_BANDED = 1
KIND_TABLE = 2

_DENSE_TABLE_SIZE = 16384  # linear-interpolation tables used inside the integrators


def wrap_angle(theta):
    """Map angles to [0, 2*pi). Works on scalars and arrays."""
    out = np.fmod(theta, TWO_PI)
    return np.where(out < 0, out + TWO_PI, out)


class CouplingFunction:
    """Common interface: a smooth 2*pi-periodic scalar interaction."""

    kind = None

    def eval(self, theta):
        raise NotImplementedError

    def deriv(self, theta):
        raise NotImplementedError

    def antideriv(self, theta):
        """Integral of the coupling from 0 to theta (used by potentials)."""
        raise NotImplementedError

    def is_odd(self, tol=1e-9):
        raise NotImplementedError

    def __call__(self, theta):
        return self.eval(theta)

    def as_kernel(self):
        """(kind, a, b, dense_table_or_None) consumed by the integrator backends."""
        raise NotImplementedError


@dataclass(frozen=True)
class SineCoupling(CouplingFunction):
    gain: float = 1.0

    kind = "sine"

    def eval(self, theta):
        return self.gain * np.sin(theta)

    def deriv(self, theta):
        return self.gain * np.cos(theta)

    def antideriv(self, theta):
        return self.gain * (1.0 - np.cos(theta))

    def is_odd(self, tol=1e-9):
        return True

    def as_kernel(self):
        return (KIND_SINE, float(self.gain), 0.0, None)


@dataclass(frozen=True)
class BandedCoupling(CouplingFunction):
    """Odd coupling attractive only within ``band`` of the in-phase point.

    On [0, band]:  amplitude * sin(pi theta / (2 band))       (rising to A)
    On [band, pi]: amplitude * cos(pi (theta-band) / (2 (pi-band)))  (falling to 0)
    and odd around 0. C^1 at the knots by construction. The amplitude may be
    negative internally (used by the pulse-response maps); `make_banded`
    enforces the positive-amplitude family.
    """

    band: float
    amplitude: float = 1.0

    kind = "fb"

    def __post_init__(self):
        if not (0.0 < self.band < math.pi):
            raise BadShapeError("band must lie strictly inside (0, pi), got %r" % (self.band,))

    def _half(self, t):
        # value on [0, pi]
        b, a = self.band, self.amplitude
        rising = a * np.sin(0.5 * math.pi * t / b)
        falling = a * np.cos(0.5 * math.pi * (t - b) / (math.pi - b))
        return np.where(t <= b, rising, falling)

    def _half_deriv(self, t):
        b, a = self.band, self.amplitude
        rising = a * (0.5 * math.pi / b) * np.cos(0.5 * math.pi * t / b)
        falling = -a * (0.5 * math.pi / (math.pi - b)) * np.sin(0.5 * math.pi * (t - b) / (math.pi - b))
        return np.where(t <= b, rising, falling)

    def _half_anti(self, t):
        # integral from 0 on [0, pi]
        b, a = self.band, self.amplitude
        rising = a * (2.0 * b / math.pi) * (1.0 - np.cos(0.5 * math.pi * t / b))
        at_b = a * (2.0 * b / math.pi)
        falling = at_b + a * (2.0 * (math.pi - b) / math.pi) * np.sin(
            0.5 * math.pi * (t - b) / (math.pi - b)
        )
        return np.where(t <= b, rising, falling)

    def eval(self, theta):
        t = wrap_angle(theta)
        refl = np.minimum(t, TWO_PI - t)  # distance to 0 along the circle
        sign = np.where(t <= math.pi, 1.0, -1.0)
        return sign * self._half(refl)

    def deriv(self, theta):
        t = wrap_angle(theta)
        refl = np.minimum(t, TWO_PI - t)
        return self._half_deriv(refl)  # derivative is even

    def antideriv(self, theta):
        t = wrap_angle(theta)
        refl = np.minimum(t, TWO_PI - t)
        return self._half_anti(refl)  # antiderivative of an odd function is even

    def is_odd(self, tol=1e-9):
        return True

    def as_kernel(self):
        return (KIND_BANDED, float(self.amplitude), float(self.band), None)


def make_banded(band, amplitude=1.0):
    """Validated constructor for the positive-amplitude banded family."""
    if not (0.0 < band < math.pi):
        raise BadShapeError("band must lie strictly inside (0, pi), got %r" % (band,))
    if amplitude <= 0.0:
        raise BadShapeError("amplitude must be positive, got %r" % (amplitude,))
    return BandedCoupling(band=float(band), amplitude=float(amplitude))


def _is_power_of_two(m):
    return m >= 1 and (m & (m - 1)) == 0


class TabulatedCoupling(CouplingFunction):
    """A coupling given by M uniform samples at theta_k = 2*pi*k/M.

    M must be a power of two >= 256 so the spectral operations stay cheap and
    well conditioned. Off-grid evaluation uses the standard real trigonometric
    interpolant (Nyquist term as a pure cosine).
    """

    kind = "tabulated"

    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1:
            raise ValueError("tabulated coupling needs a 1-d sample vector")
        m = values.shape[0]
        if not _is_power_of_two(m) or m < 256:
            raise ValueError("sample count must be a power of two >= 256, got %d" % m)
        if not np.all(np.isfinite(values)):
            raise ValueError("tabulated coupling contains non-finite samples")
        self.values = values
        self.m = m
        c = np.fft.rfft(values)
        w = np.full(c.shape[0], 2.0)
        w[0] = 1.0
        w[-1] = 1.0  # Nyquist (m even by construction)
        self._wc = (w * c) / m  # weighted coefficients for series evaluation
        self._ks = np.arange(c.shape[0])

    @property
    def grid(self):
        return TWO_PI * np.arange(self.m) / self.m

    def _series(self, theta, coeff):
        theta = np.asarray(theta, dtype=float)
        flat = np.ravel(theta)
        out = np.empty(flat.shape[0])
        # chunked so P x (M/2+1) matrices stay small
        step = 2048
        for lo in range(0, flat.shape[0], step):
            block = flat[lo : lo + step]
            phases = np.exp(1j * np.outer(block, self._ks))
            out[lo : lo + step] = (phases @ coeff).real
        return out.reshape(theta.shape) if theta.shape else out[0]

    def eval(self, theta):
        return self._series(theta, self._wc)

    def deriv(self, theta):
        return self._series(theta, 1j * self._ks * self._wc)

    def antideriv(self, theta):
        theta = np.asarray(theta, dtype=float)
        mean = self._wc[0].real
        coeff = np.zeros_like(self._wc)
        coeff[1:] = self._wc[1:] / (1j * self._ks[1:])
        # integral of the oscillatory part from 0, plus the mean ramp
        osc = self._series(theta, coeff) - np.sum(coeff).real
        return mean * theta + osc

    def is_odd(self, tol=1e-9):
        scale = max(1.0, float(np.max(np.abs(self.values))))
        mirrored = self.values[(-np.arange(self.m)) % self.m]
        return bool(np.max(np.abs(self.values + mirrored)) <= tol * scale)

    def dense_table(self, size=_DENSE_TABLE_SIZE):
        """Exact trig-interpolant samples on a finer grid (for the integrators)."""
        size = max(size, self.m)
        if size == self.m:
            return self.values.copy()
        c = np.fft.rfft(self.values)
        pad = np.zeros(size // 2 + 1, dtype=complex)
        pad[: self.m // 2] = c[: self.m // 2]
        pad[self.m // 2] = 0.5 * c[self.m // 2]  # former Nyquist bin, now interior
        return np.fft.irfft(pad, size) * (size / self.m)

    def as_kernel(self):
        return (KIND_TABLE, 0.0, 0.0, self.dense_table())


def tabulate(f, m=1024):
    """Sample a coupling (or plain callable) into a TabulatedCoupling."""
    grid = TWO_PI * np.arange(m) / m
    values = f.eval(grid) if isinstance(f, CouplingFunction) else f(grid)
    return TabulatedCoupling(np.asarray(values, dtype=float))


def _reflect_scale(f, s):
    """The coupling s * f(-theta), staying inside the same family."""
    if isinstance(f, SineCoupling):
        return SineCoupling(gain=-s * f.gain)
    if isinstance(f, BandedCoupling):
        return BandedCoupling(band=f.band, amplitude=-s * f.amplitude)
    if isinstance(f, TabulatedCoupling):
        rev = f.values[(-np.arange(f.m)) % f.m]
        return TabulatedCoupling(s * rev)
    raise TypeError("unsupported coupling type %r" % type(f).__name__)


# --- coupling sample files ---------------------------------------------------
#
# Format: one "theta value" pair per line on the uniform grid theta_k = 2*pi*k/M,
# '#' comments allowed.

def read_coupling_file(path):
    thetas = []
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError("coupling lines must be 'theta value', got %r" % raw.strip())
            thetas.append(float(parts[0]))
            vals.append(float(parts[1]))
    m = len(thetas)
    if m == 0:
        raise ValueError("empty coupling file %s" % path)
    expected = TWO_PI * np.arange(m) / m
    if np.max(np.abs(np.asarray(thetas) - expected)) > 1e-9:
        raise ValueError("coupling samples must sit on the uniform grid 2*pi*k/M")
    return TabulatedCoupling(np.asarray(vals))


def write_coupling_file(f, path):
    tab = f if isinstance(f, TabulatedCoupling) else tabulate(f)
    with open(path, "w", encoding="utf-8") as fh:
        for theta, v in zip(tab.grid, tab.values):
            fh.write("%.17g %.17g\n" % (theta, v))


# --- pulse responses ---------------------------------------------------------

@dataclass(frozen=True)
class PulseResponse:
    """Phase-jump map of a pulse-coupled oscillator.

    ``curve`` is the 2*pi-periodic map applied at pulse arrival
    (theta += eps * curve(theta)); ``omega`` is the natural frequency in
    rad/s that ties pulse timing to phase.
    """

    curve: CouplingFunction
    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")


def response_from_coupling(f, omega):
    """Exact map: curve(theta) = (2*pi/omega) * f(-theta)."""
    return PulseResponse(curve=_reflect_scale(f, TWO_PI / omega), omega=float(omega))


def coupling_from_response(resp, m=1024):
    """Inverse map, tabulated: f(theta) = (omega / 2*pi) * curve(-theta)."""
    back = _reflect_scale(resp.curve, resp.omega / TWO_PI)
    return tabulate(back, m=m)


# --- delay distributions ------------------------------------------------------

def _norm_cdf(x):
    return 0.5 * (1.0 + _special.erf(x / math.sqrt(2.0)))


class DelayDistribution:
    """A probability law for phase lags psi >= 0 (radians)."""

    kind = None

    def order_parameter(self):
        """(C, xi) with C e^{i xi} = E[e^{i psi}], xi in [0, 2*pi)."""
        z = self._circular_mean()
        return float(np.abs(z)), float(wrap_angle(np.angle(z)))

    def _circular_mean(self):
        raise NotImplementedError

    def wrapped_masses(self, m):
        """Probability mass assigned to each node of an m-point grid on [0, 2*pi).

        Cell j covers [theta_j - pi/m, theta_j + pi/m), accumulated over every
        wrap of the positive half-line; atoms are split linearly between the
        two neighboring nodes so the circular mean is second-order accurate.
        """
        raise NotImplementedError

    def sample(self, rng, size):
        raise NotImplementedError

    # helpers shared by the continuous laws -------------------------------
    def _masses_from_cdf(self, m, cdf, support_max):
        delta = TWO_PI / m
        centers = delta * np.arange(m)
        wraps = int(math.ceil((support_max + delta) / TWO_PI)) + 1
        masses = np.zeros(m)
        for k in range(wraps):
            lo = centers - 0.5 * delta + TWO_PI * k
            hi = centers + 0.5 * delta + TWO_PI * k
            masses += cdf(hi) - cdf(lo)
        return masses


def _atom_masses(m, positions, weights):
    """Linear (cloud-in-cell) assignment of point masses to grid nodes."""
    delta = TWO_PI / m
    masses = np.zeros(m)
    x = wrap_angle(np.asarray(positions, dtype=float)) / delta
    i0 = np.floor(x).astype(int) % m
    frac = x - np.floor(x)
    np.add.at(masses, i0, np.asarray(weights) * (1.0 - frac))
    np.add.at(masses, (i0 + 1) % m, np.asarray(weights) * frac)
    return masses


@dataclass(frozen=True)
class PointDelay(DelayDistribution):
    psi0: float = 0.0

    kind = "point"

    def __post_init__(self):
        if self.psi0 < 0:
            raise ValueError("delays live on [0, inf), got %r" % (self.psi0,))

    def _circular_mean(self):
        return np.exp(1j * self.psi0)

    def wrapped_masses(self, m):
        return _atom_masses(m, [self.psi0], [1.0])

    def sample(self, rng, size):
        return np.full(size, float(self.psi0))


@dataclass(frozen=True)
class UniformDelay(DelayDistribution):
    """Uniform on [mu - w, mu + w]; the support must stay inside [0, inf)."""

    mu: float
    w: float

    kind = "uniform"

    def __post_init__(self):
        if self.w <= 0:
            raise ValueError("half-width w must be positive")
        if self.mu - self.w < 0:
            raise ValueError("uniform support dips below 0 (mu=%g, w=%g)" % (self.mu, self.w))

    def _circular_mean(self):
        return np.exp(1j * self.mu) * (math.sin(self.w) / self.w)

    def _cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - (self.mu - self.w)) / (2.0 * self.w), 0.0, 1.0)

    def wrapped_masses(self, m):
        return self._masses_from_cdf(m, self._cdf, self.mu + self.w)

    def sample(self, rng, size):
        return rng.uniform(self.mu - self.w, self.mu + self.w, size=size)

    @property
    def std(self):
        return self.w / math.sqrt(3.0)


@dataclass(frozen=True)
class GaussianDelay(DelayDistribution):
    """Normal(mu, sigma) truncated to [0, inf) and renormalized."""

    mu: float
    sigma: float

    kind = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")

    def _norm(self):
        return 1.0 - _norm_cdf(-self.mu / self.sigma)

    def _circular_mean(self):
        if self.sigma <= self.mu / 4.0:
            # truncation mass is below ~3e-5; the untruncated closed form holds
            # far beyond the accuracy anyone needs here
            return math.exp(-0.5 * self.sigma**2) * np.exp(1j * self.mu)
        hi = self.mu + 12.0 * self.sigma
        z = self._norm()

        def density(psi):
            return math.exp(-0.5 * ((psi - self.mu) / self.sigma) ** 2) / (
                self.sigma * math.sqrt(TWO_PI) * z
            )

        re, _ = _sciint.quad(lambda p: math.cos(p) * density(p), 0.0, hi, limit=400)
        im, _ = _sciint.quad(lambda p: math.sin(p) * density(p), 0.0, hi, limit=400)
        return re + 1j * im

    def _cdf(self, x):
        x = np.asarray(x, dtype=float)
        raw = _norm_cdf((x - self.mu) / self.sigma) - _norm_cdf(-self.mu / self.sigma)
        return np.clip(raw, 0.0, None) / self._norm()

    def wrapped_masses(self, m):
        return self._masses_from_cdf(m, self._cdf, self.mu + 12.0 * self.sigma)

    def sample(self, rng, size):
        lo = _norm_cdf(-self.mu / self.sigma)
        u = rng.uniform(0.0, 1.0, size=size)
        p = lo + u * (1.0 - lo)
        return self.mu + self.sigma * math.sqrt(2.0) * _special.erfinv(2.0 * p - 1.0)


class EmpiricalDelay(DelayDistribution):
    """The empirical law of a fixed sample of lags."""

    kind = "empirical"

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 1 or samples.shape[0] == 0:
            raise ValueError("need a nonempty 1-d sample vector")
        if np.any(samples < 0):
            raise ValueError("delays live on [0, inf)")
        self.samples = samples

    def _circular_mean(self):
        return np.mean(np.exp(1j * self.samples))

    def wrapped_masses(self, m):
        w = np.full(self.samples.shape[0], 1.0 / self.samples.shape[0])
        return _atom_masses(m, self.samples, w)

    def sample(self, rng, size):
        return rng.choice(self.samples, size=size, replace=True)


def order_parameter_of_delays(g):
    """(C, xi) such that E[e^{i psi}] = C e^{i xi} under the delay law g."""
    return g.order_parameter()


def convolve_delay(f, g, m=4096):
    """Effective coupling H = f * g on an m-point grid (m a power of two >= 256).

    H(theta) = integral_0^inf f(theta - psi) g(psi) dpsi, computed as the
    circular convolution of f's grid samples with g's wrapped node masses.
    """
    if not _is_power_of_two(m) or m < 256:
        raise ValueError("grid size must be a power of two >= 256, got %d" % m)
    grid = TWO_PI * np.arange(m) / m
    if isinstance(f, TabulatedCoupling) and f.m <= m:
        fv = f.dense_table(m)  # same trig interpolant as eval, one FFT
    else:
        fv = np.asarray(f.eval(grid), dtype=float)
    masses = g.wrapped_masses(m)
    total = masses.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError("wrapped delay mass sums to %.12g, expected 1" % total)
    hv = np.fft.irfft(np.fft.rfft(fv) * np.fft.rfft(masses), m)
    return TabulatedCoupling(hv)
