"""Pure-NumPy/Python reference kernels.

These are the fallback implementations of the two hot loops:

* ``integrate_phase`` — fixed-step classical RK4 for the pairwise-coupled
  phase model in the rotating frame.
* ``run_pulse`` — event-driven simulation of pulse-coupled oscillators with
  per-edge transmission delays.

The compiled backend (``phaselock._kernels._core``) implements the same
functions with the same signatures and the same arithmetic ordering, so the
two backends agree to floating-point roundoff. Keep any change here in sync
with the .pyx file.

Couplings arrive pre-compiled as per-edge arrays: ``kinds`` (0 = gain*sin,
1 = banded, 2 = dense lookup table with linear interpolation), scalar
parameters ``pa``/``pb``, and for kind 2 a row index into ``tables`` whose
rows hold ``md + 1`` samples (the first sample repeated at the end so the
interpolation never wraps an index).
"""

import heapq
import math

import numpy as np

TWO_PI = 2.0 * math.pi


def _wrap_array(phi):
    out = np.fmod(phi, TWO_PI)
    out[out < 0] += TWO_PI
    return out


def _eval_group(kind, a, b, rows, theta):
    """Vectorized per-kind coupling evaluation; `rows` only used for kind 2."""
    if kind == 0:
        return a * np.sin(theta)
    if kind == 1:
        t = np.fmod(theta, TWO_PI)
        t[t < 0] += TWO_PI
        refl = np.minimum(t, TWO_PI - t)
        sign = np.where(t <= math.pi, 1.0, -1.0)
        rising = a * np.sin(0.5 * math.pi * refl / b)
        falling = a * np.cos(0.5 * math.pi * (refl - b) / (math.pi - b))
        return sign * np.where(refl <= b, rising, falling)
    # kind 2: linear interpolation on the dense table
    md = rows.shape[1] - 1
    t = np.fmod(theta, TWO_PI)
    t[t < 0] += TWO_PI
    x = t * (md / TWO_PI)
    i0 = np.minimum(x.astype(np.int64), md - 1)
    frac = x - i0
    lo = rows[np.arange(rows.shape[0]), i0]
    hi = rows[np.arange(rows.shape[0]), i0 + 1]
    return lo + frac * (hi - lo)


class _EdgeEval:
    """Groups edges by coupling kind once, so the step loop stays lean."""

    def __init__(self, n, tails, heads, lags, kinds, pa, pb, tab_idx, tables):
        self.n = n
        self.tails = tails
        self.heads = heads
        self.lags = lags
        self.e = tails.shape[0]
        self.groups = []
        for kind in (0, 1, 2):
            sel = np.nonzero(kinds == kind)[0]
            if sel.shape[0] == 0:
                continue
            rows = tables[tab_idx[sel]] if kind == 2 else None
            self.groups.append((kind, sel, pa[sel] if sel.shape[0] else None, pb[sel], rows))

    def rhs(self, phi, eps):
        d = phi[self.heads] - phi[self.tails]
        u = d - self.lags
        v = -d - self.lags
        fu = np.empty(self.e)
        fv = np.empty(self.e)
        for kind, sel, a, b, rows in self.groups:
            if kind == 2:
                fu[sel] = _eval_group(kind, None, None, rows, u[sel])
                fv[sel] = _eval_group(kind, None, None, rows, v[sel])
            else:
                fu[sel] = _eval_group(kind, a, b, None, u[sel])
                fv[sel] = _eval_group(kind, a, b, None, v[sel])
        acc = np.bincount(self.tails, weights=fu, minlength=self.n) + np.bincount(
            self.heads, weights=fv, minlength=self.n
        )
        return eps * acc


def integrate_phase(
    phi0,
    tails,
    heads,
    lags,
    kinds,
    pa,
    pb,
    tab_idx,
    tables,
    eps,
    h,
    n_steps,
    record_every,
    stop_r=-1.0,
    check_every=0,
):
    """Classical RK4 with per-step wrapping to [0, 2*pi).

    Records the state at step multiples of ``record_every`` (``record_every``
    must divide ``n_steps``). Returns ``(states, n_recorded, status,
    last_step)`` with status 0 = completed, 1 = non-finite state detected,
    2 = stopped early because the order parameter exceeded ``stop_r``
    (checked every ``check_every`` steps when ``stop_r >= 0``).
    """
    n = phi0.shape[0]
    ev = _EdgeEval(n, tails, heads, lags, kinds, pa, pb, tab_idx, tables)
    phi = phi0.astype(float).copy()
    n_rows = n_steps // record_every + 1
    states = np.empty((n_rows, n))
    states[0] = phi
    filled = 1
    status = 0
    last = 0
    half_h = 0.5 * h
    h6 = h / 6.0
    for step in range(1, n_steps + 1):
        k1 = ev.rhs(phi, eps)
        k2 = ev.rhs(phi + half_h * k1, eps)
        k3 = ev.rhs(phi + half_h * k2, eps)
        k4 = ev.rhs(phi + h * k3, eps)
        phi = phi + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        phi = _wrap_array(phi)
        last = step
        if step % record_every == 0:
            states[filled] = phi
            filled += 1
            if not np.all(np.isfinite(phi)):
                status = 1
                break
        if stop_r >= 0.0 and check_every > 0 and step % check_every == 0:
            sx = np.cos(phi).sum()
            sy = np.sin(phi).sum()
            if math.sqrt(sx * sx + sy * sy) / n > stop_r:
                status = 2
                break
    return states, filled, status, last


# --- event-driven pulse simulation -----------------------------------------


def _wrap_scalar(x):
    x = math.fmod(x, TWO_PI)
    return x + TWO_PI if x < 0 else x


def _eval_scalar(kind, a, b, row, theta):
    if kind == 0:
        return a * math.sin(theta)
    if kind == 1:
        t = _wrap_scalar(theta)
        refl = t if t <= math.pi else TWO_PI - t
        sign = 1.0 if t <= math.pi else -1.0
        if refl <= b:
            return sign * a * math.sin(0.5 * math.pi * refl / b)
        return sign * a * math.cos(0.5 * math.pi * (refl - b) / (math.pi - b))
    md = row.shape[0] - 1
    t = _wrap_scalar(theta)
    x = t * (md / TWO_PI)
    i0 = int(x)
    if i0 >= md:
        i0 = md - 1
    frac = x - i0
    return row[i0] + frac * (row[i0 + 1] - row[i0])


def run_pulse(
    theta0,
    omega,
    eps,
    tails,
    heads,
    delays,
    kinds,
    pa,
    pb,
    tab_idx,
    tables,
    t_end,
    sample_dt,
    fire_on_wrap,
    event_cap,
):
    """Event-driven pulse-coupled simulation.

    Oscillators rotate at ``omega`` rad/s; when one reaches 2*pi it fires
    (phase resets to 0) and a pulse is sent along every incident edge,
    arriving ``delays[e]`` seconds later. An arrival at phase theta applies
    the jump ``theta += eps * curve_e(theta)``; a jump crossing 2*pi counts
    as an immediate firing when ``fire_on_wrap`` is set, and a backward jump
    across 0 wraps silently.

    Simultaneous events are processed in the deterministic order
    (time, arrivals-before-firings, oscillator index, edge index).

    Returns ``(samples, fire_t, fire_osc, status)``: phases sampled at
    ``k * sample_dt`` (state after all events at or before the sample time),
    the firing log, and status 0 = ok / 3 = event budget exhausted.
    """
    n = theta0.shape[0]
    theta = theta0.astype(float).copy()
    last_t = np.zeros(n)
    epoch = np.zeros(n, dtype=np.int64)

    incident = [[] for _ in range(n)]
    for e in range(tails.shape[0]):
        incident[tails[e]].append((e, heads[e]))
        incident[heads[e]].append((e, tails[e]))

    rows = [tables[tab_idx[e]] if kinds[e] == 2 else None for e in range(tails.shape[0])]

    n_samples = int(math.floor(t_end / sample_dt)) + 1
    samples = np.empty((n_samples, n))
    next_sample = 0

    fire_t = []
    fire_osc = []
    heap = []
    status = 0
    pops = 0

    def emit_until(limit):
        """Emit every pending sample with time strictly below `limit`."""
        nonlocal next_sample
        while next_sample < n_samples and next_sample * sample_dt < limit:
            ts = next_sample * sample_dt
            samples[next_sample] = _wrap_array(theta + omega * (ts - last_t))
            next_sample += 1

    def schedule_fire(i, t):
        theta[i] = 0.0
        last_t[i] = t
        fire_t.append(t)
        fire_osc.append(i)
        for e, other in incident[i]:
            heapq.heappush(heap, (t + delays[e], 0, other, e))
        epoch[i] += 1
        heapq.heappush(heap, (t + TWO_PI / omega, 1, i, epoch[i]))

    for i in range(n):
        heapq.heappush(heap, ((TWO_PI - theta[i]) / omega, 1, i, 0))

    while heap:
        t, kind, a, b = heap[0]
        if t > t_end:
            break
        heapq.heappop(heap)
        pops += 1
        if pops > event_cap:
            status = 3
            break
        emit_until(t)
        if kind == 1:
            if b != epoch[a]:
                continue  # superseded by a jump
            schedule_fire(a, t)
        else:
            # advance target a to time t, then apply the jump for edge b
            theta[a] = _wrap_scalar(theta[a] + omega * (t - last_t[a]))
            last_t[a] = t
            jump = eps * _eval_scalar(kinds[b], pa[b], pb[b], rows[b], theta[a])
            nt = theta[a] + jump
            if nt >= TWO_PI and fire_on_wrap:
                theta[a] = nt - TWO_PI
                fire_t.append(t)
                fire_osc.append(a)
                for e, other in incident[a]:
                    heapq.heappush(heap, (t + delays[e], 0, other, e))
                epoch[a] += 1
                heapq.heappush(heap, (t + (TWO_PI - theta[a]) / omega, 1, a, epoch[a]))
            else:
                theta[a] = _wrap_scalar(nt)
                epoch[a] += 1
                heapq.heappush(heap, (t + (TWO_PI - theta[a]) / omega, 1, a, epoch[a]))

    if status == 0:
        emit_until(t_end + 0.5 * sample_dt)

    return (
        samples[:next_sample],
        np.asarray(fire_t, dtype=float),
        np.asarray(fire_osc, dtype=np.int32),
        status,
    )
