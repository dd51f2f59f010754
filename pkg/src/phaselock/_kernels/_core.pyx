# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: RK4 phase integration and event-driven pulse simulation.

Mirrors phaselock._kernels.pure function-for-function; the arithmetic is
ordered identically (per-edge evaluation, tail-sum plus head-sum
accumulation, same RK4 expression grouping) so results agree with the pure
backend to floating-point roundoff. Keep the two files in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fmod, sin, sqrt, M_PI, isfinite
from libc.stdlib cimport free, malloc, realloc
from libc.string cimport memcpy

cnp.import_array()

cdef double TWO_PI = 2.0 * M_PI


cdef inline double _wrap(double x) noexcept nogil:
    x = fmod(x, TWO_PI)
    if x < 0.0:
        x += TWO_PI
    return x


cdef inline double _eval(int kind, double a, double b, const double* row,
                         long md, double theta) noexcept nogil:
    cdef double t, refl, sign, x, frac
    cdef long i0
    if kind == 0:
        return a * sin(theta)
    if kind == 1:
        t = _wrap(theta)
        if t <= M_PI:
            refl = t
            sign = 1.0
        else:
            refl = TWO_PI - t
            sign = -1.0
        if refl <= b:
            return sign * a * sin(0.5 * M_PI * refl / b)
        return sign * a * cos(0.5 * M_PI * (refl - b) / (M_PI - b))
    t = _wrap(theta)
    x = t * (md / TWO_PI)
    i0 = <long>x
    if i0 >= md:
        i0 = md - 1
    frac = x - i0
    return row[i0] + frac * (row[i0 + 1] - row[i0])


cdef void _rhs(double* phi, double* out, double* acc_t, double* acc_h,
               long n, long ne, const int* tails, const int* heads,
               const double* lags, const int* kinds, const double* pa,
               const double* pb, const int* tab_idx, const double* tables,
               long md, double eps, double* fu, double* fv) noexcept nogil:
    cdef long i, e
    cdef double d
    cdef const double* row
    for i in range(n):
        acc_t[i] = 0.0
        acc_h[i] = 0.0
    for e in range(ne):
        d = phi[heads[e]] - phi[tails[e]]
        if kinds[e] == 2:
            row = tables + tab_idx[e] * (md + 1)
        else:
            row = NULL
        fu[e] = _eval(kinds[e], pa[e], pb[e], row, md, d - lags[e])
        fv[e] = _eval(kinds[e], pa[e], pb[e], row, md, -d - lags[e])
    for e in range(ne):
        acc_t[tails[e]] += fu[e]
    for e in range(ne):
        acc_h[heads[e]] += fv[e]
    for i in range(n):
        out[i] = eps * (acc_t[i] + acc_h[i])


def integrate_phase(phi0, tails, heads, lags, kinds, pa, pb, tab_idx, tables,
                    double eps, double h, long n_steps, long record_every,
                    double stop_r=-1.0, long check_every=0):
    """See phaselock._kernels.pure.integrate_phase."""
    cdef double[::1] phi0_v = np.ascontiguousarray(phi0, dtype=np.float64)
    cdef int[::1] tails_v = np.ascontiguousarray(tails, dtype=np.int32)
    cdef int[::1] heads_v = np.ascontiguousarray(heads, dtype=np.int32)
    cdef double[::1] lags_v = np.ascontiguousarray(lags, dtype=np.float64)
    cdef int[::1] kinds_v = np.ascontiguousarray(kinds, dtype=np.int32)
    cdef double[::1] pa_v = np.ascontiguousarray(pa, dtype=np.float64)
    cdef double[::1] pb_v = np.ascontiguousarray(pb, dtype=np.float64)
    cdef int[::1] tab_v = np.ascontiguousarray(tab_idx, dtype=np.int32)
    cdef double[:, ::1] tables_v = np.ascontiguousarray(tables, dtype=np.float64)

    cdef long n = phi0_v.shape[0]
    cdef long ne = tails_v.shape[0]
    cdef long md = tables_v.shape[1] - 1
    cdef long n_rows = n_steps // record_every + 1
    states_arr = np.empty((n_rows, n))
    cdef double[:, ::1] states = states_arr

    cdef double* phi = <double*>malloc(n * sizeof(double))
    cdef double* tmp = <double*>malloc(n * sizeof(double))
    cdef double* k1 = <double*>malloc(n * sizeof(double))
    cdef double* k2 = <double*>malloc(n * sizeof(double))
    cdef double* k3 = <double*>malloc(n * sizeof(double))
    cdef double* k4 = <double*>malloc(n * sizeof(double))
    cdef double* acc_t = <double*>malloc(n * sizeof(double))
    cdef double* acc_h = <double*>malloc(n * sizeof(double))
    cdef double* fu = <double*>malloc(ne * sizeof(double))
    cdef double* fv = <double*>malloc(ne * sizeof(double))
    if (phi == NULL or tmp == NULL or k1 == NULL or k2 == NULL or k3 == NULL
            or k4 == NULL or acc_t == NULL or acc_h == NULL or fu == NULL
            or fv == NULL):
        free(phi); free(tmp); free(k1); free(k2); free(k3); free(k4)
        free(acc_t); free(acc_h); free(fu); free(fv)
        raise MemoryError()

    cdef long filled = 1
    cdef int status = 0
    cdef long last = 0
    cdef double half_h = 0.5 * h
    cdef double h6 = h / 6.0
    cdef long step, i
    cdef double sx, sy
    cdef bint ok

    with nogil:
        for i in range(n):
            phi[i] = phi0_v[i]
            states[0, i] = phi[i]
        for step in range(1, n_steps + 1):
            _rhs(phi, k1, acc_t, acc_h, n, ne, &tails_v[0], &heads_v[0],
                 &lags_v[0], &kinds_v[0], &pa_v[0], &pb_v[0], &tab_v[0],
                 &tables_v[0, 0], md, eps, fu, fv)
            for i in range(n):
                tmp[i] = phi[i] + half_h * k1[i]
            _rhs(tmp, k2, acc_t, acc_h, n, ne, &tails_v[0], &heads_v[0],
                 &lags_v[0], &kinds_v[0], &pa_v[0], &pb_v[0], &tab_v[0],
                 &tables_v[0, 0], md, eps, fu, fv)
            for i in range(n):
                tmp[i] = phi[i] + half_h * k2[i]
            _rhs(tmp, k3, acc_t, acc_h, n, ne, &tails_v[0], &heads_v[0],
                 &lags_v[0], &kinds_v[0], &pa_v[0], &pb_v[0], &tab_v[0],
                 &tables_v[0, 0], md, eps, fu, fv)
            for i in range(n):
                tmp[i] = phi[i] + h * k3[i]
            _rhs(tmp, k4, acc_t, acc_h, n, ne, &tails_v[0], &heads_v[0],
                 &lags_v[0], &kinds_v[0], &pa_v[0], &pb_v[0], &tab_v[0],
                 &tables_v[0, 0], md, eps, fu, fv)
            for i in range(n):
                phi[i] = _wrap(phi[i] + h6 * (k1[i] + 2.0 * k2[i]
                                              + 2.0 * k3[i] + k4[i]))
            last = step
            if step % record_every == 0:
                ok = True
                for i in range(n):
                    states[filled, i] = phi[i]
                    if not isfinite(phi[i]):
                        ok = False
                filled += 1
                if not ok:
                    status = 1
                    break
            if stop_r >= 0.0 and check_every > 0 and step % check_every == 0:
                sx = 0.0
                sy = 0.0
                for i in range(n):
                    sx += cos(phi[i])
                    sy += sin(phi[i])
                if sqrt(sx * sx + sy * sy) / n > stop_r:
                    status = 2
                    break

    free(phi); free(tmp); free(k1); free(k2); free(k3); free(k4)
    free(acc_t); free(acc_h); free(fu); free(fv)
    return states_arr, filled, status, last


# --- event-driven pulse simulation -----------------------------------------

cdef struct Ev:
    double t
    int kind      # 0 = pulse arrival, 1 = threshold firing
    int a         # oscillator
    long b        # edge index (arrival) or epoch (firing)


cdef inline bint _ev_lt(Ev x, Ev y) noexcept nogil:
    if x.t != y.t:
        return x.t < y.t
    if x.kind != y.kind:
        return x.kind < y.kind
    if x.a != y.a:
        return x.a < y.a
    return x.b < y.b


cdef struct Heap:
    Ev* data
    long size
    long cap


cdef int _heap_push(Heap* h, Ev e) noexcept nogil:
    cdef long i, parent
    cdef Ev swap
    cdef Ev* grown
    if h.size == h.cap:
        grown = <Ev*>realloc(h.data, 2 * h.cap * sizeof(Ev))
        if grown == NULL:
            return -1
        h.data = grown
        h.cap *= 2
    i = h.size
    h.size += 1
    h.data[i] = e
    while i > 0:
        parent = (i - 1) >> 1
        if _ev_lt(h.data[i], h.data[parent]):
            swap = h.data[i]
            h.data[i] = h.data[parent]
            h.data[parent] = swap
            i = parent
        else:
            break
    return 0


cdef Ev _heap_pop(Heap* h) noexcept nogil:
    cdef Ev root = h.data[0]
    cdef long i = 0, c
    cdef Ev swap
    h.size -= 1
    if h.size > 0:
        h.data[0] = h.data[h.size]
        while True:
            c = 2 * i + 1
            if c >= h.size:
                break
            if c + 1 < h.size and _ev_lt(h.data[c + 1], h.data[c]):
                c += 1
            if _ev_lt(h.data[c], h.data[i]):
                swap = h.data[i]
                h.data[i] = h.data[c]
                h.data[c] = swap
                i = c
            else:
                break
    return root


def run_pulse(theta0, double omega, double eps, tails, heads, delays, kinds,
              pa, pb, tab_idx, tables, double t_end, double sample_dt,
              bint fire_on_wrap, long event_cap):
    """See phaselock._kernels.pure.run_pulse."""
    cdef double[::1] theta0_v = np.ascontiguousarray(theta0, dtype=np.float64)
    cdef int[::1] tails_v = np.ascontiguousarray(tails, dtype=np.int32)
    cdef int[::1] heads_v = np.ascontiguousarray(heads, dtype=np.int32)
    cdef double[::1] delays_v = np.ascontiguousarray(delays, dtype=np.float64)
    cdef int[::1] kinds_v = np.ascontiguousarray(kinds, dtype=np.int32)
    cdef double[::1] pa_v = np.ascontiguousarray(pa, dtype=np.float64)
    cdef double[::1] pb_v = np.ascontiguousarray(pb, dtype=np.float64)
    cdef int[::1] tab_v = np.ascontiguousarray(tab_idx, dtype=np.int32)
    cdef double[:, ::1] tables_v = np.ascontiguousarray(tables, dtype=np.float64)

    cdef long n = theta0_v.shape[0]
    cdef long ne = tails_v.shape[0]
    cdef long md = tables_v.shape[1] - 1
    cdef long n_samples = <long>(t_end / sample_dt) + 1
    samples_arr = np.empty((n_samples, n))
    cdef double[:, ::1] samples = samples_arr

    # CSR adjacency over undirected incidences, filled in edge order so the
    # per-vertex neighbor sequence matches the pure backend exactly.
    cdef long* inc_ptr = <long*>malloc((n + 1) * sizeof(long))
    cdef long* inc_edge = <long*>malloc(2 * ne * sizeof(long))
    cdef long* inc_other = <long*>malloc(2 * ne * sizeof(long))
    cdef long* cursor = <long*>malloc(n * sizeof(long))
    cdef double* theta = <double*>malloc(n * sizeof(double))
    cdef double* last_t = <double*>malloc(n * sizeof(double))
    cdef long* epoch = <long*>malloc(n * sizeof(long))
    cdef Heap heap
    heap.size = 0
    heap.cap = 4096
    heap.data = <Ev*>malloc(heap.cap * sizeof(Ev))
    cdef long fire_cap = 4096
    cdef long n_fires = 0
    cdef double* fire_t = <double*>malloc(fire_cap * sizeof(double))
    cdef int* fire_osc = <int*>malloc(fire_cap * sizeof(int))

    if (inc_ptr == NULL or inc_edge == NULL or inc_other == NULL
            or cursor == NULL or theta == NULL or last_t == NULL
            or epoch == NULL or heap.data == NULL or fire_t == NULL
            or fire_osc == NULL):
        free(inc_ptr); free(inc_edge); free(inc_other); free(cursor)
        free(theta); free(last_t); free(epoch); free(heap.data)
        free(fire_t); free(fire_osc)
        raise MemoryError()

    cdef long i, e, next_sample, pops, k, start, stop
    cdef int status = 0
    cdef int oom = 0
    cdef double ts, t, jump, nt
    cdef Ev ev
    cdef const double* row
    cdef double* grown_t
    cdef int* grown_o

    with nogil:
        for i in range(n + 1):
            inc_ptr[i] = 0
        for e in range(ne):
            inc_ptr[tails_v[e] + 1] += 1
            inc_ptr[heads_v[e] + 1] += 1
        for i in range(n):
            inc_ptr[i + 1] += inc_ptr[i]
            cursor[i] = inc_ptr[i]
        for e in range(ne):
            inc_edge[cursor[tails_v[e]]] = e
            inc_other[cursor[tails_v[e]]] = heads_v[e]
            cursor[tails_v[e]] += 1
            inc_edge[cursor[heads_v[e]]] = e
            inc_other[cursor[heads_v[e]]] = tails_v[e]
            cursor[heads_v[e]] += 1

        for i in range(n):
            theta[i] = theta0_v[i]
            last_t[i] = 0.0
            epoch[i] = 0
            ev.t = (TWO_PI - theta[i]) / omega
            ev.kind = 1
            ev.a = <int>i
            ev.b = 0
            if _heap_push(&heap, ev) < 0:
                oom = 1
                break

        next_sample = 0
        pops = 0
        while heap.size > 0 and not oom:
            if heap.data[0].t > t_end:
                break
            ev = _heap_pop(&heap)
            pops += 1
            if pops > event_cap:
                status = 3
                break
            t = ev.t
            while next_sample < n_samples and next_sample * sample_dt < t:
                ts = next_sample * sample_dt
                for i in range(n):
                    samples[next_sample, i] = _wrap(theta[i] + omega * (ts - last_t[i]))
                next_sample += 1
            if ev.kind == 1:
                if ev.b != epoch[ev.a]:
                    continue  # superseded by a jump
                i = ev.a
                theta[i] = 0.0
                last_t[i] = t
            else:
                i = ev.a
                e = ev.b
                theta[i] = _wrap(theta[i] + omega * (t - last_t[i]))
                last_t[i] = t
                if kinds_v[e] == 2:
                    row = &tables_v[tab_v[e], 0]
                else:
                    row = NULL
                jump = eps * _eval(kinds_v[e], pa_v[e], pb_v[e], row, md, theta[i])
                nt = theta[i] + jump
                if nt >= TWO_PI and fire_on_wrap:
                    theta[i] = nt - TWO_PI
                else:
                    theta[i] = _wrap(nt)
                    epoch[i] += 1
                    ev.t = t + (TWO_PI - theta[i]) / omega
                    ev.kind = 1
                    ev.a = <int>i
                    ev.b = epoch[i]
                    if _heap_push(&heap, ev) < 0:
                        oom = 1
                    continue
            # firing of oscillator i at time t (threshold or jump past 2*pi)
            if n_fires == fire_cap:
                grown_t = <double*>realloc(fire_t, 2 * fire_cap * sizeof(double))
                grown_o = <int*>realloc(fire_osc, 2 * fire_cap * sizeof(int))
                if grown_t != NULL:
                    fire_t = grown_t
                if grown_o != NULL:
                    fire_osc = grown_o
                if grown_t == NULL or grown_o == NULL:
                    oom = 1
                    break
                fire_cap *= 2
            fire_t[n_fires] = t
            fire_osc[n_fires] = <int>i
            n_fires += 1
            start = inc_ptr[i]
            stop = inc_ptr[i + 1]
            for k in range(start, stop):
                ev.t = t + delays_v[inc_edge[k]]
                ev.kind = 0
                ev.a = <int>inc_other[k]
                ev.b = inc_edge[k]
                if _heap_push(&heap, ev) < 0:
                    oom = 1
                    break
            epoch[i] += 1
            ev.t = t + (TWO_PI - theta[i]) / omega
            ev.kind = 1
            ev.a = <int>i
            ev.b = epoch[i]
            if _heap_push(&heap, ev) < 0:
                oom = 1
        if status == 0 and not oom:
            while next_sample < n_samples and next_sample * sample_dt < t_end + 0.5 * sample_dt:
                ts = next_sample * sample_dt
                for i in range(n):
                    samples[next_sample, i] = _wrap(theta[i] + omega * (ts - last_t[i]))
                next_sample += 1

    out_t = np.empty(n_fires)
    out_o = np.empty(n_fires, dtype=np.int32)
    if n_fires > 0:
        memcpy(cnp.PyArray_DATA(<cnp.ndarray>out_t), fire_t, n_fires * sizeof(double))
        memcpy(cnp.PyArray_DATA(<cnp.ndarray>out_o), fire_osc, n_fires * sizeof(int))
    n_emitted = next_sample

    free(inc_ptr); free(inc_edge); free(inc_other); free(cursor)
    free(theta); free(last_t); free(epoch); free(heap.data)
    free(fire_t); free(fire_osc)
    if oom:
        raise MemoryError()
    return samples_arr[:n_emitted], out_t, out_o, status
