# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.  Semantics, draw consumption and floating-point
operation order mirror ``nonstat_aos._purepy`` exactly."""
import numpy as np

from libc.math cimport log, sqrt, INFINITY
from libc.stdlib cimport calloc, free
from libc.string cimport memset

BACKEND = "cython"

cdef enum:
    P_GR = 0
    P_EGR = 1
    P_U = 2
    P_ARW = 3
    P_AP = 4
    P_UCB = 5
    P_DMAB = 6
    P_OR = 7

cdef enum:
    S_ALPHA = 0
    S_EPS = 1
    S_PMIN = 2
    S_BETA = 3
    S_SCALE = 4
    S_GAMMA = 5
    S_DELTA = 6
    S_UTILITY = 7
    N_SLOTS = 8


cdef inline int argmax_lowest(const double* v, int n) noexcept nogil:
    cdef int best = 0, k
    for k in range(1, n):
        if v[k] > v[best]:
            best = k
    return best


cdef inline int roulette(const double* p, int n, double x) noexcept nogil:
    cdef double acc = 0.0
    cdef int k
    for k in range(n):
        acc += p[k]
        if x < acc:
            return k
    for k in range(n - 1, -1, -1):
        if p[k] > 0.0:
            return k
    return n - 1


cdef inline int uniform_index(int n, double x) noexcept nogil:
    cdef int i = <int>(x * n)
    return i if i < n else n - 1


cdef struct Window:
    int* ring
    int* occ
    int head
    int length
    int wsize


cdef inline void window_push(Window* w, int op) noexcept nogil:
    cdef int old
    if w.length == w.wsize:
        old = w.ring[w.head]
        w.occ[old] -= 1
        w.ring[w.head] = op
        w.head = (w.head + 1) % w.wsize
    else:
        w.ring[(w.head + w.length) % w.wsize] = op
        w.length += 1
    w.occ[op] += 1


cdef inline double binary_gain(const Window* w, int op, int n1) noexcept nogil:
    cdef double g_max = 1.0 if op < n1 else 0.0
    return g_max * (1 - (<double>w.occ[op]) / w.wsize)


cdef int trajectory(int code, const double* prm, int n, int n1, int wsize, int horizon,
                    const double* draws, long long* ops_out, double* gains_out,
                    double* total_out) noexcept nogil:
    """Returns the number of DMAB restarts, or -1 on allocation failure."""
    cdef double* u = <double*>calloc(n, sizeof(double))
    cdef double* sums = <double*>calloc(n, sizeof(double))
    cdef long long* nb = <long long*>calloc(n, sizeof(long long))
    cdef double* sigma = <double*>calloc(n, sizeof(double))
    cdef double* scratch = <double*>calloc(n, sizeof(double))
    cdef int* ties = <int*>calloc(n, sizeof(int))
    cdef Window w
    w.ring = <int*>calloc(wsize, sizeof(int))
    w.occ = <int*>calloc(n, sizeof(int))
    w.head = 0
    w.length = 0
    w.wsize = wsize
    if not (u and sums and nb and sigma and scratch and ties and w.ring and w.occ):
        free(u); free(sums); free(nb); free(sigma); free(scratch); free(ties)
        free(w.ring); free(w.occ)
        return -1

    cdef double alpha = prm[S_ALPHA], eps = prm[S_EPS], p_min = prm[S_PMIN]
    cdef double beta = prm[S_BETA], scale = prm[S_SCALE]
    cdef double gamma = prm[S_GAMMA], delta = prm[S_DELTA]
    cdef bint mean_mode = prm[S_UTILITY] != 0.0
    if code == P_UCB or code == P_DMAB:
        mean_mode = True
    cdef bint armed = code == P_DMAB and not (gamma == 0.0 and delta == 0.0)
    cdef long long ph_count = 0
    cdef double ph_mean = 0.0, ph_m = 0.0, ph_M = 0.0
    cdef int restarts = 0

    cdef int t, i, k, op, pos = 0, nties
    cdef long long tot, units = 0
    cdef double g, x, best, score, s, p_max
    for k in range(n):
        sigma[k] = 1.0 / n

    for t in range(horizon):
        # -- select
        if code == P_GR:
            op = argmax_lowest(u, n)
        elif code == P_EGR:
            x = draws[pos]
            pos += 1
            if x < eps:
                op = uniform_index(n, draws[pos])
                pos += 1
            else:
                op = argmax_lowest(u, n)
        elif code == P_U:
            op = uniform_index(n, draws[pos])
            pos += 1
        elif code == P_ARW or code == P_AP:
            op = roulette(sigma, n, draws[pos])
            pos += 1
        elif code == P_UCB or code == P_DMAB:
            op = -1
            for k in range(n):
                if nb[k] == 0:
                    op = k
                    break
            if op < 0:
                tot = 0
                for k in range(n):
                    tot += nb[k]
                op = 0
                best = -INFINITY
                for k in range(n):
                    score = u[k] + scale * sqrt(2 * log(<double>tot) / nb[k])
                    if score > best:
                        op = k
                        best = score
        else:  # P_OR
            for k in range(n):
                scratch[k] = binary_gain(&w, k, n1)
            best = scratch[0]
            for k in range(1, n):
                if scratch[k] > best:
                    best = scratch[k]
            nties = 0
            for k in range(n):
                if scratch[k] == best:
                    ties[nties] = k
                    nties += 1
            x = draws[pos]
            pos += 1
            k = <int>(x * nties)
            op = ties[k if k < nties else nties - 1]

        g = binary_gain(&w, op, n1)
        if op < n1:
            units += wsize - w.occ[op]

        # -- observe
        if code != P_U and code != P_OR:
            nb[op] += 1
            sums[op] += g
            if mean_mode:
                u[op] = sums[op] / nb[op]
            else:
                for k in range(n):
                    if k == op:
                        u[k] = (1 - alpha) * u[k] + alpha * g
                    else:
                        u[k] = (1 - alpha) * u[k]
        if code == P_ARW:
            s = 0.0
            for k in range(n):
                s += u[k]
            if s <= 0.0:
                for k in range(n):
                    sigma[k] = 1.0 / n
            else:
                for k in range(n):
                    sigma[k] = p_min + (1 - n * p_min) * u[k] / s
        elif code == P_AP:
            p_max = 1 - (n - 1) * p_min
            k = argmax_lowest(u, n)
            for i in range(n):
                if i == k:
                    sigma[i] = sigma[i] + beta * (p_max - sigma[i])
                else:
                    sigma[i] = sigma[i] + beta * (p_min - sigma[i])
        elif code == P_DMAB:
            ph_count += 1
            ph_mean += (g - ph_mean) / ph_count
            ph_m += g - ph_mean + delta
            if ph_m > ph_M:
                ph_M = ph_m
            if armed and ph_M - ph_m > gamma:
                memset(u, 0, n * sizeof(double))
                memset(sums, 0, n * sizeof(double))
                memset(nb, 0, n * sizeof(long long))
                ph_count = 0
                ph_mean = 0.0
                ph_m = 0.0
                ph_M = 0.0
                restarts += 1

        window_push(&w, op)
        if ops_out != NULL:
            ops_out[t] = op + 1
            gains_out[t] = g

    # binary gains are multiples of 1/wsize: sum them exactly
    total_out[0] = (<double>units) / wsize
    free(u); free(sums); free(nb); free(sigma); free(scratch); free(ties)
    free(w.ring); free(w.occ)
    return restarts


def _check(int code, params, int n_op, int n1, int wsize, int horizon):
    if not 0 <= code <= P_OR:
        raise ValueError(f"unknown policy code {code}")
    if len(params) != N_SLOTS:
        raise ValueError(f"expected {N_SLOTS} parameters, got {len(params)}")
    if n_op < 1 or not 0 <= n1 <= n_op or wsize < 1 or horizon < 0:
        raise ValueError("invalid binary scenario")


def run_binary(int code, params, int n_op, int n1, int wsize, int horizon, draws):
    _check(code, params, n_op, n1, wsize, horizon)
    cdef double[::1] prm = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[::1] d = np.ascontiguousarray(draws, dtype=np.float64)
    if d.shape[0] < 2 * horizon:
        raise ValueError("need 2 * horizon draws")
    ops = np.empty(horizon, dtype=np.int64)
    gains = np.empty(horizon, dtype=np.float64)
    cdef long long[::1] o = ops
    cdef double[::1] gv = gains
    cdef double total
    cdef int restarts
    cdef long long* op_ptr = &o[0] if horizon else NULL
    cdef double* g_ptr = &gv[0] if horizon else NULL
    cdef const double* d_ptr = &d[0] if d.shape[0] else NULL
    with nogil:
        restarts = trajectory(code, &prm[0], n_op, n1, wsize, horizon, d_ptr,
                              op_ptr, g_ptr, &total)
    if restarts < 0:
        raise MemoryError()
    return ops, gains, restarts


def run_binary_totals(int code, params, int n_op, int n1, int wsize, int horizon, draws):
    _check(code, params, n_op, n1, wsize, horizon)
    cdef double[::1] prm = np.ascontiguousarray(params, dtype=np.float64)
    cdef const double[:, ::1] d = np.ascontiguousarray(draws, dtype=np.float64)
    if d.shape[1] < 2 * horizon:
        raise ValueError("need 2 * horizon draws per run")
    cdef Py_ssize_t runs = d.shape[0], r
    out = np.empty(runs, dtype=np.float64)
    cdef double[::1] ov = out
    cdef int status = 0
    with nogil:
        for r in range(runs):
            if trajectory(code, &prm[0], n_op, n1, wsize, horizon,
                          &d[r, 0] if d.shape[1] else NULL, NULL, NULL, &ov[r]) < 0:
                status = -1
                break
    if status < 0:
        raise MemoryError()
    return out


cdef int island(int n, int n1, int wsize, int horizon, int psize, double alpha, double beta,
                bint credit_mean, const double* draws, double* m, double* totals) noexcept nogil:
    cdef int* isl = <int*>calloc(psize, sizeof(int))
    cdef int* ring = <int*>calloc(<size_t>psize * wsize, sizeof(int))
    cdef int* occ = <int*>calloc(<size_t>psize * n, sizeof(int))
    cdef int* head = <int*>calloc(psize, sizeof(int))
    cdef int* length = <int*>calloc(psize, sizeof(int))
    cdef long long* units = <long long*>calloc(psize, sizeof(long long))
    cdef long long* cnt = <long long*>calloc(<size_t>n * n, sizeof(long long))
    cdef double* best = <double*>calloc(<size_t>n * n, sizeof(double))
    cdef double* sums = <double*>calloc(<size_t>n * n, sizeof(double))
    cdef double* credit = <double*>calloc(n, sizeof(double))
    cdef double* r = <double*>calloc(n, sizeof(double))
    if not (isl and ring and occ and head and length and units and cnt and best and sums and credit and r):
        free(isl); free(ring); free(occ); free(head); free(length); free(units)
        free(cnt); free(best); free(sums); free(credit); free(r)
        return -1

    cdef int t, j, i, k, src, dst, winners
    cdef bint seen, any_out
    cdef double g, top, noise = 1.0 / n
    cdef Window w
    w.wsize = wsize
    for i in range(n * n):
        m[i] = 1.0 / n
    for j in range(psize):
        isl[j] = j % n
        totals[j] = 0.0

    for t in range(horizon):
        memset(cnt, 0, <size_t>n * n * sizeof(long long))
        memset(sums, 0, <size_t>n * n * sizeof(double))
        for j in range(psize):
            src = isl[j]
            dst = roulette(m + src * n, n, draws[<size_t>t * psize + j])
            w.ring = ring + <size_t>j * wsize
            w.occ = occ + <size_t>j * n
            w.head = head[j]
            w.length = length[j]
            g = binary_gain(&w, dst, n1)
            if dst < n1:
                units[j] += wsize - w.occ[dst]
            window_push(&w, dst)
            head[j] = w.head
            length[j] = w.length
            isl[j] = dst
            k = src * n + dst
            if cnt[k] == 0 or g > best[k]:
                best[k] = g
            cnt[k] += 1
            sums[k] += g

        for i in range(n):
            any_out = False
            for k in range(n):
                if cnt[i * n + k]:
                    any_out = True
                    break
            if any_out:
                seen = False
                top = 0.0
                for k in range(n):
                    if cnt[i * n + k]:
                        if credit_mean:
                            credit[k] = sums[i * n + k] / cnt[i * n + k]
                        else:
                            credit[k] = best[i * n + k]
                        if not seen or credit[k] > top:
                            top = credit[k]
                            seen = True
                winners = 0
                for k in range(n):
                    if cnt[i * n + k] and credit[k] == top:
                        winners += 1
                for k in range(n):
                    if cnt[i * n + k] and credit[k] == top:
                        r[k] = 1.0 / winners
                    else:
                        r[k] = 0.0
            else:
                for k in range(n):
                    r[k] = m[i * n + k]
            for k in range(n):
                m[i * n + k] = (1 - beta) * (alpha * m[i * n + k] + (1 - alpha) * r[k]) + beta * noise

    for j in range(psize):
        totals[j] = (<double>units[j]) / wsize
    free(isl); free(ring); free(occ); free(head); free(length); free(units)
    free(cnt); free(best); free(sums); free(credit); free(r)
    return 0


def run_island(int n_op, int n1, int wsize, int horizon, int psize, double alpha,
               double beta, credit_mean, draws):
    if n_op < 1 or not 0 <= n1 <= n_op or wsize < 1 or horizon < 0 or psize < n_op:
        raise ValueError("invalid island-model arguments")
    cdef const double[::1] d = np.ascontiguousarray(draws, dtype=np.float64).reshape(-1)
    if d.shape[0] < <Py_ssize_t>horizon * psize:
        raise ValueError("need horizon * psize draws")
    matrix = np.empty((n_op, n_op), dtype=np.float64)
    totals = np.empty(psize, dtype=np.float64)
    cdef double[:, ::1] mv = matrix
    cdef double[::1] tv = totals
    cdef bint cm = bool(credit_mean)
    cdef int status
    cdef const double* d_ptr = &d[0] if d.shape[0] else NULL
    with nogil:
        status = island(n_op, n1, wsize, horizon, psize, alpha, beta, cm, d_ptr,
                        &mv[0, 0], &tv[0])
    if status < 0:
        raise MemoryError()
    return totals, matrix


cdef long long numerator(const int* x, int sc, int wsize, int q, int r, int* counts) noexcept nogil:
    cdef int t, back, op, occ
    cdef long long num = 0
    for t in range(sc):
        counts[x[t]] = 0
    for t in range(sc):
        counts[x[t]] += 1
    for t in range(sc):
        op = x[t]
        if op == 0:
            continue
        occ = q * counts[op]
        for back in range(1, r + 1):
            if x[(t - back + sc * (back // sc + 1)) % sc] == op:
                occ += 1
        num += wsize - occ
    return num


cdef void search(int pos, int used, int n1, int sc, int wsize, int q, int r, bint has_zero,
                 int* x, int* counts, long long* best_num, int* best_x) noexcept nogil:
    cdef int op, hi, t
    cdef long long num
    if pos == sc:
        num = numerator(x, sc, wsize, q, r, counts)
        if num > best_num[0]:
            best_num[0] = num
            for t in range(sc):
                best_x[t] = x[t]
        return
    if has_zero:
        x[pos] = 0
        search(pos + 1, used, n1, sc, wsize, q, r, has_zero, x, counts, best_num, best_x)
    hi = used + 1 if used + 1 < n1 else n1
    for op in range(1, hi + 1):
        x[pos] = op
        search(pos + 1, used if used > op else op, n1, sc, wsize, q, r, has_zero,
               x, counts, best_num, best_x)


def circular_best(int n1, int wsize, int sc, has_zero):
    if sc < 1 or wsize < 1 or n1 < 0:
        raise ValueError("invalid circular search arguments")
    cdef int q = wsize // sc, r = wsize % sc
    cdef int* x = <int*>calloc(sc, sizeof(int))
    cdef int* best_x = <int*>calloc(sc, sizeof(int))
    cdef int* counts = <int*>calloc(n1 + 1, sizeof(int))
    if not (x and best_x and counts):
        free(x); free(best_x); free(counts)
        raise MemoryError()
    cdef long long best_num = -1
    cdef bint hz = bool(has_zero)
    with nogil:
        search(0, 0, n1, sc, wsize, q, r, hz, x, counts, &best_num, best_x)
    sched = tuple(best_x[t] for t in range(sc))
    free(x); free(best_x); free(counts)
    if best_num < 0:
        return 0, (0,) * sc
    return int(best_num), sched
