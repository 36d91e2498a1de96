# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Mirrors _pykernels.py operation for operation."""
from libc.math cimport INFINITY, fabs
from libc.stdlib cimport free, malloc


def best_split(const double[::1] xs, const double[::1] ys, Py_ssize_t min_leaf):
    cdef Py_ssize_t n = ys.shape[0]
    cdef Py_ssize_t k, nl, nr, best_k = -1
    cdef double total = 0.0, mean, s1 = 0.0, s2 = 0.0, r1, sse, best = INFINITY
    cdef double *c
    cdef double *suf1
    cdef double *suf2
    if n < 2:
        return -1, INFINITY
    c = <double *> malloc(n * sizeof(double))
    suf1 = <double *> malloc((n + 1) * sizeof(double))
    suf2 = <double *> malloc((n + 1) * sizeof(double))
    if c == NULL or suf1 == NULL or suf2 == NULL:
        free(c); free(suf1); free(suf2)
        raise MemoryError()
    try:
        for k in range(n):
            total += ys[k]
        mean = total / n
        for k in range(n):
            c[k] = ys[k] - mean
        suf1[n] = 0.0
        suf2[n] = 0.0
        for k in range(n - 1, -1, -1):
            suf1[k] = suf1[k + 1] + c[k]
            suf2[k] = suf2[k + 1] + c[k] * c[k]
        for k in range(n - 1):
            s1 += c[k]
            s2 += c[k] * c[k]
            if xs[k] == xs[k + 1]:
                continue
            nl = k + 1
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            r1 = suf1[k + 1]
            sse = (s2 - s1 * s1 / nl) + (suf2[k + 1] - r1 * r1 / nr)
            if sse < best:
                best = sse
                best_k = k
    finally:
        free(c); free(suf1); free(suf2)
    return best_k, best


def smo_solve(const double[:, ::1] K, const double[::1] y, double C, double eps,
              double tol, long max_iter, double[::1] delta, double[::1] grad,
              double[:, ::1] history=None):
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t i, j, k, q, rows = 0, recorded = 0
    cdef long it = 0
    cdef double acc, dk, gk, v, up_max, dn_max, gap = -INFINITY
    cdef double di, dj, s, lo, hi, eta, gd, base, u, t, val, best_u, best_val
    cdef double new_i, new_j, ti, tj, si, sj
    cdef double cands[8]
    cdef int nc, a, b
    cdef double signs[2]
    signs[0] = 1.0
    signs[1] = -1.0
    if history is not None:
        rows = history.shape[0]

    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += K[i, j] * delta[j]
        grad[i] = y[i] - acc

    while True:
        i = -1
        j = -1
        up_max = -INFINITY
        dn_max = -INFINITY
        for k in range(n):
            dk = delta[k]
            gk = grad[k]
            if dk < C:
                v = gk - eps if dk >= 0.0 else gk + eps
                if v > up_max:
                    up_max = v
                    i = k
            if dk > -C:
                v = -gk - eps if dk <= 0.0 else -gk + eps
                if v > dn_max:
                    dn_max = v
                    j = k
        if i < 0 or j < 0:
            gap = -INFINITY
            break
        gap = up_max + dn_max
        if gap <= tol or it >= max_iter:
            break

        di = delta[i]
        dj = delta[j]
        s = di + dj
        lo = s - C
        if lo < -C:
            lo = -C
        hi = s + C
        if hi > C:
            hi = C
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        gd = grad[i] - grad[j]
        base = fabs(di) + fabs(dj)

        nc = 0
        cands[nc] = lo; nc += 1
        cands[nc] = hi; nc += 1
        if lo <= 0.0 and 0.0 <= hi:
            cands[nc] = 0.0; nc += 1
        if lo <= s and s <= hi:
            cands[nc] = s; nc += 1
        if eta > 1e-12:
            for a in range(2):
                si = signs[a]
                for b in range(2):
                    sj = signs[b]
                    u = di + (gd - eps * si + eps * sj) / eta
                    if u < lo:
                        u = lo
                    elif u > hi:
                        u = hi
                    cands[nc] = u; nc += 1
        best_u = di
        best_val = 0.0
        for q in range(nc):
            u = cands[q]
            t = u - di
            val = gd * t - 0.5 * eta * t * t - eps * (fabs(u) + fabs(s - u) - base)
            if val > best_val:
                best_val = val
                best_u = u
        new_i = best_u
        new_j = s - new_i
        if new_j > C:
            new_j = C
        elif new_j < -C:
            new_j = -C
        ti = new_i - di
        tj = new_j - dj
        if ti == 0.0 and tj == 0.0:
            break
        for k in range(n):
            grad[k] = grad[k] - (K[k, i] * ti + K[k, j] * tj)
        delta[i] = new_i
        delta[j] = new_j
        it += 1
        if recorded < rows:
            for k in range(n):
                history[recorded, k] = delta[k]
            recorded += 1

    return it, gap, recorded
