# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree kernels: best-split search, routing, path explanations.

Mirrors ``_fallback``; see there for the contract of each function.
"""

import numpy as np

from libc.math cimport log, fabs, INFINITY
from libc.stdlib cimport malloc, free, qsort

cdef enum:
    SQUARED = 0
    FRIEDMAN = 1
    ABSOLUTE = 2
    POISSON = 3

ctypedef struct Pair:
    double x
    double y
    Py_ssize_t idx


cdef int cmp_pair(const void* a, const void* b) noexcept nogil:
    cdef const Pair* pa = <const Pair*> a
    cdef const Pair* pb = <const Pair*> b
    if pa.x < pb.x:
        return -1
    if pa.x > pb.x:
        return 1
    # index tie-break makes qsort behave like a stable sort
    if pa.idx < pb.idx:
        return -1
    if pa.idx > pb.idx:
        return 1
    return 0


cdef inline double xlogx_over(double s, double m) noexcept nogil:
    if s > 0:
        return s * (log(s) - log(m))
    return 0.0


cdef void prefix_sad(const double* ys, Py_ssize_t n, double* out,
                     Pair* work, Py_ssize_t* rank, double* yr,
                     long* cnt, double* sm) noexcept nogil:
    """Sum of |y - lower median| for every prefix, with a Fenwick tree over ranks."""
    cdef Py_ssize_t i, k, pos, step, m, top
    cdef long rem
    cdef double total = 0.0, before, med, sum_le
    for i in range(n):
        work[i].x = ys[i]
        work[i].y = ys[i]
        work[i].idx = i
    qsort(work, n, sizeof(Pair), cmp_pair)
    for i in range(n):
        rank[work[i].idx] = i + 1
        yr[i + 1] = work[i].x
    for i in range(n + 1):
        cnt[i] = 0
        sm[i] = 0.0
    top = 1
    while top * 2 <= n:
        top *= 2
    for k in range(n):
        i = rank[k]
        while i <= n:
            cnt[i] += 1
            sm[i] += ys[k]
            i += i & (-i)
        total += ys[k]
        m = (k + 2) // 2
        pos = 0
        rem = m
        before = 0.0
        step = top
        while step > 0:
            if pos + step <= n and cnt[pos + step] < rem:
                pos += step
                rem -= cnt[pos]
                before += sm[pos]
            step //= 2
        med = yr[pos + 1]
        sum_le = before + med
        out[k] = med * m - sum_le + (total - sum_le) - med * (k + 1 - m)


cdef void improvements(const double* ys, Py_ssize_t n, int criterion, double* out,
                       double* scratch, Pair* work, Py_ssize_t* rank, double* yr,
                       long* cnt, double* sm) noexcept nogil:
    cdef Py_ssize_t i
    cdef double fn = <double> n, nl, nr, sl, sr, s = 0.0, d, diff, whole, parent
    cdef double* prefix
    cdef double* suffix
    cdef double* rev
    if criterion == ABSOLUTE:
        prefix = scratch
        suffix = scratch + n
        rev = scratch + 2 * n
        prefix_sad(ys, n, prefix, work, rank, yr, cnt, sm)
        for i in range(n):
            rev[i] = ys[n - 1 - i]
        prefix_sad(rev, n, suffix, work, rank, yr, cnt, sm)
        parent = prefix[n - 1] / fn
        for i in range(1, n):
            # suffix starting at i has length n - i -> reversed prefix index n - i - 1
            out[i - 1] = parent - (prefix[i - 1] + suffix[n - i - 1]) / fn
        return
    # running sum, so totals match a cumulative sum exactly
    for i in range(n):
        s += ys[i]
        scratch[i] = s
    if criterion == POISSON:
        whole = xlogx_over(s, fn)
    for i in range(1, n):
        nl = <double> i
        nr = fn - nl
        sl = scratch[i - 1]
        sr = s - sl
        if criterion == SQUARED:
            d = sl / nl - sr / nr
            out[i - 1] = (nl * nr) * (d * d) / (fn * fn)
        elif criterion == FRIEDMAN:
            diff = nr * sl - nl * sr
            out[i - 1] = (diff * diff) / (nl * nr) / (fn * fn)
        else:
            out[i - 1] = 2.0 / fn * (xlogx_over(sl, nl) + xlogx_over(sr, nr) - whole)


def find_best_split(const double[:, ::1] X, const double[::1] y,
                    const Py_ssize_t[::1] samples, const Py_ssize_t[::1] features,
                    int criterion, double tol):
    cdef Py_ssize_t n = samples.shape[0], k = features.shape[0]
    cdef Py_ssize_t a, i, f, hit_f = -1, hit_i = -1
    cdef double best = -INFINITY, cut, thr, lo, hi
    if n < 2 or k == 0:
        return -1, 0.0, -INFINITY
    if criterion < 0 or criterion > 3:
        raise ValueError(f"unknown criterion code {criterion}")
    # numpy's stable sort beats qsort with a comparator callback and keeps
    # the same ascending-index tie order
    sub = np.asarray(X)[np.asarray(samples)][:, np.asarray(features)]
    cdef Py_ssize_t[:, ::1] order = np.ascontiguousarray(np.argsort(sub, axis=0, kind="stable").T, dtype=np.intp)
    cdef Py_ssize_t j

    cdef Pair* work = <Pair*> malloc(n * sizeof(Pair))
    cdef double* xs = <double*> malloc(k * n * sizeof(double))
    cdef double* ys = <double*> malloc(n * sizeof(double))
    cdef double* imps = <double*> malloc(k * (n - 1) * sizeof(double))
    cdef double* scratch = <double*> malloc(3 * n * sizeof(double))
    cdef Py_ssize_t* rank = <Py_ssize_t*> malloc(n * sizeof(Py_ssize_t))
    cdef double* yr = <double*> malloc((n + 1) * sizeof(double))
    cdef long* cnt = <long*> malloc((n + 1) * sizeof(long))
    cdef double* sm = <double*> malloc((n + 1) * sizeof(double))
    cdef char* usable = <char*> malloc(k * sizeof(char))
    if (work == NULL or xs == NULL or ys == NULL or imps == NULL
            or scratch == NULL or rank == NULL or yr == NULL or cnt == NULL
            or sm == NULL or usable == NULL):
        free(work); free(xs); free(ys); free(imps); free(scratch)
        free(rank); free(yr); free(cnt); free(sm); free(usable)
        raise MemoryError()

    try:
        with nogil:
            for a in range(k):
                f = features[a]
                for i in range(n):
                    j = samples[order[a, i]]
                    xs[a * n + i] = X[j, f]
                    ys[i] = y[j]
                usable[a] = xs[a * n] < xs[a * n + n - 1]
                if not usable[a]:
                    continue
                improvements(ys, n, criterion, imps + a * (n - 1), scratch, work, rank, yr, cnt, sm)
                for i in range(1, n):
                    if not (xs[a * n + i - 1] < xs[a * n + i]):
                        imps[a * (n - 1) + i - 1] = -INFINITY
                    elif imps[a * (n - 1) + i - 1] > best:
                        best = imps[a * (n - 1) + i - 1]
            if best > -INFINITY:
                cut = best - tol
                for a in range(k):
                    if not usable[a]:
                        continue
                    for i in range(1, n):
                        if imps[a * (n - 1) + i - 1] >= cut:
                            hit_f = a
                            hit_i = i
                            break
                    if hit_f >= 0:
                        break
        if hit_f < 0:
            return -1, 0.0, -INFINITY
        lo = xs[hit_f * n + hit_i - 1]
        hi = xs[hit_f * n + hit_i]
        thr = (lo + hi) / 2.0
        if thr >= hi:
            thr = lo
        return int(features[hit_f]), thr, imps[hit_f * (n - 1) + hit_i - 1]
    finally:
        free(work); free(xs); free(ys); free(imps); free(scratch)
        free(rank); free(yr); free(cnt); free(sm); free(usable)


def apply(const Py_ssize_t[::1] feature, const double[::1] threshold,
          const Py_ssize_t[::1] left, const Py_ssize_t[::1] right,
          const double[:, ::1] X):
    cdef Py_ssize_t n = X.shape[0], r, node
    out = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] o = out
    with nogil:
        for r in range(n):
            node = 0
            while feature[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            o[r] = node
    return out


def explain(const Py_ssize_t[::1] feature, const double[::1] threshold,
            const Py_ssize_t[::1] left, const Py_ssize_t[::1] right,
            const double[::1] node_score, const double[:, ::1] X):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], r, node, child, f
    out = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for r in range(n):
            node = 0
            while feature[node] >= 0:
                f = feature[node]
                if X[r, f] <= threshold[node]:
                    child = left[node]
                else:
                    child = right[node]
                o[r, f] += fabs(node_score[node] - node_score[child])
                node = child
    return out
