# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same signatures and semantics as ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

cdef double _PRUNE_SLACK = 1e-12


def var_recursion(const double[:, :, ::1] coeffs, double[:, ::1] out):
    cdef Py_ssize_t tau = coeffs.shape[0]
    cdef Py_ssize_t p = coeffs.shape[1]
    cdef Py_ssize_t T = out.shape[0]
    cdef Py_ssize_t t, lag, i, k, r
    cdef double acc
    # coefficient tensors are sparse: keep the nonzeros of each (lag, row)
    # in column order so the sums match the dense loop term by term
    nz = np.asarray(coeffs) != 0.0
    cdef Py_ssize_t[::1] start = np.concatenate(
        ([0], np.cumsum(nz.sum(axis=2).ravel()))).astype(np.intp)
    cdef Py_ssize_t[::1] col = np.nonzero(nz)[2].astype(np.intp)
    cdef double[::1] val = np.asarray(coeffs)[nz].copy()
    for t in range(T):
        for lag in range(1, tau + 1):
            if lag > t:
                break
            for i in range(p):
                r = (lag - 1) * p + i
                if start[r] == start[r + 1]:
                    continue
                acc = 0.0
                for k in range(start[r], start[r + 1]):
                    acc += val[k] * out[t - lag, col[k]]
                out[t, i] += acc


cdef inline double _soft(double x, double g) nogil:
    if x > g:
        return x - g
    if x < -g:
        return x + g
    return 0.0


def glasso_sweep(double[:, ::1] W, const double[:, ::1] S, double[:, ::1] B,
                 double gamma, double inner_tol, int inner_max_iter):
    cdef Py_ssize_t n = W.shape[0]
    cdef Py_ssize_t j, k, l
    cdef int it
    cdef double acc, old, new, d, dmax, wkk, change
    cdef double max_change = 0.0
    cdef double[::1] wb = np.empty(n, dtype=np.float64)

    for j in range(n):
        B[j, j] = 0.0
        for k in range(n):
            wb[k] = 0.0
        for l in range(n):
            d = B[j, l]
            if d != 0.0:
                for k in range(n):
                    wb[k] += W[k, l] * d
        wb[j] = 0.0
        for it in range(inner_max_iter):
            dmax = 0.0
            for k in range(n):
                if k == j:
                    continue
                old = B[j, k]
                wkk = W[k, k]
                new = _soft(S[k, j] - (wb[k] - wkk * old), gamma) / wkk
                if new != old:
                    d = new - old
                    for l in range(n):
                        wb[l] += W[l, k] * d
                    B[j, k] = new
                    if fabs(d) > dmax:
                        dmax = fabs(d)
            if dmax < inner_tol:
                break
        wb[j] = W[j, j]
        for k in range(n):
            if k == j:
                continue
            change = fabs(wb[k] - W[k, j])
            if change > max_change:
                max_change = change
            W[k, j] = wb[k]
            W[j, k] = wb[k]
    return max_change


cdef double _canonical_total(const double[:, ::1] w, Py_ssize_t* q):
    # sort four indices
    cdef Py_ssize_t s[4]
    cdef Py_ssize_t i, j, tmp
    for i in range(4):
        s[i] = q[i]
    for i in range(1, 4):
        j = i
        while j > 0 and s[j - 1] > s[j]:
            tmp = s[j]
            s[j] = s[j - 1]
            s[j - 1] = tmp
            j -= 1
    for i in range(4):
        q[i] = s[i]
    return (((((w[s[0], s[1]] + w[s[0], s[2]]) + w[s[1], s[2]]) + w[s[0], s[3]])
             + w[s[1], s[3]]) + w[s[2], s[3]])


cdef bint _lex_less(Py_ssize_t* a, Py_ssize_t* b):
    cdef int i
    for i in range(4):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


def tmfg_seed(const double[:, ::1] w):
    cdef Py_ssize_t n = w.shape[0]
    top3_arr = -np.sort(-np.asarray(w), axis=1)[:, :3].sum(axis=1)
    order_arr = np.argsort(-top3_arr, kind="stable").astype(np.intp)
    cdef const double[::1] top3 = top3_arr
    cdef const Py_ssize_t[::1] order = order_arr
    cdef double[::1] t = np.ascontiguousarray(top3_arr[order_arr])
    cdef Py_ssize_t a, b, c, d, i
    cdef Py_ssize_t best_quad[4]
    cdef Py_ssize_t quad[4]
    cdef double best, base, tail, total, lim, wab
    cdef const double* wa
    cdef const double* wb_
    cdef const double* wc

    for i in range(4):
        best_quad[i] = order[i]
    best = _canonical_total(w, best_quad)

    for a in range(n - 3):
        lim = best - _PRUNE_SLACK * (1.0 + fabs(best))
        if 0.5 * (t[a] + t[a + 1] + t[a + 2] + t[a + 3]) < lim:
            break
        for b in range(a + 1, n - 2):
            lim = best - _PRUNE_SLACK * (1.0 + fabs(best))
            if 0.5 * (t[a] + t[b] + t[b + 1] + t[b + 2]) < lim:
                break
            wab = w[order[a], order[b]]
            for c in range(b + 1, n - 1):
                lim = best - _PRUNE_SLACK * (1.0 + fabs(best))
                if 0.5 * (t[a] + t[b] + t[c] + t[c + 1]) < lim:
                    break
                base = wab + w[order[a], order[c]] + w[order[b], order[c]]
                wa = &w[order[a], 0]
                wb_ = &w[order[b], 0]
                wc = &w[order[c], 0]
                for d in range(c + 1, n):
                    tail = base + (wa[order[d]] + wb_[order[d]] + wc[order[d]])
                    lim = best - _PRUNE_SLACK * (1.0 + fabs(best))
                    if tail < lim:
                        continue
                    quad[0] = order[a]
                    quad[1] = order[b]
                    quad[2] = order[c]
                    quad[3] = order[d]
                    total = _canonical_total(w, quad)
                    if total > best or (total == best and _lex_less(quad, best_quad)):
                        best = total
                        for i in range(4):
                            best_quad[i] = quad[i]
    return (int(best_quad[0]), int(best_quad[1]), int(best_quad[2]), int(best_quad[3]))


cdef inline bint _face_less(Py_ssize_t[:, ::1] faces, Py_ssize_t x, Py_ssize_t y):
    cdef int i
    for i in range(3):
        if faces[x, i] != faces[y, i]:
            return faces[x, i] < faces[y, i]
    return False


cdef void _face_best(const double[:, ::1] w, Py_ssize_t[:, ::1] faces, Py_ssize_t k,
                     char[::1] remaining, Py_ssize_t[::1] best_v, double[::1] best_g):
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t v, fa = faces[k, 0], fb = faces[k, 1], fc = faces[k, 2]
    cdef Py_ssize_t bv = -1
    cdef double g, bg = 0.0
    for v in range(n):
        if not remaining[v]:
            continue
        g = (w[v, fa] + w[v, fb]) + w[v, fc]
        if bv < 0 or g > bg:
            bv = v
            bg = g
    best_v[k] = bv
    best_g[k] = bg


cdef inline void _sort3(Py_ssize_t[:, ::1] faces, Py_ssize_t k):
    cdef Py_ssize_t tmp
    if faces[k, 0] > faces[k, 1]:
        tmp = faces[k, 0]; faces[k, 0] = faces[k, 1]; faces[k, 1] = tmp
    if faces[k, 1] > faces[k, 2]:
        tmp = faces[k, 1]; faces[k, 1] = faces[k, 2]; faces[k, 2] = tmp
    if faces[k, 0] > faces[k, 1]:
        tmp = faces[k, 0]; faces[k, 0] = faces[k, 1]; faces[k, 1] = tmp


def tmfg_grow(const double[:, ::1] w, seed):
    cdef Py_ssize_t n = w.shape[0]
    s = sorted(int(v) for v in seed)
    vertices_arr = np.empty(n - 4, dtype=np.int64)
    separators_arr = np.empty((n - 4, 3), dtype=np.int64)
    if n == 4:
        return vertices_arr, separators_arr
    cdef long long[::1] vertices = vertices_arr
    cdef long long[:, ::1] separators = separators_arr
    cdef Py_ssize_t max_faces = 2 * n
    cdef Py_ssize_t[:, ::1] faces = np.zeros((max_faces, 3), dtype=np.intp)
    cdef Py_ssize_t[::1] best_v = np.zeros(max_faces, dtype=np.intp)
    cdef double[::1] best_g = np.zeros(max_faces, dtype=np.float64)
    cdef char[::1] remaining = np.ones(n, dtype=np.int8)
    cdef Py_ssize_t nf = 4, k, sel, v, fa, fb, fc, step
    cdef Py_ssize_t a = s[0], b = s[1], c = s[2], d = s[3]

    faces[0, 0] = a; faces[0, 1] = b; faces[0, 2] = c
    faces[1, 0] = a; faces[1, 1] = b; faces[1, 2] = d
    faces[2, 0] = a; faces[2, 1] = c; faces[2, 2] = d
    faces[3, 0] = b; faces[3, 1] = c; faces[3, 2] = d
    remaining[a] = 0; remaining[b] = 0; remaining[c] = 0; remaining[d] = 0
    for k in range(4):
        _face_best(w, faces, k, remaining, best_v, best_g)

    for step in range(n - 4):
        sel = 0
        for k in range(1, nf):
            if best_g[k] > best_g[sel] or (
                best_g[k] == best_g[sel]
                and (best_v[k] < best_v[sel]
                     or (best_v[k] == best_v[sel] and _face_less(faces, k, sel)))):
                sel = k
        v = best_v[sel]
        fa = faces[sel, 0]; fb = faces[sel, 1]; fc = faces[sel, 2]
        vertices[step] = v
        separators[step, 0] = fa; separators[step, 1] = fb; separators[step, 2] = fc
        remaining[v] = 0

        faces[sel, 0] = fa; faces[sel, 1] = fb; faces[sel, 2] = v
        faces[nf, 0] = fa; faces[nf, 1] = fc; faces[nf, 2] = v
        faces[nf + 1, 0] = fb; faces[nf + 1, 1] = fc; faces[nf + 1, 2] = v
        _sort3(faces, sel); _sort3(faces, nf); _sort3(faces, nf + 1)
        nf += 2
        if step == n - 5:
            break
        for k in range(nf):
            if best_v[k] == v or k == sel or k >= nf - 2:
                _face_best(w, faces, k, remaining, best_v, best_g)
    return vertices_arr, separators_arr
