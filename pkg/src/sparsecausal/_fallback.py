"""Pure-Python/numpy versions of the hot kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension. Both must produce the same answers; the TMFG kernels
must agree bit for bit (gains are summed in the same fixed order).
"""

import numpy as np

# Relative slack used when pruning the seed-clique search, so that exact ties
# are never discarded by round-off in the bound.
_PRUNE_SLACK = 1e-12


def var_recursion(coeffs, out):
    """Run ``z_t = sum_l A_l z_{t-l} + u_t`` in place.

    ``out`` holds the innovations on entry and the process on exit. Rows
    before the start are taken as zero.
    """
    tau = coeffs.shape[0]
    for t in range(out.shape[0]):
        for lag in range(1, min(tau, t) + 1):
            out[t] += coeffs[lag - 1] @ out[t - lag]


def _soft(x, g):
    if x > g:
        return x - g
    if x < -g:
        return x + g
    return 0.0


def glasso_sweep(W, S, B, gamma, inner_tol, inner_max_iter):
    """One pass of block coordinate descent over all columns.

    ``W`` is the running covariance estimate (diagonal held at S_jj + gamma),
    ``B[j]`` the lasso coefficients of column ``j``. Both are updated in place.
    Returns the largest absolute change applied to an off-diagonal of ``W``.
    """
    n = W.shape[0]
    max_change = 0.0
    for j in range(n):
        beta = B[j]
        beta[j] = 0.0
        wb = W @ beta
        wb[j] = 0.0
        for _ in range(inner_max_iter):
            dmax = 0.0
            for k in range(n):
                if k == j:
                    continue
                old = beta[k]
                wkk = W[k, k]
                new = _soft(S[k, j] - (wb[k] - wkk * old), gamma) / wkk
                if new != old:
                    d = new - old
                    wb += W[:, k] * d
                    beta[k] = new
                    if abs(d) > dmax:
                        dmax = abs(d)
            if dmax < inner_tol:
                break
        wb[j] = W[j, j]
        change = np.abs(wb - W[:, j])
        change[j] = 0.0
        max_change = max(max_change, float(change.max()))
        W[:, j] = wb
        W[j, :] = wb
    return max_change


def _canonical_total(w, quad):
    a, b, c, d = sorted(quad)
    return (((((w[a, b] + w[a, c]) + w[b, c]) + w[a, d]) + w[b, d]) + w[c, d])


def tmfg_seed(w):
    """Exact maximum-weight 4-clique of the complete graph with weights ``w``.

    Branch and bound: each vertex contributes at most the sum of its three
    heaviest edges, and the clique weight is half the sum of the vertex
    contributions. Ties go to the lexicographically smallest vertex tuple.
    """
    n = w.shape[0]
    top3 = -np.sort(-w, axis=1)[:, :3].sum(axis=1)
    order = np.argsort(-top3, kind="stable")
    t = top3[order]
    ws = w[np.ix_(order, order)]

    # greedy start: the four strongest vertices
    best_quad = tuple(sorted(int(v) for v in order[:4]))
    best = _canonical_total(w, best_quad)

    def pruned(ub):
        return ub < best - _PRUNE_SLACK * (1.0 + abs(best))

    for a in range(n - 3):
        if pruned(0.5 * (t[a] + t[a + 1] + t[a + 2] + t[a + 3])):
            break
        for b in range(a + 1, n - 2):
            if pruned(0.5 * (t[a] + t[b] + t[b + 1] + t[b + 2])):
                break
            wab = ws[a, b]
            for c in range(b + 1, n - 1):
                if pruned(0.5 * (t[a] + t[b] + t[c] + t[c + 1])):
                    break
                base = wab + ws[a, c] + ws[b, c]
                tail = base + (ws[a, c + 1:] + ws[b, c + 1:] + ws[c, c + 1:])
                cand = np.nonzero(~(tail < best - _PRUNE_SLACK * (1.0 + abs(best))))[0]
                for off in cand:
                    d = c + 1 + int(off)
                    quad = tuple(sorted((int(order[a]), int(order[b]),
                                         int(order[c]), int(order[d]))))
                    total = _canonical_total(w, quad)
                    if total > best or (total == best and quad < best_quad):
                        best, best_quad = total, quad
    return best_quad


def _face_best(w, face, remaining_idx):
    a, b, c = face
    gains = (w[remaining_idx, a] + w[remaining_idx, b]) + w[remaining_idx, c]
    k = int(np.argmax(gains))  # first maximum = smallest vertex index
    return int(remaining_idx[k]), float(gains[k])


def tmfg_grow(w, seed):
    """Greedy TMFG insertion starting from the 4-clique ``seed``.

    Returns ``(vertices, separators)``: the inserted vertex at each step and
    the triangular face it was attached to (sorted triple).
    """
    n = w.shape[0]
    a, b, c, d = sorted(int(v) for v in seed)
    faces = [(a, b, c), (a, b, d), (a, c, d), (b, c, d)]
    remaining = np.ones(n, dtype=bool)
    remaining[[a, b, c, d]] = False
    vertices = np.empty(n - 4, dtype=np.int64)
    separators = np.empty((n - 4, 3), dtype=np.int64)
    if n == 4:
        return vertices, separators

    idx = np.nonzero(remaining)[0]
    best_v = []
    best_g = []
    for f in faces:
        v, g = _face_best(w, f, idx)
        best_v.append(v)
        best_g.append(g)

    for step in range(n - 4):
        # argmin over (-gain, vertex, face)
        sel = 0
        for k in range(1, len(faces)):
            if best_g[k] > best_g[sel] or (
                best_g[k] == best_g[sel]
                and (best_v[k] < best_v[sel]
                     or (best_v[k] == best_v[sel] and faces[k] < faces[sel]))
            ):
                sel = k
        v = best_v[sel]
        fa, fb, fc = faces[sel]
        vertices[step] = v
        separators[step] = (fa, fb, fc)
        remaining[v] = False

        new_faces = [tuple(sorted(f)) for f in ((fa, fb, v), (fa, fc, v), (fb, fc, v))]
        faces[sel] = new_faces[0]
        faces.extend(new_faces[1:])
        best_v.extend([0, 0])
        best_g.extend([0.0, 0.0])
        if step == n - 5:
            break
        idx = np.nonzero(remaining)[0]
        stale = [k for k in range(len(faces)) if best_v[k] == v]
        for k in (sel, len(faces) - 2, len(faces) - 1):
            if k not in stale:
                stale.append(k)
        for k in stale:
            best_v[k], best_g[k] = _face_best(w, faces[k], idx)
    return vertices, separators
