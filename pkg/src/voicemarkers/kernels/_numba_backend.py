"""Numba-compiled tree kernels.

Mirrors ``_numpy_backend`` exactly: same split rules, same tie-breaking
(first strict improvement wins), same xorshift64* stream for feature
subsampling, so the two backends grow identical trees on identical inputs.
"""

import numpy as np
from numba import njit

XS_MULT = np.uint64(0x2545F4914F6CDD1D)


@njit(cache=True, inline="always")
def _xs64(state):
    state ^= state >> np.uint64(12)
    state ^= state << np.uint64(25)
    state ^= state >> np.uint64(27)
    return state


@njit(cache=True)
def gini_tree_importances(X, y, boot, mtry, max_depth, min_leaf, seed, imp):
    """Grow one CART-style classification tree on a bootstrap sample and add
    its impurity-decrease importances into ``imp`` (length n_features)."""
    n_feat = X.shape[1]
    idx = boot.copy()
    n_total = idx.shape[0]

    cap = 2 * n_total + 2
    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    top = 0
    st_start[0] = 0
    st_end[0] = n_total
    st_depth[0] = 0
    top = 1

    pool = np.arange(n_feat)
    state = np.uint64(seed) * XS_MULT + np.uint64(0x9E3779B97F4A7C15)

    while top > 0:
        top -= 1
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        m = end - start

        c1 = 0
        for i in range(start, end):
            c1 += y[idx[i]]
        c0 = m - c1
        if c0 == 0 or c1 == 0 or m < 2 * min_leaf or depth >= max_depth:
            continue
        p0 = c0 / m
        p1 = c1 / m
        gini_parent = 1.0 - p0 * p0 - p1 * p1

        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        k_try = mtry if mtry < n_feat else n_feat
        for j in range(k_try):
            state = _xs64(state)
            swap = j + int(state % np.uint64(n_feat - j))
            tmp = pool[j]
            pool[j] = pool[swap]
            pool[swap] = tmp
            f = pool[j]

            vals = np.empty(m, np.float64)
            for i in range(m):
                vals[i] = X[idx[start + i], f]
            order = np.argsort(vals)

            nl1 = 0
            for i in range(m - 1):
                nl1 += y[idx[start + order[i]]]
                vlo = vals[order[i]]
                vhi = vals[order[i + 1]]
                if vlo == vhi:
                    continue
                nl = i + 1
                nr = m - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                nr1 = c1 - nl1
                ql1 = nl1 / nl
                ql0 = (nl - nl1) / nl
                qr1 = nr1 / nr
                qr0 = (nr - nr1) / nr
                gini_l = 1.0 - ql0 * ql0 - ql1 * ql1
                gini_r = 1.0 - qr0 * qr0 - qr1 * qr1
                gain = gini_parent - (nl * gini_l + nr * gini_r) / m
                if gain > best_gain:
                    best_gain = gain
                    best_feat = f
                    best_thr = 0.5 * (vlo + vhi)

        if best_feat < 0:
            continue
        imp[best_feat] += (m / n_total) * best_gain

        # stable in-place partition by the chosen split
        buf = np.empty(m, np.int64)
        lo = 0
        hi = 0
        for i in range(start, end):
            if X[idx[i], best_feat] <= best_thr:
                buf[lo] = idx[i]
                lo += 1
        for i in range(start, end):
            if not (X[idx[i], best_feat] <= best_thr):
                buf[lo + hi] = idx[i]
                hi += 1
        for i in range(m):
            idx[start + i] = buf[i]
        split_at = start + lo

        # push right first so the left child pops next; the shared
        # feature-subsampling stream depends on the node visit order
        st_start[top] = split_at
        st_end[top] = end
        st_depth[top] = depth + 1
        top += 1
        st_start[top] = start
        st_end[top] = split_at
        st_depth[top] = depth + 1
        top += 1


@njit(cache=True, inline="always")
def _soft_threshold(gsum, alpha):
    if gsum > alpha:
        return gsum - alpha
    if gsum < -alpha:
        return gsum + alpha
    return 0.0


@njit(cache=True)
def _grad_best_split(X, g, h, idx, start, end, cols, reg_lambda, reg_alpha,
                     min_child_weight, min_child_samples, gsum, hsum):
    """Best second-order-gain split over the given columns for one node.

    Returns (gain, feature, threshold); gain <= 0 means no admissible split.
    """
    m = end - start
    tg = _soft_threshold(gsum, reg_alpha)
    score_parent = tg * tg / (hsum + reg_lambda)

    best_gain = 0.0
    best_feat = -1
    best_thr = 0.0
    for jc in range(cols.shape[0]):
        f = cols[jc]
        vals = np.empty(m, np.float64)
        for i in range(m):
            vals[i] = X[idx[start + i], f]
        order = np.argsort(vals)

        gl = 0.0
        hl = 0.0
        for i in range(m - 1):
            r = idx[start + order[i]]
            gl += g[r]
            hl += h[r]
            vlo = vals[order[i]]
            vhi = vals[order[i + 1]]
            if vlo == vhi:
                continue
            nl = i + 1
            nr = m - nl
            if nl < min_child_samples or nr < min_child_samples:
                continue
            gr = gsum - gl
            hr = hsum - hl
            if hl < min_child_weight or hr < min_child_weight:
                continue
            tl = _soft_threshold(gl, reg_alpha)
            tr = _soft_threshold(gr, reg_alpha)
            score = tl * tl / (hl + reg_lambda) + tr * tr / (hr + reg_lambda)
            gain = 0.5 * (score - score_parent)
            if gain > best_gain:
                best_gain = gain
                best_feat = f
                best_thr = 0.5 * (vlo + vhi)
    return best_gain, best_feat, best_thr


@njit(cache=True)
def gbt_build_tree(X, g, h, rows, cols, reg_lambda, reg_alpha, gamma,
                   min_child_weight, min_child_samples, max_depth, max_leaves):
    """Grow one regression tree on (g, h).

    max_leaves == 0: level-unlimited depth-wise growth bounded by max_depth.
    max_leaves  > 0: best-first (leaf-wise) growth bounded by max_leaves and
    max_depth. The split penalty ``gamma`` is subtracted from every gain.

    Returns (feat, thr, left, right, value, n_nodes); feat == -1 marks leaves
    and value holds the unshrunk leaf weight.
    """
    idx = rows.copy()
    m_total = idx.shape[0]
    cap = 2 * m_total + 2

    feat = np.full(cap, -1, np.int64)
    thr = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap, np.float64)

    nd_start = np.empty(cap, np.int64)
    nd_end = np.empty(cap, np.int64)
    nd_depth = np.empty(cap, np.int64)
    nd_g = np.empty(cap, np.float64)
    nd_h = np.empty(cap, np.float64)
    nd_gain = np.full(cap, -1.0, np.float64)
    nd_feat = np.full(cap, -1, np.int64)
    nd_thr = np.zeros(cap, np.float64)
    nd_open = np.zeros(cap, np.uint8)

    gsum = 0.0
    hsum = 0.0
    for i in range(m_total):
        gsum += g[idx[i]]
        hsum += h[idx[i]]

    nd_start[0] = 0
    nd_end[0] = m_total
    nd_depth[0] = 0
    nd_g[0] = gsum
    nd_h[0] = hsum
    n_nodes = 1

    if max_depth >= 1:
        bg, bf, bt = _grad_best_split(X, g, h, idx, 0, m_total, cols,
                                      reg_lambda, reg_alpha, min_child_weight,
                                      min_child_samples, gsum, hsum)
        nd_gain[0] = bg - gamma
        nd_feat[0] = bf
        nd_thr[0] = bt
    nd_open[0] = 1
    n_leaves = 1
    leaf_budget = max_leaves if max_leaves > 0 else m_total + 1

    while n_leaves < leaf_budget:
        # next node: highest penalized gain among open leaves
        best_node = -1
        best_gain = 0.0
        for node in range(n_nodes):
            if nd_open[node] == 1 and nd_feat[node] >= 0 and nd_gain[node] > best_gain:
                best_gain = nd_gain[node]
                best_node = node
        if best_node < 0:
            break

        node = best_node
        nd_open[node] = 0
        start = nd_start[node]
        end = nd_end[node]
        f = nd_feat[node]
        t = nd_thr[node]

        lo = start
        hi = end - 1
        while lo <= hi:
            if X[idx[lo], f] <= t:
                lo += 1
            else:
                tmp = idx[lo]
                idx[lo] = idx[hi]
                idx[hi] = tmp
                hi -= 1

        gl = 0.0
        hl = 0.0
        for i in range(start, lo):
            gl += g[idx[i]]
            hl += h[idx[i]]

        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        feat[node] = f
        thr[node] = t
        left[node] = lchild
        right[node] = rchild

        nd_start[lchild] = start
        nd_end[lchild] = lo
        nd_depth[lchild] = nd_depth[node] + 1
        nd_g[lchild] = gl
        nd_h[lchild] = hl
        nd_start[rchild] = lo
        nd_end[rchild] = end
        nd_depth[rchild] = nd_depth[node] + 1
        nd_g[rchild] = nd_g[node] - gl
        nd_h[rchild] = nd_h[node] - hl

        for child in range(lchild, rchild + 1):
            nd_open[child] = 1
            nd_gain[child] = -1.0
            nd_feat[child] = -1
            if nd_depth[child] < max_depth:
                cg, cf, ct = _grad_best_split(
                    X, g, h, idx, nd_start[child], nd_end[child], cols,
                    reg_lambda, reg_alpha, min_child_weight,
                    min_child_samples, nd_g[child], nd_h[child])
                nd_gain[child] = cg - gamma
                nd_feat[child] = cf
                nd_thr[child] = ct
        n_leaves += 1

    for node in range(n_nodes):
        if left[node] < 0:
            feat[node] = -1
            value[node] = -_soft_threshold(nd_g[node], reg_alpha) / (nd_h[node] + reg_lambda)

    return feat[:n_nodes], thr[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes], n_nodes


@njit(cache=True)
def ensemble_margin(feat, thr, left, right, value, roots, X, out):
    """Sum leaf values over all trees (rooted at ``roots``) for each row."""
    n = X.shape[0]
    n_trees = roots.shape[0]
    for r in range(n):
        s = 0.0
        for t in range(n_trees):
            node = roots[t]
            while feat[node] >= 0:
                if X[r, feat[node]] <= thr[node]:
                    node = left[node]
                else:
                    node = right[node]
            s += value[node]
        out[r] = s
