"""Pure-numpy tree kernels, the fallback backend.

Same contracts as ``_numba_backend``. Split scans are vectorized with
cumulative sums; tie-breaking matches the compiled loops (first strict
improvement in feature-visit order, first position within a feature), and
the xorshift64* feature-subsampling stream is bit-identical, so both
backends grow the same trees.
"""

import numpy as np

XS_MASK = (1 << 64) - 1
XS_MULT = 0x2545F4914F6CDD1D


def _xs64(state):
    state ^= state >> 12
    state = (state ^ (state << 25)) & XS_MASK
    state ^= state >> 27
    return state


def gini_tree_importances(X, y, boot, mtry, max_depth, min_leaf, seed, imp):
    """Grow one CART-style classification tree on a bootstrap sample and add
    its impurity-decrease importances into ``imp`` (length n_features)."""
    n_feat = X.shape[1]
    idx = boot.copy()
    n_total = idx.shape[0]

    pool = np.arange(n_feat)
    state = (int(seed) * XS_MULT + 0x9E3779B97F4A7C15) & XS_MASK
    k_try = min(int(mtry), n_feat)

    stack = [(0, n_total, 0)]
    while stack:
        start, end, depth = stack.pop()
        m = end - start
        node_rows = idx[start:end]
        c1 = int(y[node_rows].sum())
        c0 = m - c1
        if c0 == 0 or c1 == 0 or m < 2 * min_leaf or depth >= max_depth:
            continue
        p0 = c0 / m
        p1 = c1 / m
        gini_parent = 1.0 - p0 * p0 - p1 * p1

        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        nl = np.arange(1, m)
        nr = m - nl
        for j in range(k_try):
            state = _xs64(state)
            swap = j + state % (n_feat - j)
            pool[j], pool[swap] = pool[swap], pool[j]
            f = pool[j]

            vals = X[node_rows, f]
            order = np.argsort(vals)
            sv = vals[order]
            cum1 = np.cumsum(y[node_rows][order])[:-1]

            ok = (sv[:-1] != sv[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
            if not ok.any():
                continue
            ql1 = cum1 / nl
            ql0 = (nl - cum1) / nl
            qr1 = (c1 - cum1) / nr
            qr0 = (nr - (c1 - cum1)) / nr
            gini_l = 1.0 - ql0 * ql0 - ql1 * ql1
            gini_r = 1.0 - qr0 * qr0 - qr1 * qr1
            gain = gini_parent - (nl * gini_l + nr * gini_r) / m
            gain[~ok] = -np.inf
            i = int(np.argmax(gain))
            if gain[i] > best_gain:
                best_gain = float(gain[i])
                best_feat = int(f)
                best_thr = 0.5 * (sv[i] + sv[i + 1])

        if best_feat < 0:
            continue
        imp[best_feat] += (m / n_total) * best_gain

        mask = X[node_rows, best_feat] <= best_thr
        idx[start:end] = np.concatenate([node_rows[mask], node_rows[~mask]])
        split_at = start + int(mask.sum())
        stack.append((split_at, end, depth + 1))
        stack.append((start, split_at, depth + 1))


def _soft_threshold(gsum, alpha):
    if gsum > alpha:
        return gsum - alpha
    if gsum < -alpha:
        return gsum + alpha
    return 0.0


def _grad_best_split(X, g, h, node_rows, cols, reg_lambda, reg_alpha,
                     min_child_weight, min_child_samples, gsum, hsum):
    m = node_rows.shape[0]
    tg = _soft_threshold(gsum, reg_alpha)
    score_parent = tg * tg / (hsum + reg_lambda)

    best_gain = 0.0
    best_feat = -1
    best_thr = 0.0
    nl = np.arange(1, m)
    nr = m - nl
    for f in cols:
        vals = X[node_rows, f]
        order = np.argsort(vals)
        sv = vals[order]
        gl = np.cumsum(g[node_rows][order])[:-1]
        hl = np.cumsum(h[node_rows][order])[:-1]
        gr = gsum - gl
        hr = hsum - hl

        ok = ((sv[:-1] != sv[1:])
              & (nl >= min_child_samples) & (nr >= min_child_samples)
              & (hl >= min_child_weight) & (hr >= min_child_weight))
        if not ok.any():
            continue
        tl = np.where(gl > reg_alpha, gl - reg_alpha,
                      np.where(gl < -reg_alpha, gl + reg_alpha, 0.0))
        tr = np.where(gr > reg_alpha, gr - reg_alpha,
                      np.where(gr < -reg_alpha, gr + reg_alpha, 0.0))
        score = tl * tl / (hl + reg_lambda) + tr * tr / (hr + reg_lambda)
        gain = 0.5 * (score - score_parent)
        gain[~ok] = -np.inf
        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            best_gain = float(gain[i])
            best_feat = int(f)
            best_thr = 0.5 * (sv[i] + sv[i + 1])
    return best_gain, best_feat, best_thr


def gbt_build_tree(X, g, h, rows, cols, reg_lambda, reg_alpha, gamma,
                   min_child_weight, min_child_samples, max_depth, max_leaves):
    """Grow one regression tree on (g, h); see the numba twin for semantics."""
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
        bg, bf, bt = _grad_best_split(X, g, h, idx[:m_total], cols, reg_lambda,
                                      reg_alpha, min_child_weight,
                                      min_child_samples, gsum, hsum)
        nd_gain[0] = bg - gamma
        nd_feat[0] = bf
        nd_thr[0] = bt
    nd_open[0] = 1
    n_leaves = 1
    leaf_budget = max_leaves if max_leaves > 0 else m_total + 1

    while n_leaves < leaf_budget:
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

        node_rows = idx[start:end]
        mask = X[node_rows, f] <= t
        idx[start:end] = np.concatenate([node_rows[mask], node_rows[~mask]])
        split_at = start + int(mask.sum())
        gl = float(g[idx[start:split_at]].sum())
        hl = float(h[idx[start:split_at]].sum())

        lchild = n_nodes
        rchild = n_nodes + 1
        n_nodes += 2
        feat[node] = f
        thr[node] = t
        left[node] = lchild
        right[node] = rchild

        nd_start[lchild] = start
        nd_end[lchild] = split_at
        nd_depth[lchild] = nd_depth[node] + 1
        nd_g[lchild] = gl
        nd_h[lchild] = hl
        nd_start[rchild] = split_at
        nd_end[rchild] = end
        nd_depth[rchild] = nd_depth[node] + 1
        nd_g[rchild] = nd_g[node] - gl
        nd_h[rchild] = nd_h[node] - hl

        for child in (lchild, rchild):
            nd_open[child] = 1
            nd_gain[child] = -1.0
            nd_feat[child] = -1
            if nd_depth[child] < max_depth:
                cg, cf, ct = _grad_best_split(
                    X, g, h, idx[nd_start[child]:nd_end[child]], cols,
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

    return (feat[:n_nodes], thr[:n_nodes], left[:n_nodes], right[:n_nodes],
            value[:n_nodes], n_nodes)


def ensemble_margin(feat, thr, left, right, value, roots, X, out):
    """Sum leaf values over all trees (rooted at ``roots``) for each row."""
    n = X.shape[0]
    out[:] = 0.0
    for t in range(roots.shape[0]):
        node = np.full(n, roots[t], np.int64)
        active = feat[node] >= 0
        while active.any():
            cur = node[active]
            f = feat[cur]
            go_left = X[np.flatnonzero(active), f] <= thr[cur]
            node[active] = np.where(go_left, left[cur], right[cur])
            active = feat[node] >= 0
        out += value[node]
