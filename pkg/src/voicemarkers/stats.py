"""Covariate-adjusted association statistics and multiple-testing control.

partial_spearman and ancova_eta implement the rank-based partial
correlation and the one-way ANCOVA effect size; bh_adjust is the
Benjamini-Hochberg step-up; paired_t and agreement compare the two
elicitation conditions feature-wise.
"""

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import DataError

__all__ = [
    "partial_spearman", "ancova_eta", "bh_adjust", "paired_t", "agreement",
    "StatsReport", "feature_stats", "significance_marker",
]


def _rank(a):
    return sps.rankdata(a, method="average")


def _complete_rows(columns):
    mask = np.ones(len(columns[0]), bool)
    for c in columns:
        mask &= np.isfinite(c)
    return mask


def partial_spearman(x, y, covariates=None):
    """Spearman correlation of x and y after removing rank-space covariate
    effects; p from a t distribution with n - k - 2 degrees of freedom.

    Constant x or y after ranking is undefined and returned as (nan, nan).
    """
    x = np.asarray(x, np.float64)
    y = np.asarray(y, np.float64)
    cov = (np.empty((len(x), 0)) if covariates is None
           else np.atleast_2d(np.asarray(covariates, np.float64)))
    if cov.shape[0] != len(x):
        cov = cov.T
    k = cov.shape[1]
    mask = _complete_rows([x, y] + [cov[:, j] for j in range(k)])
    x, y, cov = x[mask], y[mask], cov[mask]
    n = len(x)
    if n < k + 3:
        raise DataError("need at least %d complete rows, got %d"
                        % (k + 3, n))
    rx, ry = _rank(x), _rank(y)
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        return float("nan"), float("nan")
    design = np.column_stack([np.ones(n)] + [_rank(cov[:, j])
                                             for j in range(k)])
    bx, *_ = np.linalg.lstsq(design, rx, rcond=None)
    by, *_ = np.linalg.lstsq(design, ry, rcond=None)
    ex, ey = rx - design @ bx, ry - design @ by
    sx, sy = float(ex @ ex), float(ey @ ey)
    # residuals swallowed by the covariates mean no association is left;
    # correlating what is numerically noise would report garbage
    tiny_x = sx <= 1e-12 * float(np.sum((rx - rx.mean()) ** 2))
    tiny_y = sy <= 1e-12 * float(np.sum((ry - ry.mean()) ** 2))
    if tiny_x or tiny_y:
        return 0.0, 1.0
    rho = float((ex @ ey) / math.sqrt(sx * sy))
    rho = max(-1.0, min(1.0, rho))
    dof = n - k - 2
    if abs(rho) >= 1.0:
        return rho, 0.0
    t = rho * math.sqrt(dof / (1.0 - rho * rho))
    p = 2.0 * float(sps.t.sf(abs(t), dof))
    return rho, p


def ancova_eta(y, group, covariates=None):
    """Partial eta-squared of the group factor, adjusting for covariates.

    eta_p^2 = SS_group / (SS_group + SS_residual(full)); p from
    F(1, n - k - 2).
    """
    y = np.asarray(y, np.float64)
    g = np.asarray(group, np.float64)
    cov = (np.empty((len(y), 0)) if covariates is None
           else np.atleast_2d(np.asarray(covariates, np.float64)))
    if cov.shape[0] != len(y):
        cov = cov.T
    k = cov.shape[1]
    mask = _complete_rows([y, g] + [cov[:, j] for j in range(k)])
    y, g, cov = y[mask], g[mask], cov[mask]
    n = len(y)
    if np.unique(g).size < 2:
        raise DataError("both groups must be represented")
    if n < k + 4:
        raise DataError("need at least %d complete rows, got %d"
                        % (k + 4, n))
    reduced = np.column_stack([np.ones(n), cov])
    full = np.column_stack([reduced, g])
    rank_full = np.linalg.matrix_rank(full)
    if rank_full < full.shape[1]:
        raise DataError("rank-deficient design: %d columns, rank %d "
                        "(a covariate is collinear with the intercept "
                        "or group)" % (full.shape[1], rank_full))

    def rss(design):
        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
        r = y - design @ beta
        return float(r @ r)

    rss_red, rss_full = rss(reduced), rss(full)
    ss_group = max(rss_red - rss_full, 0.0)
    denom = ss_group + rss_full
    eta = ss_group / denom if denom > 0 else 0.0
    dof = n - k - 2
    if rss_full <= 0:
        return min(eta, 1.0), 0.0
    f = ss_group / (rss_full / dof)
    p = float(sps.f.sf(f, 1, dof))
    return eta, p


def bh_adjust(p_values):
    """Benjamini-Hochberg step-up adjusted p-values, input order kept."""
    p = np.asarray(p_values, np.float64)
    if p.size == 0:
        return np.array([])
    if np.nanmin(p) < 0 or np.nanmax(p) > 1:
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order] * m / np.arange(1, m + 1)
    adjusted = np.minimum.accumulate(ranked[::-1])[::-1]
    adjusted = np.clip(adjusted, 0.0, 1.0)
    out = np.empty(m)
    out[order] = adjusted
    return out


def paired_t(a, b):
    """Two-sided paired t-test; zero-variance differences are an error."""
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    if a.shape != b.shape or a.size < 3:
        raise DataError("paired_t needs two equal-length vectors, n >= 3")
    d = a - b
    sd = d.std(ddof=1)
    if sd == 0:
        raise DataError("paired differences have zero variance")
    n = d.size
    t = float(d.mean() / (sd / math.sqrt(n)))
    p = 2.0 * float(sps.t.sf(abs(t), n - 1))
    return t, p


def agreement(a, b):
    """Plain Spearman correlation between two coefficient vectors."""
    return partial_spearman(a, b, covariates=None)


def significance_marker(p):
    if not np.isfinite(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass
class StatsReport:
    """Per feature x condition association battery plus the
    cross-condition comparisons."""
    feature_names: tuple
    conditions: tuple
    rows: list        # dicts: condition, feature, rho, rho_p, rho_p_adj,
                      #        eta_sq, eta_p, eta_p_adj
    paired: dict      # statistic -> {"t": ..., "p": ...}
    agreement: dict   # statistic -> {"rho": ..., "p": ...}

    def to_json(self, path):
        doc = {"feature_names": list(self.feature_names),
               "conditions": list(self.conditions),
               "rows": self.rows, "paired": self.paired,
               "agreement": self.agreement}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)

    def to_csv(self, path):
        cols = ("condition", "feature", "rho", "rho_p", "rho_p_adj",
                "eta_sq", "eta_p", "eta_p_adj")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols + ("rho_sig", "eta_sig"))
            for r in self.rows:
                w.writerow([r["condition"], r["feature"]]
                           + ["%r" % r[c] for c in cols[2:]]
                           + [significance_marker(r["rho_p_adj"]),
                              significance_marker(r["eta_p_adj"])])


def feature_stats(datasets, acoustic_names, covariate_names=("age", "sex",
                                                             "education")):
    """The full battery over one dataset per condition.

    Correlations target the ECog score, ANCOVA the group label; BH runs
    per (condition, statistic) family of len(acoustic_names) features.
    Cross-condition paired tests compare |rho| and eta_p^2 feature-wise.
    """
    rows = []
    by_cond = {}
    for ds in datasets:
        name_idx = {n: j for j, n in enumerate(ds.feature_names)}
        cov = np.column_stack([ds.X[:, name_idx[c]]
                               for c in covariate_names])
        rho_list, rho_p, eta_list, eta_p = [], [], [], []
        for feat in acoustic_names:
            xj = ds.X[:, name_idx[feat]]
            rho, pr = partial_spearman(xj, ds.ecog, cov)
            eta, pe = ancova_eta(xj, ds.y, cov)
            rho_list.append(rho)
            rho_p.append(pr)
            eta_list.append(eta)
            eta_p.append(pe)
        rho_adj = bh_adjust(np.nan_to_num(np.array(rho_p), nan=1.0))
        eta_adj = bh_adjust(np.nan_to_num(np.array(eta_p), nan=1.0))
        for j, feat in enumerate(acoustic_names):
            rows.append({
                "condition": ds.condition, "feature": feat,
                "rho": rho_list[j], "rho_p": rho_p[j],
                "rho_p_adj": float(rho_adj[j]),
                "eta_sq": eta_list[j], "eta_p": eta_p[j],
                "eta_p_adj": float(eta_adj[j]),
            })
        by_cond[ds.condition] = (np.array(rho_list), np.array(eta_list))

    paired = {}
    agree = {}
    if len(datasets) == 2:
        (ra, ea), (rb, eb) = (by_cond[ds.condition] for ds in datasets)
        # the paired comparison uses magnitudes; signs vary per feature
        t, p = paired_t(np.abs(ra), np.abs(rb))
        paired["abs_rho"] = {"t": t, "p": p}
        t, p = paired_t(ea, eb)
        paired["eta_sq"] = {"t": t, "p": p}
        rho, p = agreement(ra, rb)
        agree["rho"] = {"rho": rho, "p": p}
        rho, p = agreement(ea, eb)
        agree["eta_sq"] = {"rho": rho, "p": p}
    return StatsReport(feature_names=tuple(acoustic_names),
                       conditions=tuple(ds.condition for ds in datasets),
                       rows=rows, paired=paired, agreement=agree)
