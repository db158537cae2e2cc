"""k-nearest neighbors, penalized logistic regression, and a kernel SVM.

All three operate on dense standardized matrices and expose the same
surface: fit(X, y), predict(X), and decision_scores(X) giving a real
score that increases with the positive class.
"""

import numpy as np

__all__ = ["KnnClassifier", "LogisticClassifier", "SvmClassifier"]


class KnnClassifier:
    def __init__(self, n_neighbors=5, weights="uniform", metric="euclidean",
                 minkowski_p=3.0):
        self.k = int(n_neighbors)
        self.weights = weights
        self.metric = metric
        self.p = float(minkowski_p)

    def fit(self, X, y):
        self._X = np.asarray(X, np.float64)
        self._y = np.asarray(y, np.int64)
        return self

    def _distances(self, X):
        a = X[:, None, :]
        b = self._X[None, :, :]
        if self.metric == "euclidean":
            return np.sqrt(((a - b) ** 2).sum(axis=2))
        if self.metric == "manhattan":
            return np.abs(a - b).sum(axis=2)
        return (np.abs(a - b) ** self.p).sum(axis=2) ** (1.0 / self.p)

    def decision_scores(self, X):
        """Weighted vote share of the positive class among the k nearest."""
        X = np.asarray(X, np.float64)
        d = self._distances(X)
        k = min(self.k, self._X.shape[0])
        scores = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            # stable argsort: distance ties resolve to the lower train index
            nn = np.argsort(d[i], kind="stable")[:k]
            dn = d[i, nn]
            if self.weights == "distance":
                if (dn == 0.0).any():
                    w = (dn == 0.0).astype(np.float64)
                else:
                    w = 1.0 / dn
            else:
                w = np.ones(k)
            scores[i] = float(w[self._y[nn] == 1].sum() / w.sum())
        return scores

    def predict(self, X):
        # exact .5 vote splits fall to the low class
        return (self.decision_scores(X) > 0.5).astype(np.int64)


class LogisticClassifier:
    """Elastic-net logistic regression fitted with FISTA proximal gradient.

    Minimizes mean log-loss + (1/(n C)) * [l1_ratio*|w|_1
    + (1-l1_ratio)/2*|w|^2] with an unpenalized intercept; penalty "none"
    drops the regularizer entirely.
    """

    def __init__(self, penalty="l2", C=1.0, l1_ratio=0.5, max_iter=2000,
                 tol=1e-8):
        self.penalty = penalty
        self.C = float(C)
        self.l1_ratio = float(l1_ratio)
        self.max_iter = int(max_iter)
        self.tol = float(tol)

    def _lambdas(self, n):
        if self.penalty == "none":
            return 0.0, 0.0
        scale = 1.0 / (n * self.C)
        if self.penalty == "l1":
            return scale, 0.0
        if self.penalty == "l2":
            return 0.0, scale
        return scale * self.l1_ratio, scale * (1.0 - self.l1_ratio)

    def fit(self, X, y):
        X = np.asarray(X, np.float64)
        y = np.asarray(y, np.float64)
        n, p = X.shape
        l1, l2 = self._lambdas(n)
        Xb = np.hstack([X, np.ones((n, 1))])
        # Lipschitz bound for the mean-logloss gradient plus the l2 term
        L = np.linalg.norm(Xb, 2) ** 2 / (4.0 * n) + l2
        w = np.zeros(p + 1)
        z = w.copy()
        t_mom = 1.0
        last = np.inf
        for it in range(self.max_iter):
            m = Xb @ z
            pr = 1.0 / (1.0 + np.exp(-np.clip(m, -500, 500)))
            grad = Xb.T @ (pr - y) / n
            grad[:p] += l2 * z[:p]
            w_new = z - grad / L
            if l1 > 0:
                head = w_new[:p]
                w_new[:p] = np.sign(head) * np.maximum(np.abs(head) - l1 / L,
                                                       0.0)
            t_new = (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom)) / 2.0
            z = w_new + ((t_mom - 1.0) / t_new) * (w_new - w)
            w, t_mom = w_new, t_new
            if it % 10 == 0:
                obj = self._objective(Xb, y, w, l1, l2, p)
                if abs(last - obj) < self.tol * max(1.0, abs(obj)):
                    break
                last = obj
        self.coef_ = w[:p]
        self.intercept_ = float(w[p])
        return self

    @staticmethod
    def _objective(Xb, y, w, l1, l2, p):
        m = Xb @ w
        loss = np.mean(np.logaddexp(0.0, m) - y * m)
        return (loss + l1 * np.abs(w[:p]).sum()
                + 0.5 * l2 * float(w[:p] @ w[:p]))

    def decision_scores(self, X):
        return np.asarray(X, np.float64) @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_scores(X) > 0.0).astype(np.int64)


class SvmClassifier:
    """C-SVM solved in the dual by projected gradient ascent.

    The bias is absorbed by adding 1 to the kernel, which removes the
    equality constraint and leaves a box-constrained QP.
    """

    def __init__(self, kernel="rbf", C=1.0, gamma=0.1, max_iter=1000,
                 tol=1e-6):
        self.kernel = kernel
        self.C = float(C)
        self.gamma = float(gamma)
        self.max_iter = int(max_iter)
        self.tol = float(tol)

    def _gram(self, A, B):
        if self.kernel == "linear":
            k = A @ B.T
        else:
            d2 = (np.sum(A * A, axis=1)[:, None]
                  + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T))
            k = np.exp(-self.gamma * np.maximum(d2, 0.0))
        return k + 1.0

    def fit(self, X, y):
        X = np.asarray(X, np.float64)
        self._X = X
        self._sy = np.where(np.asarray(y) == 1, 1.0, -1.0)
        n = X.shape[0]
        Q = self._gram(X, X) * np.outer(self._sy, self._sy)
        step = 1.0 / max(float(np.linalg.norm(Q, 2)), 1e-12)
        alpha = np.zeros(n)
        for _ in range(self.max_iter):
            grad = 1.0 - Q @ alpha
            new = np.clip(alpha + step * grad, 0.0, self.C)
            if float(np.max(np.abs(new - alpha))) < self.tol * self.C:
                alpha = new
                break
            alpha = new
        self._alpha = alpha
        return self

    def decision_scores(self, X):
        k = self._gram(np.asarray(X, np.float64), self._X)
        return k @ (self._alpha * self._sy)

    def predict(self, X):
        return (self.decision_scores(X) > 0.0).astype(np.int64)
