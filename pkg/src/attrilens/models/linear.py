"""Linear families: L2-penalized logistic regression and a linear SVM."""

from __future__ import annotations

import numpy as np

from .base import Classifier, ModelError, sigmoid


class LogisticRegressionClassifier(Classifier):
    """Penalized maximum likelihood by Newton iterations to gradient tolerance.

    The intercept is unpenalized; the margin is w.x + b.
    """

    kind = "LogisticRegression"
    supports_margin = True

    def __init__(self, feature_names, weights, intercept):
        super().__init__(feature_names)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.intercept = float(intercept)

    @classmethod
    def fit(cls, table, hp):
        hp.validate()
        X, y = table.features, table.labels.astype(np.float64)
        if X.shape[0] == 0:
            raise ModelError("empty table")
        n, d = X.shape
        # standardize internally for conditioning, fold back afterwards
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        sd[sd == 0.0] = 1.0
        Z = (X - mu) / sd
        beta = np.zeros(d + 1)
        A = np.column_stack([Z, np.ones(n)])
        lam = hp.logistic_l2
        reg = np.full(d + 1, lam)
        reg[-1] = 0.0
        for _ in range(hp.logistic_max_iter):
            p = sigmoid(A @ beta)
            grad = A.T @ (p - y) + reg * beta
            if np.max(np.abs(grad)) < hp.logistic_tol * max(1.0, n):
                break
            w = np.clip(p * (1.0 - p), 1e-10, None)
            H = (A * w[:, None]).T @ A + np.diag(reg + 1e-12)
            step = np.linalg.solve(H, grad)
            # halve the step while the penalized loss does not improve
            loss0 = cls._loss(A, y, beta, reg)
            t = 1.0
            for _ in range(30):
                cand = beta - t * step
                if cls._loss(A, y, cand, reg) <= loss0:
                    break
                t *= 0.5
            beta = beta - t * step
        w_std = beta[:-1]
        weights = w_std / sd
        intercept = beta[-1] - float((w_std * mu / sd).sum())
        return cls(list(table.feature_names), weights, intercept)

    @staticmethod
    def _loss(A, y, beta, reg):
        z = A @ beta
        # log(1 + exp(z)) - y z, computed stably
        ll = np.logaddexp(0.0, z) - y * z
        return float(ll.sum() + 0.5 * (reg * beta * beta).sum())

    def decision_margin(self, X):
        return self._check(X) @ self.weights + self.intercept

    def predict_proba(self, X):
        return sigmoid(self.decision_margin(X))

    def _payload(self):
        return {"weights": [float(v) for v in self.weights], "intercept": self.intercept}

    @classmethod
    def _restore(cls, feature_names, payload):
        return cls(feature_names, payload["weights"], payload["intercept"])


class LinearSVMClassifier(Classifier):
    """Hinge loss + L2 via a deterministic full-batch subgradient schedule.

    Probability is the logistic transform of the raw margin (no Platt refit).
    """

    kind = "LinearSVM"
    supports_margin = True

    def __init__(self, feature_names, weights, intercept):
        super().__init__(feature_names)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.intercept = float(intercept)

    @classmethod
    def fit(cls, table, hp):
        hp.validate()
        X, y = table.features, table.labels.astype(np.float64)
        if X.shape[0] == 0:
            raise ModelError("empty table")
        n, d = X.shape
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        sd[sd == 0.0] = 1.0
        Z = (X - mu) / sd
        t = 2.0 * y - 1.0
        lam = 1.0 / (hp.svm_c * n)
        w = np.zeros(d)
        b = 0.0
        for epoch in range(1, hp.svm_epochs + 1):
            eta = 1.0 / (lam * (epoch + 10.0 * n))
            margin = Z @ w + b
            active = t * margin < 1.0
            gw = lam * w - (Z[active] * t[active, None]).sum(axis=0) / n
            gb = -t[active].sum() / n
            w -= eta * gw
            b -= eta * gb
        weights = w / sd
        intercept = b - float((w * mu / sd).sum())
        return cls(list(table.feature_names), weights, intercept)

    def decision_margin(self, X):
        return self._check(X) @ self.weights + self.intercept

    def predict_proba(self, X):
        return sigmoid(self.decision_margin(X))

    def _payload(self):
        return {"weights": [float(v) for v in self.weights], "intercept": self.intercept}

    @classmethod
    def _restore(cls, feature_names, payload):
        return cls(feature_names, payload["weights"], payload["intercept"])
