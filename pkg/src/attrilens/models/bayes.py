"""Gaussian naive Bayes with a variance floor."""

from __future__ import annotations

import numpy as np

from .base import Classifier, ModelError


class GaussianNBClassifier(Classifier):
    kind = "GaussianNB"
    supports_margin = False

    def __init__(self, feature_names, priors, means, variances):
        super().__init__(feature_names)
        self.priors = np.asarray(priors, dtype=np.float64)  # (2,)
        self.means = np.asarray(means, dtype=np.float64)  # (2, d)
        self.variances = np.asarray(variances, dtype=np.float64)  # (2, d)

    @classmethod
    def fit(cls, table, hp):
        X, y = table.features, table.labels
        if X.shape[0] == 0:
            raise ModelError("empty table")
        d = X.shape[1]
        global_var = X.var(axis=0).max() if d else 1.0
        floor = hp.nb_var_smoothing * max(global_var, 1.0)
        priors = np.empty(2)
        means = np.zeros((2, d))
        variances = np.ones((2, d))
        for c in (0, 1):
            mask = y == c
            priors[c] = mask.mean()
            if mask.any():
                means[c] = X[mask].mean(axis=0)
                variances[c] = X[mask].var(axis=0) + floor
            else:
                variances[c] = floor
        return cls(list(table.feature_names), priors, means, variances)

    def _log_joint(self, X):
        out = np.empty((X.shape[0], 2))
        for c in (0, 1):
            if self.priors[c] == 0.0:
                out[:, c] = -np.inf
                continue
            diff = X - self.means[c]
            out[:, c] = (
                np.log(self.priors[c])
                - 0.5 * np.sum(np.log(2.0 * np.pi * self.variances[c]))
                - 0.5 * np.sum(diff * diff / self.variances[c], axis=1)
            )
        return out

    def predict_proba(self, X):
        lj = self._log_joint(self._check(X))
        m = lj.max(axis=1, keepdims=True)
        e = np.exp(lj - m)
        return e[:, 1] / e.sum(axis=1)

    def _payload(self):
        return {
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    @classmethod
    def _restore(cls, feature_names, payload):
        return cls(
            feature_names, payload["priors"], payload["means"], payload["variances"]
        )
