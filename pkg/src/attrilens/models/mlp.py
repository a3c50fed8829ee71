"""Single-hidden-layer perceptron: ReLU hidden units, logistic output.

Trained full-batch with Adam for a fixed epoch budget from a seeded
initialization; no feature scaling is applied, so on raw imbalanced data
the net can legitimately collapse to the majority class.
"""

from __future__ import annotations

import numpy as np

from .base import Classifier, ModelError, sigmoid


class MLPClassifier(Classifier):
    kind = "MLP"
    supports_margin = False

    def __init__(self, feature_names, w1, b1, w2, b2):
        super().__init__(feature_names)
        self.w1 = np.asarray(w1, dtype=np.float64)
        self.b1 = np.asarray(b1, dtype=np.float64)
        self.w2 = np.asarray(w2, dtype=np.float64)
        self.b2 = float(b2)

    @classmethod
    def fit(cls, table, hp):
        hp.validate()
        X, y = table.features, table.labels.astype(np.float64)
        if X.shape[0] == 0:
            raise ModelError("empty table")
        n, d = X.shape
        hidden = hp.mlp_hidden
        rng = np.random.default_rng(hp.seed)
        w1 = rng.normal(0.0, np.sqrt(2.0 / max(d, 1)), size=(d, hidden))
        b1 = np.zeros(hidden)
        w2 = rng.normal(0.0, np.sqrt(2.0 / hidden), size=hidden)
        b2 = 0.0

        m = {k: 0.0 for k in ("w1", "b1", "w2", "b2")}
        v = {k: 0.0 for k in ("w1", "b1", "w2", "b2")}
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        lr = hp.mlp_learning_rate
        t = 0
        for _ in range(hp.mlp_epochs):
            a = X @ w1 + b1
            hmask = a > 0
            hact = a * hmask
            z = hact @ w2 + b2
            p = sigmoid(z)
            dz = (p - y) / n
            gw2 = hact.T @ dz
            gb2 = dz.sum()
            dh = np.outer(dz, w2) * hmask
            gw1 = X.T @ dh
            gb1 = dh.sum(axis=0)
            t += 1
            grads = {"w1": gw1, "b1": gb1, "w2": gw2, "b2": gb2}
            params = {"w1": w1, "b1": b1, "w2": w2, "b2": b2}
            for k, gkv in grads.items():
                m[k] = beta1 * m[k] + (1 - beta1) * gkv
                v[k] = beta2 * v[k] + (1 - beta2) * gkv * gkv
                mh = m[k] / (1 - beta1**t)
                vh = v[k] / (1 - beta2**t)
                params[k] = params[k] - lr * mh / (np.sqrt(vh) + eps)
            w1, b1, w2, b2 = params["w1"], params["b1"], params["w2"], params["b2"]
        return cls(list(table.feature_names), w1, b1, w2, float(b2))

    def predict_proba(self, X):
        X = self._check(X)
        h = np.maximum(X @ self.w1 + self.b1, 0.0)
        return sigmoid(h @ self.w2 + self.b2)

    def _payload(self):
        return {
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2,
        }

    @classmethod
    def _restore(cls, feature_names, payload):
        return cls(
            feature_names, payload["w1"], payload["b1"], payload["w2"], payload["b2"]
        )
