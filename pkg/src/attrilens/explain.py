"""Shapley attribution engines and the plot-data products built on them.

Three engines share one interventional value function: a coalition's value
is the model output averaged over background rows with coalition features
overwritten by the explained instance. They therefore agree wherever their
preconditions overlap:

  - exact_shapley: full 2^M enumeration, the oracle (<= 20 features);
  - tree_shap: polynomial per-background traversal for tree families;
  - kernel_shap: Shapley-kernel weighted least squares for any model.

Margin-capable boosted/linear models are explained in margin space (where
additivity is exact); plain trees and forests in leaf-probability space;
GaussianNB and the MLP in probability space.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .data import EncodedTable
from .models import Classifier, ModelError


class ExplainError(ValueError):
    pass


@dataclass
class BackgroundSet:
    """Reference rows defining the interventional distribution."""

    rows: np.ndarray

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=np.float64))
        if self.rows.shape[0] == 0:
            raise ExplainError("background set is empty")

    @property
    def size(self) -> int:
        return self.rows.shape[0]

    @classmethod
    def sample(cls, table: EncodedTable, size: int = 100, seed: int = 0):
        rng = np.random.default_rng(seed)
        n = table.n_rows
        if size >= n:
            return cls(table.features.copy())
        idx = np.sort(rng.choice(n, size=size, replace=False))
        return cls(table.features[idx])


@dataclass
class ShapExplanation:
    phi: np.ndarray
    base_value: float
    output_value: float
    space: str  # "margin" | "probability"
    feature_values: np.ndarray
    feature_names: list[str]

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.float64)
        self.feature_values = np.asarray(self.feature_values, dtype=np.float64)
        gap = abs(self.base_value + float(self.phi.sum()) - self.output_value)
        if gap >= 1e-6:
            raise ExplainError(f"local accuracy violated: residual {gap:.3g}")


def output_function(model: Classifier):
    """(f, space) used by every engine for this model family."""
    if model.tree_space == "probability" or not model.supports_margin:
        return model.predict_proba, "probability"
    return model.decision_margin, "margin"


def _shapley_weights(m: int) -> np.ndarray:
    """w[s] = s! (m-s-1)! / m! for s = 0..m-1."""
    fm = factorial(m)
    return np.array(
        [factorial(s) * factorial(m - s - 1) / fm for s in range(m)], dtype=np.float64
    )


def exact_shapley(model: Classifier, x, bg: BackgroundSet) -> ShapExplanation:
    """Brute-force enumeration of all coalitions; the oracle engine."""
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[0]
    if m > 20:
        raise ExplainError(f"exact enumeration limited to 20 features, got {m}")
    f, space = output_function(model)
    B = bg.size
    n_masks = 1 << m
    v = np.empty(n_masks, dtype=np.float64)
    chunk = max(1, 1 << 22 >> max(1, B).bit_length())
    for lo in range(0, n_masks, chunk):
        hi = min(lo + chunk, n_masks)
        block = []
        for mask in range(lo, hi):
            comp = bg.rows.copy()
            for j in range(m):
                if mask >> j & 1:
                    comp[:, j] = x[j]
            block.append(comp)
        vals = f(np.vstack(block))
        v[lo:hi] = vals.reshape(hi - lo, B).mean(axis=1)
    pc = np.array([bin(s).count("1") for s in range(n_masks)])
    w = _shapley_weights(m)
    phi = np.zeros(m)
    masks = np.arange(n_masks)
    for j in range(m):
        bit = 1 << j
        without = masks[(masks & bit) == 0]
        phi[j] = np.sum(w[pc[without]] * (v[without | bit] - v[without]))
    return ShapExplanation(
        phi, float(v[0]), float(v[n_masks - 1]), space, x, list(model.feature_names)
    )


class TreeExplainer:
    """Interventional Shapley values for tree families.

    Background-dependent structures (per-leaf path constraints for each
    background row) are computed once, so explaining many instances is cheap.
    """

    def __init__(self, model: Classifier, bg: BackgroundSet):
        trees = model.trees()
        if trees is None:
            raise ExplainError(f"{model.kind} is not a tree model")
        self.model = model
        self.bg = bg
        self.f, self.space = output_function(model)
        self.n_features = len(model.feature_names)
        # GBDT leaf values add up; forest leaf probabilities average.
        self.tree_scale = 1.0 / len(trees) if self.space == "probability" else 1.0
        self.base_value = float(np.mean(self.f(bg.rows)))
        self._leaves = []  # (value, feats, thrs, goes_left arrays) per tree
        for tree in trees:
            per_tree = []
            for value, path in tree.leaf_paths():
                if not path:
                    per_tree.append((value, None, None, None, None))
                    continue
                feats = np.array([p[0] for p in path], dtype=np.int64)
                thrs = np.array([p[1] for p in path], dtype=np.float64)
                gl = np.array([p[2] for p in path], dtype=bool)
                # background side per path node: True where z follows the path
                z_side = (bg.rows[:, feats] <= thrs) == gl
                per_tree.append((value, feats, thrs, gl, z_side))
            self._leaves.append(per_tree)
        # W[a, m] = a! (m-a-1)! / m!, indexed by x-side count and player count
        depth_cap = 2 + max(
            (len(leaf[1]) for per_tree in self._leaves for leaf in per_tree if leaf[1] is not None),
            default=1,
        )
        self._W = np.zeros((depth_cap + 1, depth_cap + 1))
        for mm in range(1, depth_cap + 1):
            for a in range(mm):
                self._W[a, mm] = factorial(a) * factorial(mm - a - 1) / factorial(mm)

    def shap_values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        B = self.bg.size
        phi = np.zeros(self.n_features)
        for per_tree in self._leaves:
            for value, feats, thrs, gl, z_side in per_tree:
                if feats is None:
                    continue
                x_side = (x[feats] <= thrs) == gl
                # rows where neither x nor z passes a node: leaf unreachable
                alive = ~np.any(~x_side & ~z_side, axis=1)
                if not alive.any():
                    continue
                # per unique feature: needs-x (f in S) / needs-z (f not in S)
                uniq = np.unique(feats)
                need_x = np.zeros((B, uniq.size), dtype=bool)
                need_z = np.zeros((B, uniq.size), dtype=bool)
                for q, fu in enumerate(uniq):
                    occ = feats == fu
                    div = x_side[None, occ] & ~z_side[:, occ]
                    need_x[:, q] = div.any(axis=1)
                    ndiv = ~x_side[None, occ] & z_side[:, occ]
                    need_z[:, q] = ndiv.any(axis=1)
                conflict = need_x & need_z
                alive &= ~conflict.any(axis=1)
                if not alive.any():
                    continue
                u = (need_x & alive[:, None]).sum(axis=1)
                d = (need_z & alive[:, None]).sum(axis=1)
                mtot = u + d
                scaled = value * self.tree_scale / B
                wx = self._W[np.maximum(u - 1, 0), mtot]
                wz = self._W[u, np.maximum(mtot, 1)]
                for q, fu in enumerate(uniq):
                    pos = alive & need_x[:, q]
                    if pos.any():
                        phi[fu] += scaled * float(wx[pos].sum())
                    neg = alive & need_z[:, q]
                    if neg.any():
                        phi[fu] -= scaled * float(wz[neg].sum())
        return phi

    def explain(self, x) -> ShapExplanation:
        x = np.asarray(x, dtype=np.float64)
        phi = self.shap_values(x)
        out = float(self.f(x)[0])
        return ShapExplanation(
            phi, self.base_value, out, self.space, x, list(self.model.feature_names)
        )


def tree_shap(model: Classifier, x, bg: BackgroundSet) -> ShapExplanation:
    return TreeExplainer(model, bg).explain(x)


def kernel_shap(
    model: Classifier, x, bg: BackgroundSet, n_samples: int = 2048, seed: int = 0
) -> ShapExplanation:
    """Shapley-kernel weighted regression over coalition samples.

    With n_samples >= 2^M - 2 every non-trivial coalition is enumerated and
    the result equals exact_shapley.
    """
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[0]
    if n_samples < m + 2:
        raise ExplainError(f"kernel_shap needs at least M+2={m + 2} samples")
    f, space = output_function(model)
    base = float(np.mean(f(bg.rows)))
    fx = float(f(x)[0])
    if m == 1:
        return ShapExplanation(
            np.array([fx - base]), base, fx, space, x, list(model.feature_names)
        )

    full = (1 << m) - 2
    if n_samples >= full:
        masks = np.arange(1, (1 << m) - 1)
    else:
        rng = np.random.default_rng(seed)
        sizes = np.arange(1, m)
        size_w = (m - 1) / (sizes * (m - sizes))
        size_w /= size_w.sum()
        chosen = set()
        draws = rng.choice(sizes, size=4 * n_samples, p=size_w)
        for s in draws:
            if len(chosen) >= n_samples:
                break
            subset = rng.choice(m, size=int(s), replace=False)
            chosen.add(int(np.sum(1 << subset)))
        masks = np.array(sorted(chosen), dtype=np.int64)

    Z = np.zeros((masks.size, m))
    for j in range(m):
        Z[:, j] = (masks >> j) & 1
    sizes = Z.sum(axis=1).astype(int)
    from math import comb

    kw = np.array(
        [(m - 1) / (comb(m, s) * s * (m - s)) for s in sizes], dtype=np.float64
    )

    comps = np.repeat(bg.rows[None, :, :], masks.size, axis=0)
    comps[:, :, :] = np.where(Z[:, None, :] == 1, x[None, None, :], bg.rows[None, :, :])
    v = f(comps.reshape(-1, m)).reshape(masks.size, bg.size).mean(axis=1)

    # eliminate the last coefficient through the efficiency constraint
    y = v - base - Z[:, -1] * (fx - base)
    A = Z[:, :-1] - Z[:, [-1]]
    AtW = (A * kw[:, None]).T
    try:
        head = np.linalg.solve(AtW @ A, AtW @ y)
    except np.linalg.LinAlgError:
        head, *_ = np.linalg.lstsq(AtW @ A, AtW @ y, rcond=None)
    phi = np.empty(m)
    phi[:-1] = head
    phi[-1] = (fx - base) - head.sum()
    return ShapExplanation(phi, base, fx, space, x, list(model.feature_names))


def linear_shap(model: Classifier, x, bg: BackgroundSet) -> ShapExplanation:
    """Closed form for linear-margin models: phi_j = w_j (x_j - mean bg_j)."""
    if not hasattr(model, "weights"):
        raise ExplainError(f"{model.kind} is not linear")
    x = np.asarray(x, dtype=np.float64)
    mu = bg.rows.mean(axis=0)
    phi = model.weights * (x - mu)
    base = float(model.weights @ mu + model.intercept)
    out = float(model.decision_margin(x)[0])
    return ShapExplanation(phi, base, out, "margin", x, list(model.feature_names))


def make_explainer(model: Classifier, bg: BackgroundSet, seed: int = 0):
    """Best engine for the family: tree traversal, closed-form linear, or
    kernel regression. Returns a callable x -> ShapExplanation."""
    if model.trees() is not None:
        return TreeExplainer(model, bg).explain
    if hasattr(model, "weights"):
        return lambda x: linear_shap(model, x, bg)
    m = len(model.feature_names)
    n_samples = (1 << m) - 2 if m <= 13 else 4096
    return lambda x: kernel_shap(model, x, bg, n_samples=n_samples, seed=seed)


@dataclass
class SummaryPlotData:
    feature_order: list[str]  # descending mean |phi|
    shap_values: dict  # name -> list of phi over the population
    norm_values: dict  # name -> feature values min-max scaled to [0, 1]
    raw_values: dict


@dataclass
class ForcePlotData:
    base_value: float
    output_value: float
    contributions: list  # (name, phi, sign) ordered by |phi| descending


def _population_phis(model, population: EncodedTable, bg: BackgroundSet, seed=0):
    explain = make_explainer(model, bg, seed=seed)
    return np.array([explain(x).phi for x in population.features])


def summary_data(
    model, population: EncodedTable, bg: BackgroundSet, seed: int = 0
) -> SummaryPlotData:
    if population.n_rows == 0:
        raise ExplainError("population is empty")
    phis = _population_phis(model, population, bg, seed=seed)
    mean_abs = np.abs(phis).mean(axis=0)
    order = sorted(
        range(population.n_features), key=lambda j: (-mean_abs[j], j)
    )
    names = population.feature_names
    shap_values, norm_values, raw_values = {}, {}, {}
    for j in order:
        col = population.features[:, j]
        lo, hi = col.min(), col.max()
        span = hi - lo if hi > lo else 1.0
        shap_values[names[j]] = phis[:, j].tolist()
        norm_values[names[j]] = ((col - lo) / span).tolist()
        raw_values[names[j]] = col.tolist()
    return SummaryPlotData([names[j] for j in order], shap_values, norm_values, raw_values)


def force_data(expl: ShapExplanation) -> ForcePlotData:
    order = sorted(
        range(len(expl.feature_names)), key=lambda j: (-abs(expl.phi[j]), j)
    )
    contributions = [
        (expl.feature_names[j], float(expl.phi[j]), "+" if expl.phi[j] >= 0 else "-")
        for j in order
    ]
    return ForcePlotData(expl.base_value, expl.output_value, contributions)


def dependence_data(
    model, population: EncodedTable, feature: str, bg: BackgroundSet, seed: int = 0
):
    """(feature value, shap value) per population row."""
    j = population.feature_index(feature)
    phis = _population_phis(model, population, bg, seed=seed)
    return [
        (float(population.features[i, j]), float(phis[i, j]))
        for i in range(population.n_rows)
    ]


def mean_abs_importance(
    model, population: EncodedTable, bg: BackgroundSet, top_k: int | None = None,
    seed: int = 0,
):
    """Descending (feature, mean |phi|) ranking; ties keep column order."""
    if top_k is None:
        top_k = population.n_features
    if top_k > population.n_features:
        raise ExplainError(f"top_k={top_k} exceeds {population.n_features} features")
    phis = _population_phis(model, population, bg, seed=seed)
    mean_abs = np.abs(phis).mean(axis=0)
    order = sorted(range(population.n_features), key=lambda j: (-mean_abs[j], j))
    return [
        (population.feature_names[j], float(mean_abs[j])) for j in order[:top_k]
    ]
