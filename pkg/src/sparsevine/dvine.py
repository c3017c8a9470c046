"""D-vine copula model with the response as first-tree leaf.

Variable convention: raw data matrices are (n, p+1) with the response in
column 0 and explanatory variable ``j`` in column ``j``; prediction inputs
``X`` are (n, p) with variable ``j`` in column ``j - 1``.  A model's
``order`` lists variable ids, always starting with the response id 0.

``pair_copulas[t-1][i]`` is the copula of the pair
(order[i], order[i+t] | order[i+1..i+t-1]); its first argument is the
conditional of the left (closer to the response) variable.  Extending an
order of s variables fits exactly s new pair copulas on the new rightmost
diagonal; cached right-hand conditionals keep that cost linear per extension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bicop import FittedBicop, INDEPENDENCE, hfunc, hinv, logpdf, select_family
from .margins import MarginalModel, kde_fit, pit, quantile

__all__ = [
    "DVineModel",
    "FitCounter",
    "fit_margins",
    "pseudo_obs",
    "extend_fit",
    "conditional_loglik",
    "conditional_cdf",
    "conditional_quantile",
    "predict_quantiles",
    "truncate",
    "model_to_dict",
    "model_from_dict",
]

UNIT_EPS = 1e-10


@dataclass
class FitCounter:
    """Counts pair-copula selections (one per select_family invocation)."""

    count: int = 0

    def tick(self, k: int = 1) -> None:
        self.count += k


@dataclass(frozen=True)
class DVineModel:
    """Fitted D-vine regression model (immutable)."""

    order: tuple[int, ...]
    pair_copulas: tuple[tuple[FittedBicop, ...], ...]
    margins: dict[int, MarginalModel] = field(default_factory=dict)
    truncation: int | None = None

    def __post_init__(self):
        if not self.order or self.order[0] != 0:
            raise ValueError("order must start with the response id 0")
        if len(set(self.order)) != len(self.order):
            raise ValueError("order contains duplicate variables")
        m = len(self.order) - 1
        if len(self.pair_copulas) != m:
            raise ValueError(f"expected {m} trees, got {len(self.pair_copulas)}")
        for t, tree in enumerate(self.pair_copulas, start=1):
            if len(tree) != len(self.order) - t:
                raise ValueError(f"tree {t} must hold {len(self.order) - t} pair copulas")

    @property
    def n_explanatory(self) -> int:
        return len(self.order) - 1

    @property
    def dof(self) -> int:
        """Total pair-copula parameter count over the whole vine."""
        return sum(pc.nparams for tree in self.pair_copulas for pc in tree)

    @property
    def conditional_dof(self) -> int:
        """Parameter count of the response-diagonal pair copulas, i.e. the
        ones whose densities make up the conditional likelihood.  This is the
        effective degrees of freedom penalized by the conditional AIC."""
        return sum(tree[0].nparams for tree in self.pair_copulas)

    def explanatory_ids(self) -> list[int]:
        return list(self.order[1:])


def fit_margins(data: np.ndarray) -> dict[int, MarginalModel]:
    """Kernel margins for every column of an (n, p+1) raw matrix."""
    data = np.asarray(data, dtype=float)
    return {j: kde_fit(data[:, j]) for j in range(data.shape[1])}


def pseudo_obs(margin_map: dict[int, MarginalModel], data: np.ndarray) -> np.ndarray:
    """Probability-integral transform of every column of a raw matrix."""
    data = np.asarray(data, dtype=float)
    U = np.empty_like(data)
    for j in range(data.shape[1]):
        U[:, j] = pit(margin_map[j], data[:, j])
    return U


def response_only_model(margin: MarginalModel) -> DVineModel:
    return DVineModel(order=(0,), pair_copulas=(), margins={0: margin})


# ---------------------------------------------------------------------------
# conditional recursions
# ---------------------------------------------------------------------------

def _expl_triangle(model: DVineModel, cols: list[np.ndarray]):
    """Conditionals among explanatory variables.

    Returns A1 with A1[j] = F(order[j] | order[1..j-1]) for j = 1..m, which
    are the second arguments of the response-diagonal copulas.
    """
    m = len(cols) - 1
    A = {(j, j): cols[j] for j in range(1, m + 1)}
    B = {(i, i): cols[i] for i in range(1, m + 1)}
    for t in range(1, m):
        for i in range(1, m - t + 1):
            j = i + t
            pc = model.pair_copulas[t - 1][i]
            left = B[(i, j - 1)]
            right = A[(i + 1, j)]
            A[(i, j)] = hfunc(pc, right, left, cond="first")
            B[(i, j)] = hfunc(pc, left, right, cond="second")
    return [None] + [A[(1, j)] for j in range(1, m + 1)]


def _model_cols(model: DVineModel, U: np.ndarray) -> list[np.ndarray]:
    return [np.clip(U[:, var], UNIT_EPS, 1.0 - UNIT_EPS) for var in model.order]


def conditional_loglik(model: DVineModel, U: np.ndarray) -> float:
    """Sum of log pair-copula densities along the response diagonal.

    The response marginal term is excluded; it is constant across candidate
    models within one selection run and enters only through
    :func:`sparsevine.select.caic`.
    """
    U = np.asarray(U, dtype=float)
    cols = _model_cols(model, U)
    m = len(cols) - 1
    if m == 0:
        return 0.0
    A1 = _expl_triangle(model, cols)
    total = 0.0
    resp = cols[0]
    limit = model.truncation if model.truncation is not None else m
    for t in range(1, m + 1):
        pc = model.pair_copulas[t - 1][0]
        if t <= limit:
            total += float(np.sum(logpdf(pc, resp, A1[t])))
        if t < m:
            resp = hfunc(pc, resp, A1[t], cond="second")
    return total


def conditional_cdf(model: DVineModel, X: np.ndarray, y) -> np.ndarray:
    """F(y | x) via the forward h-function recursion."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.broadcast_to(np.asarray(y, dtype=float), (X.shape[0],))
    w = np.asarray(pit(model.margins[0], y))
    if model.n_explanatory == 0:
        return w
    cols = _prediction_cols(model, X)
    A1 = _expl_triangle(model, cols)
    for t in range(1, model.n_explanatory + 1):
        pc = model.pair_copulas[t - 1][0]
        w = hfunc(pc, w, A1[t], cond="second")
    return np.clip(w, UNIT_EPS, 1.0 - UNIT_EPS)


def conditional_quantile(model: DVineModel, X: np.ndarray, alpha: float) -> np.ndarray:
    """Conditional alpha-quantile of the response given raw covariate rows."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    alpha = float(np.clip(alpha, UNIT_EPS, 1.0 - UNIT_EPS))
    if model.n_explanatory == 0:
        return np.full(n, quantile(model.margins[0], alpha))
    cols = _prediction_cols(model, X)
    A1 = _expl_triangle(model, cols)
    w = np.full(n, alpha)
    for t in range(model.n_explanatory, 0, -1):
        pc = model.pair_copulas[t - 1][0]
        w = hinv(pc, w, A1[t], cond="second")
    return np.asarray(quantile(model.margins[0], w))


def predict_quantiles(model: DVineModel, X: np.ndarray, alphas) -> np.ndarray:
    """One column per level; no quantile crossing by construction."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty((X.shape[0], len(alphas)))
    for k, a in enumerate(alphas):
        out[:, k] = conditional_quantile(model, X, a)
    return out


def _prediction_cols(model: DVineModel, X: np.ndarray) -> list[np.ndarray]:
    cols: list[np.ndarray] = [np.empty(0)]  # response slot unused
    for var in model.order[1:]:
        if var - 1 >= X.shape[1]:
            raise ValueError(f"X lacks column for variable {var}")
        cols.append(np.asarray(pit(model.margins[var], X[:, var - 1])))
    return cols


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def build_cache(model: DVineModel, U: np.ndarray) -> list[np.ndarray]:
    """Right-hand conditionals F(order[i] | order[i+1..m]) for i = 0..m."""
    cols = _model_cols(model, U)
    m = len(cols) - 1
    B = {(i, i): cols[i] for i in range(0, m + 1)}
    A = {(j, j): cols[j] for j in range(1, m + 1)}
    for t in range(1, m + 1):
        for i in range(0, m - t + 1):
            j = i + t
            pc = model.pair_copulas[t - 1][i]
            left = B[(i, j - 1)]
            right = A[(i + 1, j)]
            if i > 0:
                A[(i, j)] = hfunc(pc, right, left, cond="first")
            B[(i, j)] = hfunc(pc, left, right, cond="second")
    return [B[(i, m)] for i in range(0, m + 1)]


def extend_fit(
    model: DVineModel,
    U: np.ndarray,
    new_var: int,
    criterion: str = "aic",
    margin: MarginalModel | None = None,
    cache: list[np.ndarray] | None = None,
    counter: FitCounter | None = None,
) -> tuple[DVineModel, list[np.ndarray]]:
    """Append ``new_var`` to the D-vine order, fitting one pair copula per
    tree on the new rightmost diagonal; previously fitted copulas are reused
    unchanged.

    Returns the extended model together with the updated conditional cache
    (pass it back in for the next extension to keep the cost linear).
    """
    if new_var in model.order:
        raise ValueError(f"variable {new_var} already in the order")
    U = np.asarray(U, dtype=float)
    if cache is None:
        cache = build_cache(model, U)
    m = len(model.order) - 1
    w = np.clip(U[:, new_var], UNIT_EPS, 1.0 - UNIT_EPS)
    wcond = w
    new_edges: list[FittedBicop] = []
    new_cache: list[np.ndarray | None] = [None] * (m + 2)
    new_cache[m + 1] = w
    for t in range(1, m + 2):
        i = m + 1 - t
        left = cache[i]
        pc = select_family(left, wcond, criterion=criterion)
        if counter is not None:
            counter.tick()
        new_edges.append(pc)
        new_cache[i] = hfunc(pc, left, wcond, cond="second")
        if t <= m:
            wcond = hfunc(pc, wcond, left, cond="first")
    trees = [list(tree) for tree in model.pair_copulas] + [[]]
    for t, pc in enumerate(new_edges, start=1):
        trees[t - 1].append(pc)
    new_margins = dict(model.margins)
    if margin is not None:
        new_margins[new_var] = margin
    new_model = DVineModel(
        order=model.order + (new_var,),
        pair_copulas=tuple(tuple(tree) for tree in trees),
        margins=new_margins,
        truncation=model.truncation,
    )
    return new_model, [np.asarray(c) for c in new_cache]


def truncate(model: DVineModel, level: int) -> DVineModel:
    """Force independence pair copulas in every tree above ``level``."""
    if level < 1:
        raise ValueError("truncation level must be >= 1")
    trees = []
    for t, tree in enumerate(model.pair_copulas, start=1):
        if t <= level:
            trees.append(tuple(tree))
        else:
            trees.append(tuple(INDEPENDENCE for _ in tree))
    return DVineModel(
        order=model.order,
        pair_copulas=tuple(trees),
        margins=dict(model.margins),
        truncation=level,
    )


# ---------------------------------------------------------------------------
# serialization (field names fixed for cross-implementation compatibility)
# ---------------------------------------------------------------------------

def model_to_dict(model: DVineModel) -> dict:
    return {
        "order": list(model.order),
        "truncation": model.truncation,
        "pair_copulas": [[pc.to_dict() for pc in tree] for tree in model.pair_copulas],
        "margins": [
            {"var": var, "sample": m.sample.tolist(), "bandwidth": m.bandwidth}
            for var, m in sorted(model.margins.items())
        ],
    }


def model_from_dict(d: dict) -> DVineModel:
    margin_map = {
        int(entry["var"]): kde_fit(
            np.asarray(entry["sample"], dtype=float), bandwidth=float(entry["bandwidth"])
        )
        for entry in d.get("margins", [])
    }
    return DVineModel(
        order=tuple(int(v) for v in d["order"]),
        pair_copulas=tuple(
            tuple(FittedBicop.from_dict(pc) for pc in tree) for tree in d["pair_copulas"]
        ),
        margins=margin_map,
        truncation=d.get("truncation"),
    )
