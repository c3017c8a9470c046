"""Forward-selection D-vine regression: residual-guided and partial-correlation
candidate scoring with a conditional-AIC stop, plus the full-refit baseline.

All three methods grow the D-vine one variable at a time (the winner joins
the order, the candidate set shrinks by one) and share the stopping rule:
stop as soon as the conditional AIC fails to strictly improve, returning the
model from before the rejected extension.  They differ only in how the next
candidate is scored:

* ``res``    fits one bivariate copula per candidate to (pseudo-response,
  candidate) pseudo-observations and scores by its log-likelihood; after
  each accepted extension the pseudo-response is re-centred on the model's
  conditional quantile (default the median) and its margin refit.
* ``parcor`` scores candidates by |partial correlation| with the response
  given the chosen set, computed on empirical normal scores.
* ``baseline`` refits a full trial extension per candidate and scores by the
  trial's conditional log-likelihood (cubic fit count; for comparison only).

Worst-case pair-copula selections: res p(p+1), parcor p(p+1)/2, baseline
sum_s (p-s+1)*s; every run asserts its bound via an instrumented counter.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from . import dvine
from .bicop import FitError, select_family
from .dvine import DVineModel, FitCounter
from .margins import DegenerateMarginError, kde_fit, logpdf as margin_logpdf, pit

__all__ = [
    "SelectionConfig",
    "SelectionTrace",
    "IterationRecord",
    "SelectionError",
    "CollinearityError",
    "normal_scores",
    "partial_correlation",
    "vinereg_res",
    "vinereg_parcor",
    "vinereg_baseline",
    "caic",
]

logger = logging.getLogger("sparsevine.select")

_COND_LIMIT = 1e12


class SelectionError(RuntimeError):
    """Selection aborted; carries the partial trace for diagnosis."""

    def __init__(self, message: str, trace: "SelectionTrace | None" = None):
        super().__init__(message)
        self.trace = trace


class CollinearityError(ValueError):
    """Partial correlation undefined even after the regression fallback."""


@dataclass
class SelectionConfig:
    """Knobs shared by all three selection methods.

    ``force_exhaustion`` disables the conditional-AIC stop so complexity
    bounds can be verified on full runs; ``max_iterations`` defaults to
    min(p, n // 10) as a safety valve.
    """

    method: str = "res"
    criterion: str = "aic"
    pseudo_quantile: float = 0.50
    max_iterations: int | None = None
    parallel_candidates: bool = False
    threads: int = 1
    force_exhaustion: bool = False

    def __post_init__(self):
        if self.method not in ("res", "parcor", "baseline"):
            raise ValueError("method must be 'res', 'parcor', or 'baseline'")
        if self.criterion not in ("aic", "bic"):
            raise ValueError("criterion must be 'aic' or 'bic'")
        if not 0.0 < self.pseudo_quantile < 1.0:
            raise ValueError("pseudo_quantile must be in (0, 1)")


@dataclass
class IterationRecord:
    iteration: int
    scores: dict[int, float]
    chosen: int
    caic: float
    dof: int
    fits: int
    accepted: bool

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "scores": {str(k): v for k, v in self.scores.items()},
            "chosen": self.chosen,
            "caic": self.caic,
            "dof": self.dof,
            "fits": self.fits,
            "accepted": self.accepted,
        }


@dataclass
class SelectionTrace:
    """Audit trail: per-iteration candidate scores, chosen variable, cAIC."""

    method: str
    initial_caic: float
    iterations: list[IterationRecord] = field(default_factory=list)
    chosen: list[int] = field(default_factory=list)
    stop_reason: str = ""
    total_fits: int = 0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "initial_caic": self.initial_caic,
            "iterations": [r.to_dict() for r in self.iterations],
            "chosen": self.chosen,
            "stop_reason": self.stop_reason,
            "total_fits": self.total_fits,
        }


# ---------------------------------------------------------------------------
# normal scores and partial correlations
# ---------------------------------------------------------------------------

def normal_scores(data: np.ndarray) -> np.ndarray:
    """Column-wise Phi^-1(rank / (n + 1)); ties get average ranks."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    n = data.shape[0]
    out = np.empty_like(data)
    for j in range(data.shape[1]):
        col = data[:, j]
        if np.all(col == col[0]):
            raise ValueError(f"column {j} is constant; normal scores undefined")
        out[:, j] = ndtri(rankdata(col, method="average") / (n + 1.0))
    return out


def partial_correlation(z: np.ndarray, a: int, b: int, given=()) -> float:
    """Partial correlation of columns a, b given the columns in ``given``.

    Computed from the inverse of the sample correlation submatrix; if that is
    numerically singular, falls back to correlating the least-squares
    residuals of a and b on the conditioning block.
    """
    given = [g for g in given]
    if a in given or b in given:
        raise ValueError("a and b must not appear in the conditioning set")
    cols = [a, b] + given
    sub = np.corrcoef(z[:, cols], rowvar=False)
    if not given:
        return float(np.clip(sub[0, 1], -1.0, 1.0))
    if np.all(np.isfinite(sub)) and np.linalg.cond(sub) < _COND_LIMIT:
        prec = np.linalg.inv(sub)
        return float(np.clip(-prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1]), -1.0, 1.0))
    design = np.column_stack([np.ones(z.shape[0]), z[:, given]])
    resid_a = z[:, a] - design @ np.linalg.lstsq(design, z[:, a], rcond=None)[0]
    resid_b = z[:, b] - design @ np.linalg.lstsq(design, z[:, b], rcond=None)[0]
    sa, sb = np.std(resid_a), np.std(resid_b)
    if sa <= 1e-12 or sb <= 1e-12:
        raise CollinearityError("residual variance vanished in the fallback")
    return float(np.clip(np.corrcoef(resid_a, resid_b)[0, 1], -1.0, 1.0))


# ---------------------------------------------------------------------------
# conditional AIC
# ---------------------------------------------------------------------------

def caic(model: DVineModel, data: np.ndarray) -> float:
    """Conditional AIC: -2 * (copula conditional loglik + response marginal
    loglik) + 2 * effective degrees of freedom.

    The effective degrees of freedom count the parameters of the
    response-diagonal pair copulas only, matching the conditional likelihood
    being penalized; explanatory-block copulas enter the conditional density
    only through its arguments."""
    data = np.asarray(data, dtype=float)
    U = np.zeros_like(data)
    for var in model.order:
        U[:, var] = pit(model.margins[var], data[:, var])
    cll = dvine.conditional_loglik(model, U)
    marg = float(np.sum(margin_logpdf(model.margins[0], data[:, 0])))
    return -2.0 * (cll + marg) + 2.0 * model.conditional_dof


# ---------------------------------------------------------------------------
# shared forward-selection loop
# ---------------------------------------------------------------------------

def _score_map(candidates, fn, config: SelectionConfig) -> dict[int, float]:
    if config.parallel_candidates and config.threads > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(fn, candidates))
        return dict(zip(candidates, results))
    return {d: fn(d) for d in candidates}


def _argmax_lowest_index(scores: dict[int, float]) -> int:
    best_var = None
    best_score = -np.inf
    for d in sorted(scores):
        s = scores[d]
        if s > best_score:
            best_var = d
            best_score = s
    return best_var


def _run_forward(data: np.ndarray, config: SelectionConfig) -> tuple[DVineModel, SelectionTrace]:
    data = np.asarray(data, dtype=float)
    n, width = data.shape
    p = width - 1
    if n < 30:
        raise SelectionError("need at least 30 observations")
    if p < 1:
        raise SelectionError("need at least one explanatory variable")
    max_iter = config.max_iterations
    if max_iter is None:
        max_iter = p if config.force_exhaustion else min(p, max(1, n // 10))

    margin_map = dvine.fit_margins(data)
    U = dvine.pseudo_obs(margin_map, data)
    y = data[:, 0]
    marg_ll = float(np.sum(margin_logpdf(margin_map[0], y)))

    model = dvine.response_only_model(margin_map[0])
    cache = [U[:, 0]]
    counter = FitCounter()
    caic_prev = -2.0 * marg_ll
    trace = SelectionTrace(method=config.method, initial_caic=caic_prev)
    candidates = list(range(1, p + 1))

    if config.method == "parcor":
        z = normal_scores(data)
    pseudo_v = U[:, 0]

    iteration = 0
    while candidates and iteration < max_iter:
        iteration += 1
        if config.method == "res":
            def score_one(d, _v=pseudo_v):
                try:
                    return select_family(_v, U[:, d], criterion=config.criterion).loglik
                except FitError:
                    return -np.inf
            counter.tick(len(candidates))  # one bivariate selection per candidate
            scores = _score_map(candidates, score_one, config)
            winner = _argmax_lowest_index(scores)
            new_model, new_cache = dvine.extend_fit(
                model, U, winner, criterion=config.criterion,
                margin=margin_map[winner], cache=cache, counter=counter,
            )
        elif config.method == "parcor":
            def score_one(d):
                try:
                    return abs(partial_correlation(z, 0, d, trace.chosen))
                except CollinearityError:
                    return 0.0
            scores = _score_map(candidates, score_one, config)
            winner = _argmax_lowest_index(scores)
            new_model, new_cache = dvine.extend_fit(
                model, U, winner, criterion=config.criterion,
                margin=margin_map[winner], cache=cache, counter=counter,
            )
        else:  # baseline: full trial extension per candidate
            trials: dict[int, tuple[DVineModel, list]] = {}

            def score_one(d):
                trial_model, trial_cache = dvine.extend_fit(
                    model, U, d, criterion=config.criterion,
                    margin=margin_map[d], cache=cache, counter=counter,
                )
                trials[d] = (trial_model, trial_cache)
                return dvine.conditional_loglik(trial_model, U)

            scores = {d: score_one(d) for d in candidates}
            winner = _argmax_lowest_index(scores)
            new_model, new_cache = trials[winner]

        cll = dvine.conditional_loglik(new_model, U)
        caic_new = -2.0 * (cll + marg_ll) + 2.0 * new_model.conditional_dof
        improved = caic_new < caic_prev
        accepted = improved or config.force_exhaustion
        trace.iterations.append(
            IterationRecord(
                iteration=iteration,
                scores=scores,
                chosen=winner,
                caic=caic_new,
                dof=new_model.conditional_dof,
                fits=counter.count,
                accepted=accepted,
            )
        )
        logger.info(
            "iter=%d chosen=%d score=%.6g caic=%.6g fits=%d",
            iteration, winner, scores[winner], caic_new, counter.count,
        )
        if not accepted:
            trace.stop_reason = "aic-worsened"
            break
        model, cache = new_model, new_cache
        trace.chosen.append(winner)
        candidates.remove(winner)
        caic_prev = caic_new

        if config.method == "res" and candidates and iteration < max_iter:
            pred = dvine.conditional_quantile(model, data[:, 1:], config.pseudo_quantile)
            resid = y - pred
            try:
                resid_margin = kde_fit(resid)
            except DegenerateMarginError as exc:
                raise SelectionError(f"pseudo-response margin degenerate: {exc}", trace) from exc
            pseudo_v = np.asarray(pit(resid_margin, resid))

    if not trace.stop_reason:
        trace.stop_reason = "all-variables" if not candidates else "iteration-cap"
    trace.total_fits = counter.count

    if config.method == "res":
        bound = p * (p + 1)
    elif config.method == "parcor":
        bound = p * (p + 1) // 2
    else:
        bound = sum((p - s + 1) * s for s in range(1, p + 1))
    assert counter.count <= bound, f"fit counter {counter.count} exceeds bound {bound}"
    return model, trace


def vinereg_res(data: np.ndarray, config: SelectionConfig | None = None) -> tuple[DVineModel, SelectionTrace]:
    """Residual-guided forward D-vine regression."""
    config = config or SelectionConfig(method="res")
    if config.method != "res":
        raise ValueError("config.method must be 'res'")
    return _run_forward(data, config)


def vinereg_parcor(data: np.ndarray, config: SelectionConfig | None = None) -> tuple[DVineModel, SelectionTrace]:
    """Partial-correlation forward D-vine regression."""
    config = config or SelectionConfig(method="parcor")
    if config.method != "parcor":
        raise ValueError("config.method must be 'parcor'")
    return _run_forward(data, config)


def vinereg_baseline(data: np.ndarray, config: SelectionConfig | None = None) -> tuple[DVineModel, SelectionTrace]:
    """Full-refit forward D-vine regression (cubic fit count; benchmark only)."""
    config = config or SelectionConfig(method="baseline")
    if config.method != "baseline":
        raise ValueError("config.method must be 'baseline'")
    return _run_forward(data, config)
