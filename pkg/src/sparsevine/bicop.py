"""Parametric bivariate copulas: densities, h-functions, inverses, tau, and
maximum-likelihood fitting with AIC/BIC family selection.

All families are exchangeable in their unrotated form, so a single conditional
CDF ``h(target | given)`` per family covers both conditioning directions; the
rotation layer breaks the symmetry.  Rotations act on the data
(counter-clockwise convention)::

    c_90(u, v)  = c(v, 1 - u)
    c_180(u, v) = c(1 - u, 1 - v)
    c_270(u, v) = c(1 - v, u)

Archimedean families (clayton, gumbel, joe, bb1, bb6, bb7, bb8) share generic
machinery built on the generator phi:  C = phi^-1(phi(u) + phi(v)),
h(v|u) = phi'(u)/phi'(C), and c = h(v|u) * h(u|v) * (-phi''(C)/phi'(C)).
Everything is evaluated in log space so that bounded parameter searches stay
finite at the clamped corners of the unit square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy.special import digamma, ndtr, ndtri, gammaln, stdtr, stdtrit
from scipy.stats import kendalltau, multivariate_normal

__all__ = [
    "FittedBicop",
    "FitError",
    "InvalidParameterError",
    "InvalidInputError",
    "FAMILIES",
    "PARAM_BOUNDS",
    "pdf",
    "logpdf",
    "cdf",
    "hfunc",
    "hinv",
    "tau",
    "fit_mle",
    "select_family",
    "default_candidates",
    "sample",
]

UNIT_EPS = 1e-10

# Canonical enumeration order; also the tie-break order in select_family.
FAMILIES = (
    "indep",
    "gaussian",
    "student",
    "clayton",
    "gumbel",
    "frank",
    "joe",
    "bb1",
    "bb6",
    "bb7",
    "bb8",
)

# Families whose dependence is sign-symmetric; they never rotate.
SYMMETRIC_FAMILIES = frozenset({"indep", "gaussian", "student", "frank"})
ASYMMETRIC_FAMILIES = tuple(f for f in FAMILIES if f not in SYMMETRIC_FAMILIES)

ROTATIONS = (0, 90, 180, 270)

# Admissible parameter space per family (validation bounds).
PARAM_BOUNDS: dict[str, tuple[tuple[float, float], ...]] = {
    "indep": (),
    "gaussian": ((-1.0, 1.0),),
    "student": ((-1.0, 1.0), (2.0, 50.0)),
    "clayton": ((0.0, 28.0),),
    "gumbel": ((1.0, 50.0),),
    "frank": ((-35.0, 35.0),),
    "joe": ((1.0, 30.0),),
    "bb1": ((0.0, 7.0), (1.0, 7.0)),
    "bb6": ((1.0, 6.0), (1.0, 8.0)),
    "bb7": ((1.0, 6.0), (0.0, 25.0)),
    "bb8": ((1.0, 8.0), (0.0, 1.0)),
}

# Search box used by the optimizer (open endpoints nudged inward).
_FIT_BOUNDS: dict[str, tuple[tuple[float, float], ...]] = {
    "gaussian": ((-0.99999, 0.99999),),
    "student": ((-0.99999, 0.99999), (2.0, 50.0)),
    "clayton": ((1e-5, 28.0),),
    "gumbel": ((1.0, 50.0),),
    "frank": ((1e-4, 35.0),),  # sign chosen from the empirical tau
    "joe": ((1.0 + 1e-5, 30.0),),
    "bb1": ((1e-5, 7.0), (1.0, 7.0)),
    "bb6": ((1.0, 6.0), (1.0, 8.0)),
    "bb7": ((1.0, 6.0), (1e-4, 25.0)),
    "bb8": ((1.0, 8.0), (1e-4, 1.0)),
}

_MAX_FEV = 500
_REL_TOL = 1e-8


class FitError(RuntimeError):
    """Maximum-likelihood fit could not be completed."""


class InvalidParameterError(ValueError):
    """Copula parameters outside the admissible family bounds."""


class InvalidInputError(ValueError):
    """Copula arguments outside the unit interval (after clamping)."""


@dataclass(frozen=True)
class FittedBicop:
    """A parametric bivariate copula with fit metadata.

    ``loglik`` and ``n_obs`` are populated by :func:`fit_mle`; hand-built
    copulas carry ``loglik=nan`` and ``n_obs=0``.
    """

    family: str
    rotation: int = 0
    params: tuple[float, ...] = ()
    loglik: float = float("nan")
    n_obs: int = 0

    def __post_init__(self):
        _validate(self.family, self.rotation, self.params)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @property
    def nparams(self) -> int:
        return len(PARAM_BOUNDS[self.family])

    @property
    def aic(self) -> float:
        return -2.0 * self.loglik + 2.0 * self.nparams

    @property
    def bic(self) -> float:
        if self.n_obs <= 0:
            return float("nan")
        return -2.0 * self.loglik + self.nparams * math.log(self.n_obs)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "rotation": self.rotation,
            "params": list(self.params),
        }

    @staticmethod
    def from_dict(d: dict) -> "FittedBicop":
        return FittedBicop(
            family=d["family"],
            rotation=int(d.get("rotation", 0)),
            params=tuple(d.get("params", ())),
        )


def _validate(family: str, rotation: int, params) -> None:
    if family not in FAMILIES:
        raise InvalidParameterError(f"unknown copula family {family!r}")
    if rotation not in ROTATIONS:
        raise InvalidParameterError(f"rotation must be one of {ROTATIONS}")
    if rotation != 0 and family in SYMMETRIC_FAMILIES:
        raise InvalidParameterError(f"family {family!r} admits rotation 0 only")
    bounds = PARAM_BOUNDS[family]
    if len(params) != len(bounds):
        raise InvalidParameterError(
            f"family {family!r} takes {len(bounds)} parameter(s), got {len(params)}"
        )
    for value, (lo, hi) in zip(params, bounds):
        if not np.isfinite(value) or value < lo or value > hi:
            raise InvalidParameterError(
                f"parameter {value} outside [{lo}, {hi}] for family {family!r}"
            )
    if family == "gaussian" or family == "student":
        if abs(params[0]) >= 1.0:
            raise InvalidParameterError("|rho| must be < 1")
    if family == "clayton" and params[0] <= 0.0:
        raise InvalidParameterError("clayton theta must be > 0")
    if family == "frank" and params[0] == 0.0:
        raise InvalidParameterError("frank theta must be nonzero")
    if family == "joe" and params[0] <= 1.0:
        raise InvalidParameterError("joe theta must be > 1")
    if family == "bb1" and params[0] <= 0.0:
        raise InvalidParameterError("bb1 theta must be > 0")
    if family == "bb7" and params[1] <= 0.0:
        raise InvalidParameterError("bb7 delta must be > 0")
    if family == "bb8" and params[1] <= 0.0:
        raise InvalidParameterError("bb8 delta must be > 0")


def _as_unit(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise InvalidInputError("copula arguments must lie in [0, 1]")
    return np.clip(x, UNIT_EPS, 1.0 - UNIT_EPS)


INDEPENDENCE = FittedBicop("indep", 0, (), loglik=0.0)


# ---------------------------------------------------------------------------
# numeric helpers
# ---------------------------------------------------------------------------

def _logexpm1(a):
    """log(exp(a) - 1) for a > 0, stable at both ends."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.log(np.expm1(np.minimum(a, 0.693)))
        big = a + np.log1p(-np.exp(-np.maximum(a, 0.693)))
    return np.where(a < 0.693, small, big)


def _log1mexp(a):
    """log(1 - exp(a)) for a < 0."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.log(-np.expm1(np.maximum(a, -0.693)))
        big = np.log1p(-np.exp(np.minimum(a, -0.693)))
    return np.where(a > -0.693, small, big)


# ---------------------------------------------------------------------------
# elliptical families
# ---------------------------------------------------------------------------

def _gaussian_logpdf(u, v, rho):
    x = ndtri(u)
    y = ndtri(v)
    r2 = 1.0 - rho * rho
    return -0.5 * np.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)


def _gaussian_hcond(v, u, rho):
    return ndtr((ndtri(v) - rho * ndtri(u)) / math.sqrt(1.0 - rho * rho))


def _gaussian_hinv(p, u, rho):
    return ndtr(ndtri(p) * math.sqrt(1.0 - rho * rho) + rho * ndtri(u))


def _gaussian_cdf(u, v, rho):
    pts = np.column_stack([ndtri(u), ndtri(v)])
    mvn = multivariate_normal(mean=[0.0, 0.0], cov=[[1.0, rho], [rho, 1.0]])
    return np.atleast_1d(mvn.cdf(pts))


def _student_logpdf(u, v, rho, nu):
    x = stdtrit(nu, u)
    y = stdtrit(nu, v)
    r2 = 1.0 - rho * rho
    out = (
        gammaln((nu + 2.0) / 2.0)
        + gammaln(nu / 2.0)
        - 2.0 * gammaln((nu + 1.0) / 2.0)
        - 0.5 * math.log(r2)
    )
    out = out + (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
    qform = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2)
    return out - (nu + 2.0) / 2.0 * np.log1p(qform)


def _student_hcond(v, u, rho, nu):
    x = stdtrit(nu, u)
    y = stdtrit(nu, v)
    scale = np.sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0))
    return stdtr(nu + 1.0, (y - rho * x) / scale)


def _student_hinv(p, u, rho, nu):
    x = stdtrit(nu, u)
    scale = np.sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0))
    y = stdtrit(nu + 1.0, p) * scale + rho * x
    return stdtr(nu, y)


# ---------------------------------------------------------------------------
# frank (handles both dependence signs; kept outside the generator machinery)
# ---------------------------------------------------------------------------

def _frank_logpdf(u, v, theta):
    gu = np.expm1(-theta * u)
    gv = np.expm1(-theta * v)
    g1 = math.expm1(-theta)
    den = g1 + gu * gv
    num = -theta * g1  # positive for either sign of theta
    return math.log(num) - theta * (u + v) - 2.0 * np.log(np.abs(den))


def _frank_hcond(v, u, theta):
    gu = np.expm1(-theta * u)
    gv = np.expm1(-theta * v)
    g1 = math.expm1(-theta)
    return np.exp(-theta * u) * gv / (g1 + gu * gv)


def _frank_hinv(p, u, theta):
    gu = np.expm1(-theta * u)
    g1 = math.expm1(-theta)
    gv = p * g1 / (np.exp(-theta * u) - p * gu)
    return -np.log1p(gv) / theta


def _frank_cdf(u, v, theta):
    gu = np.expm1(-theta * u)
    gv = np.expm1(-theta * v)
    g1 = math.expm1(-theta)
    return -np.log1p(gu * gv / g1) / theta


# ---------------------------------------------------------------------------
# Archimedean generator machinery
#
# Each family supplies, for parameters par:
#   log_phi(t)      log of the generator
#   phi_inv(log_s)  inverse generator given log(phi(u) + phi(v))
#   log_nphi_p(t)   log(-phi'(t))
#   g(t)            -phi''(t) / phi'(t)
# ---------------------------------------------------------------------------

class _Clayton:
    @staticmethod
    def log_phi(t, par):
        theta = par[0]
        return _logexpm1(-theta * np.log(t))

    @staticmethod
    def phi_inv(log_s, par):
        theta = par[0]
        return np.exp(-np.logaddexp(0.0, log_s) / theta)

    @staticmethod
    def log_nphi_p(t, par):
        theta = par[0]
        return math.log(theta) - (theta + 1.0) * np.log(t)

    @staticmethod
    def g(t, par):
        theta = par[0]
        return (theta + 1.0) / t


class _Gumbel:
    @staticmethod
    def log_phi(t, par):
        theta = par[0]
        return theta * np.log(-np.log(t))

    @staticmethod
    def phi_inv(log_s, par):
        theta = par[0]
        return np.exp(-np.exp(log_s / theta))

    @staticmethod
    def log_nphi_p(t, par):
        theta = par[0]
        nlt = -np.log(t)
        return math.log(theta) + (theta - 1.0) * np.log(nlt) - np.log(t)

    @staticmethod
    def g(t, par):
        theta = par[0]
        nlt = -np.log(t)
        return ((theta - 1.0) / nlt + 1.0) / t


class _Joe:
    # w(t) = 1 - (1-t)^theta, generator phi = -log w
    @staticmethod
    def _log_w(t, theta):
        return _log1mexp(theta * np.log1p(-t))

    @staticmethod
    def log_phi(t, par):
        theta = par[0]
        return np.log(-_Joe._log_w(t, theta))

    @staticmethod
    def phi_inv(log_s, par):
        theta = par[0]
        lam = np.exp(log_s)
        return -np.expm1(_log1mexp(-lam) / theta)

    @staticmethod
    def log_nphi_p(t, par):
        theta = par[0]
        return math.log(theta) + (theta - 1.0) * np.log1p(-t) - _Joe._log_w(t, theta)

    @staticmethod
    def g(t, par):
        theta = par[0]
        w = np.exp(_Joe._log_w(t, theta))
        omt = 1.0 - t
        return (theta - 1.0) / omt + theta * omt ** (theta - 1.0) / w


class _BB1:
    @staticmethod
    def log_phi(t, par):
        theta, delta = par
        return delta * _logexpm1(-theta * np.log(t))

    @staticmethod
    def phi_inv(log_s, par):
        theta, delta = par
        return np.exp(-np.logaddexp(0.0, log_s / delta) / theta)

    @staticmethod
    def log_nphi_p(t, par):
        theta, delta = par
        return (
            math.log(theta * delta)
            - (theta + 1.0) * np.log(t)
            + (delta - 1.0) * _logexpm1(-theta * np.log(t))
        )

    @staticmethod
    def g(t, par):
        theta, delta = par
        one_m_tpow = -np.expm1(theta * np.log(t))
        return (theta + 1.0) / t + theta * (delta - 1.0) / (t * one_m_tpow)


class _BB6:
    @staticmethod
    def _pieces(t, theta):
        log_w = _log1mexp(theta * np.log1p(-t))
        L = -log_w  # can be tiny near t -> 1, large near t -> 0... both fine
        return log_w, L

    @staticmethod
    def log_phi(t, par):
        theta, delta = par
        _, L = _BB6._pieces(t, theta)
        return delta * np.log(L)

    @staticmethod
    def phi_inv(log_s, par):
        theta, delta = par
        lam = np.exp(log_s / delta)
        return -np.expm1(_log1mexp(-lam) / theta)

    @staticmethod
    def log_nphi_p(t, par):
        theta, delta = par
        log_w, L = _BB6._pieces(t, theta)
        return (
            math.log(theta * delta)
            + (delta - 1.0) * np.log(L)
            + (theta - 1.0) * np.log1p(-t)
            - log_w
        )

    @staticmethod
    def g(t, par):
        theta, delta = par
        log_w, L = _BB6._pieces(t, theta)
        w = np.exp(log_w)
        omt = 1.0 - t
        core = theta * omt ** (theta - 1.0) / w
        return (delta - 1.0) * core / L + (theta - 1.0) / omt + core


class _BB7:
    @staticmethod
    def log_phi(t, par):
        theta, delta = par
        log_w = _log1mexp(theta * np.log1p(-t))
        return _logexpm1(-delta * log_w)

    @staticmethod
    def phi_inv(log_s, par):
        theta, delta = par
        log_w = -np.logaddexp(0.0, log_s) / delta
        return -np.expm1(_log1mexp(log_w) / theta)

    @staticmethod
    def log_nphi_p(t, par):
        theta, delta = par
        log_w = _log1mexp(theta * np.log1p(-t))
        return math.log(theta * delta) - (delta + 1.0) * log_w + (theta - 1.0) * np.log1p(-t)

    @staticmethod
    def g(t, par):
        theta, delta = par
        log_w = _log1mexp(theta * np.log1p(-t))
        w = np.exp(log_w)
        omt = 1.0 - t
        return (delta + 1.0) * theta * omt ** (theta - 1.0) / w + (theta - 1.0) / omt


class _BB8:
    @staticmethod
    def _log_x(t, theta, delta):
        return _log1mexp(theta * np.log1p(-delta * t))

    @staticmethod
    def log_phi(t, par):
        theta, delta = par
        log_eta = _log1mexp(theta * math.log1p(-delta)) if delta < 1.0 else 0.0
        phi = log_eta - _BB8._log_x(t, theta, delta)
        # roundoff can leave a signed zero at t == 1
        return np.log(np.maximum(phi, 1e-300))

    @staticmethod
    def phi_inv(log_s, par):
        theta, delta = par
        log_eta = _log1mexp(theta * math.log1p(-delta)) if delta < 1.0 else 0.0
        log_x = log_eta - np.exp(log_s)
        return -np.expm1(_log1mexp(log_x) / theta) / delta

    @staticmethod
    def log_nphi_p(t, par):
        theta, delta = par
        return (
            math.log(theta * delta)
            + (theta - 1.0) * np.log1p(-delta * t)
            - _BB8._log_x(t, theta, delta)
        )

    @staticmethod
    def g(t, par):
        theta, delta = par
        x = np.exp(_BB8._log_x(t, theta, delta))
        omdt = 1.0 - delta * t
        return (theta - 1.0) * delta / omdt + theta * delta * omdt ** (theta - 1.0) / x


_ARCHIMEDEAN = {
    "clayton": _Clayton,
    "gumbel": _Gumbel,
    "joe": _Joe,
    "bb1": _BB1,
    "bb6": _BB6,
    "bb7": _BB7,
    "bb8": _BB8,
}


def _arch_logC(gen, u, v, par):
    log_s = np.logaddexp(gen.log_phi(u, par), gen.log_phi(v, par))
    return gen.phi_inv(log_s, par)


def _arch_logpdf(gen, u, v, par):
    C = np.clip(_arch_logC(gen, u, v, par), UNIT_EPS, 1.0 - UNIT_EPS)
    log_pC = gen.log_nphi_p(C, par)
    return (
        gen.log_nphi_p(u, par)
        + gen.log_nphi_p(v, par)
        - 2.0 * log_pC
        + np.log(gen.g(C, par))
    )


def _arch_hcond(gen, v, u, par):
    C = np.clip(_arch_logC(gen, u, v, par), UNIT_EPS, 1.0 - UNIT_EPS)
    return np.exp(gen.log_nphi_p(u, par) - gen.log_nphi_p(C, par))


def _arch_cdf(gen, u, v, par):
    return _arch_logC(gen, u, v, par)


# ---------------------------------------------------------------------------
# base-family dispatch (unrotated, exchangeable)
# ---------------------------------------------------------------------------

def _base_logpdf(family, u, v, par):
    if family == "indep":
        return np.zeros(np.broadcast(u, v).shape)
    if family == "gaussian":
        return _gaussian_logpdf(u, v, par[0])
    if family == "student":
        return _student_logpdf(u, v, par[0], par[1])
    if family == "frank":
        return _frank_logpdf(u, v, par[0])
    return _arch_logpdf(_ARCHIMEDEAN[family], u, v, par)


def _base_hcond(family, v, u, par):
    """P(second <= v | first = u) of the unrotated copula."""
    if family == "indep":
        return np.broadcast_to(np.asarray(v, dtype=float), np.broadcast(u, v).shape).copy()
    if family == "gaussian":
        return _gaussian_hcond(v, u, par[0])
    if family == "student":
        return _student_hcond(v, u, par[0], par[1])
    if family == "frank":
        return _frank_hcond(v, u, par[0])
    return _arch_hcond(_ARCHIMEDEAN[family], v, u, par)


def _base_hinv(family, p, u, par):
    if family == "indep":
        return np.broadcast_to(np.asarray(p, dtype=float), np.broadcast(p, u).shape).copy()
    if family == "gaussian":
        return _gaussian_hinv(p, u, par[0])
    if family == "student":
        return _student_hinv(p, u, par[0], par[1])
    if family == "frank":
        return _frank_hinv(p, u, par[0])
    if family == "clayton":
        theta = par[0]
        a = -theta * np.log(u)
        with np.errstate(divide="ignore"):
            log_t = np.log(np.expm1(-theta / (theta + 1.0) * np.log(p)))
        return np.exp(-np.logaddexp(0.0, a + log_t) / theta)
    return _bisect_hinv(family, p, u, par)


def _bisect_hinv(family, p, u, par, iters: int = 60):
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    p, u = np.broadcast_arrays(p, u)
    lo = np.full(p.shape, UNIT_EPS)
    hi = np.full(p.shape, 1.0 - UNIT_EPS)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        val = _base_hcond(family, mid, u, par)
        below = val < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    if np.any(~np.isfinite(out)):
        raise FitError(f"h-function inversion failed for family {family!r}")
    return out


def _base_cdf(family, u, v, par):
    if family == "indep":
        return np.asarray(u) * np.asarray(v)
    if family == "gaussian":
        return _gaussian_cdf(u, v, par[0])
    if family == "student":
        # 1-D quadrature of the h-function along the first argument
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = np.atleast_1d(np.asarray(v, dtype=float))
        nodes, weights = np.polynomial.legendre.leggauss(64)
        out = np.empty(np.broadcast(u, v).shape)
        ub, vb = np.broadcast_arrays(u, v)
        for i in range(ub.size):
            s = 0.5 * ub.flat[i] * (nodes + 1.0)
            w = 0.5 * ub.flat[i] * weights
            out.flat[i] = np.sum(w * _student_hcond(vb.flat[i], np.clip(s, UNIT_EPS, None), par[0], par[1]))
        return out
    if family == "frank":
        return _frank_cdf(u, v, par[0])
    return _arch_cdf(_ARCHIMEDEAN[family], u, v, par)


# ---------------------------------------------------------------------------
# rotation layer
# ---------------------------------------------------------------------------

def _rotate_args(rotation: int, u, v):
    """Map (u, v) to the base-copula arguments of the rotated density."""
    if rotation == 0:
        return u, v
    if rotation == 90:
        return v, 1.0 - u
    if rotation == 180:
        return 1.0 - u, 1.0 - v
    return 1.0 - v, u  # 270


def logpdf(cop: FittedBicop, u, v) -> np.ndarray:
    """Log copula density at (u, v), rotation applied."""
    u = _as_unit(u)
    v = _as_unit(v)
    a, b = _rotate_args(cop.rotation, u, v)
    return np.asarray(_base_logpdf(cop.family, a, b, cop.params))


def pdf(cop: FittedBicop, u, v) -> np.ndarray:
    """Copula density c(u, v) >= 0."""
    return np.exp(logpdf(cop, u, v))


def cdf(cop: FittedBicop, u, v) -> np.ndarray:
    """Copula CDF C(u, v), rotation applied."""
    u = _as_unit(u)
    v = _as_unit(v)
    fam, par, rot = cop.family, cop.params, cop.rotation
    if rot == 0:
        return np.asarray(_base_cdf(fam, u, v, par))
    if rot == 90:
        return np.asarray(v - _base_cdf(fam, v, 1.0 - u, par))
    if rot == 180:
        return np.asarray(u + v - 1.0 + _base_cdf(fam, 1.0 - u, 1.0 - v, par))
    return np.asarray(u - _base_cdf(fam, 1.0 - v, u, par))  # 270


def hfunc(cop: FittedBicop, v, u, cond: str = "first") -> np.ndarray:
    """Conditional CDF of one argument given the other.

    With ``cond="first"`` the conditioning variable is the first copula
    argument and the result is P(second <= v | first = u); ``cond="second"``
    conditions on the second argument.
    """
    v = _as_unit(v)
    u = _as_unit(u)
    fam, par, rot = cop.family, cop.params, cop.rotation
    if cond == "first":
        if rot == 0:
            out = _base_hcond(fam, v, u, par)
        elif rot == 90:
            out = _base_hcond(fam, v, 1.0 - u, par)
        elif rot == 180:
            out = 1.0 - _base_hcond(fam, 1.0 - v, 1.0 - u, par)
        else:
            out = 1.0 - _base_hcond(fam, 1.0 - v, u, par)
    elif cond == "second":
        if rot == 0:
            out = _base_hcond(fam, v, u, par)
        elif rot == 90:
            out = 1.0 - _base_hcond(fam, 1.0 - v, u, par)
        elif rot == 180:
            out = 1.0 - _base_hcond(fam, 1.0 - v, 1.0 - u, par)
        else:
            out = _base_hcond(fam, v, 1.0 - u, par)
    else:
        raise ValueError("cond must be 'first' or 'second'")
    return np.clip(np.asarray(out), 0.0, 1.0)


def hinv(cop: FittedBicop, p, u, cond: str = "first") -> np.ndarray:
    """Inverse of :func:`hfunc` in its target argument."""
    p = _as_unit(p)
    u = _as_unit(u)
    fam, par, rot = cop.family, cop.params, cop.rotation
    if cond == "first":
        if rot == 0:
            out = _base_hinv(fam, p, u, par)
        elif rot == 90:
            out = _base_hinv(fam, p, 1.0 - u, par)
        elif rot == 180:
            out = 1.0 - _base_hinv(fam, 1.0 - p, 1.0 - u, par)
        else:
            out = 1.0 - _base_hinv(fam, 1.0 - p, u, par)
    elif cond == "second":
        if rot == 0:
            out = _base_hinv(fam, p, u, par)
        elif rot == 90:
            out = 1.0 - _base_hinv(fam, 1.0 - p, u, par)
        elif rot == 180:
            out = 1.0 - _base_hinv(fam, 1.0 - p, 1.0 - u, par)
        else:
            out = _base_hinv(fam, p, 1.0 - u, par)
    else:
        raise ValueError("cond must be 'first' or 'second'")
    out = np.asarray(out)
    if np.any(~np.isfinite(out)):
        raise FitError("h-function inversion produced non-finite values")
    return np.clip(out, UNIT_EPS, 1.0 - UNIT_EPS)


# ---------------------------------------------------------------------------
# Kendall's tau
# ---------------------------------------------------------------------------

@lru_cache(maxsize=512)
def _frank_tau(theta: float) -> float:
    th = abs(theta)
    debye, _ = integrate.quad(lambda t: t / math.expm1(t), 0.0, th)
    t = 1.0 - 4.0 / th + 4.0 * debye / (th * th)
    return math.copysign(t, theta)


def _joe_tau(theta: float) -> float:
    if abs(theta - 2.0) < 1e-8:
        theta = 2.0 + 1e-8
    return 1.0 + 2.0 * (digamma(2.0) - digamma(2.0 / theta + 1.0)) / (2.0 - theta)


@lru_cache(maxsize=512)
def _arch_tau_quad(family: str, par: tuple) -> float:
    """tau = 1 + 4 * int_0^1 phi(t)/phi'(t) dt for Archimedean generators."""
    gen = _ARCHIMEDEAN[family]

    def integrand(t):
        t = np.asarray([t])
        return -float(np.exp(gen.log_phi(t, par) - gen.log_nphi_p(t, par))[0])

    val, _ = integrate.quad(integrand, 1e-12, 1.0 - 1e-12, limit=200)
    return 1.0 + 4.0 * val


def _base_tau(family: str, par: tuple) -> float:
    if family == "indep":
        return 0.0
    if family in ("gaussian", "student"):
        return 2.0 * math.asin(par[0]) / math.pi
    if family == "clayton":
        return par[0] / (par[0] + 2.0)
    if family == "gumbel":
        return 1.0 - 1.0 / par[0]
    if family == "frank":
        return _frank_tau(par[0])
    if family == "joe":
        return _joe_tau(par[0])
    if family == "bb1":
        return 1.0 - 2.0 / (par[1] * (par[0] + 2.0))
    return _arch_tau_quad(family, tuple(par))


def tau(cop: FittedBicop) -> float:
    """Kendall's tau implied by the fitted parameters, rotation applied."""
    t = _base_tau(cop.family, cop.params)
    if cop.rotation in (90, 270):
        return -t
    return t


def _tau_inverse_init(family: str, tau_hat: float) -> list[float]:
    """Deterministic optimizer start; matches the empirical tau where a
    (possibly boundary-reduced) closed form exists, else the bound midpoint."""
    t = min(abs(tau_hat), 0.93)
    if family == "gaussian" or family == "student":
        rho = math.sin(math.pi * tau_hat / 2.0)
        rho = max(-0.97, min(0.97, rho))
        return [rho] if family == "gaussian" else [rho, math.log(10.0)]
    if family == "clayton":
        return [min(28.0, max(0.05, 2.0 * t / max(1.0 - t, 1e-6)))]
    if family == "gumbel":
        return [min(50.0, max(1.0, 1.0 / max(1.0 - t, 0.02)))]
    if family == "frank":
        lo, hi = 1e-3, 35.0
        f = lambda th: _frank_tau(th) - t
        if f(hi) < 0:
            theta = hi
        elif f(lo) > 0:
            theta = lo
        else:
            theta = optimize.brentq(f, lo, hi, xtol=1e-6)
        return [math.copysign(max(theta, 1e-3), tau_hat if tau_hat != 0 else 1.0)]
    if family == "joe":
        lo, hi = 1.0 + 1e-4, 30.0
        f = lambda th: _joe_tau(th) - t
        theta = hi if f(hi) < 0 else (lo if f(lo) > 0 else optimize.brentq(f, lo, hi, xtol=1e-5))
        return [theta]
    if family == "bb1":
        delta = 1.25
        theta = 2.0 / (delta * max(1.0 - t, 0.02)) - 2.0
        return [min(7.0, max(0.05, theta)), delta]
    if family == "bb6":
        return [1.25, min(8.0, max(1.0, 1.0 / max(1.0 - t, 0.15)))]
    if family == "bb7":
        return [1.25, min(25.0, max(0.05, t / max(1.0 - t, 1e-6)))]
    if family == "bb8":
        theta = min(8.0, max(1.0, 1.0 / max(1.0 - t, 0.15)))
        return [theta, 0.95]
    raise InvalidParameterError(f"no initialization for family {family!r}")


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def fit_mle(
    u,
    v,
    family: str,
    rotation: int = 0,
    tau_hat: float | None = None,
) -> FittedBicop:
    """Fit one family/rotation by maximum likelihood on pseudo-observations.

    One-parameter families use bounded Brent search; two-parameter families a
    bounded Nelder-Mead started from a tau-matched point (Student's nu is
    searched on the log scale).
    """
    u = _as_unit(u)
    v = _as_unit(v)
    n = u.size
    if n < 10 or v.size != n:
        raise FitError("need at least 10 paired observations")
    if family == "indep":
        return FittedBicop("indep", 0, (), loglik=0.0, n_obs=n)

    a, b = _rotate_args(rotation, u, v)
    if tau_hat is None:
        tau_hat = kendalltau(u, v).statistic
    if not np.isfinite(tau_hat):
        raise FitError("degenerate data: Kendall's tau undefined (all ties?)")
    # tau of the data seen by the base family
    base_tau = -tau_hat if rotation in (90, 270) else tau_hat

    def negll(par_list) -> float:
        try:
            ll = _base_logpdf(family, a, b, tuple(par_list))
        except FloatingPointError:
            return 1e12
        total = float(np.sum(ll))
        return -total if np.isfinite(total) else 1e12

    bounds = _FIT_BOUNDS[family]
    if len(bounds) == 1:
        lo, hi = bounds[0]
        if family == "frank" and base_tau < 0:
            lo, hi = -35.0, -1e-4
        res = optimize.minimize_scalar(
            lambda th: negll([th]),
            bounds=(lo, hi),
            method="bounded",
            options={"maxiter": _MAX_FEV, "xatol": _REL_TOL * max(1.0, hi - lo)},
        )
        params = (float(res.x),)
        ll = -res.fun
    elif family == "student":
        # rho and nu are nearly orthogonal: profile nu on the log scale at the
        # tau-inversion rho, then polish each coordinate once.
        rho = _tau_inverse_init("student", base_tau)[0]
        rho_lo, rho_hi = bounds[0]
        lnu_lo, lnu_hi = math.log(bounds[1][0]), math.log(bounds[1][1])
        res_nu = optimize.minimize_scalar(
            lambda lnu: negll([rho, math.exp(lnu)]),
            bounds=(lnu_lo, lnu_hi),
            method="bounded",
            options={"maxiter": _MAX_FEV, "xatol": 1e-4},
        )
        nu = math.exp(res_nu.x)
        res_rho = optimize.minimize_scalar(
            lambda r: negll([r, nu]),
            bounds=(rho_lo, rho_hi),
            method="bounded",
            options={"maxiter": _MAX_FEV, "xatol": 1e-6},
        )
        rho = float(res_rho.x)
        res_nu = optimize.minimize_scalar(
            lambda lnu: negll([rho, math.exp(lnu)]),
            bounds=(lnu_lo, lnu_hi),
            method="bounded",
            options={"maxiter": _MAX_FEV, "xatol": 1e-4},
        )
        nu = math.exp(res_nu.x)
        params = (rho, nu)
        ll = -res_nu.fun
    else:
        x0 = _tau_inverse_init(family, base_tau)
        lb = [bounds[0][0], bounds[1][0]]
        ub = [bounds[0][1], bounds[1][1]]
        x0 = [min(max(x0[0], lb[0]), ub[0]), min(max(x0[1], lb[1]), ub[1])]
        res = optimize.minimize(
            negll,
            np.asarray(x0),
            method="Nelder-Mead",
            bounds=list(zip(lb, ub)),
            options={"maxfev": _MAX_FEV, "xatol": _REL_TOL, "fatol": _REL_TOL},
        )
        params = (float(res.x[0]), float(res.x[1]))
        ll = -res.fun
    if not np.isfinite(ll):
        raise FitError(f"likelihood not finite for family {family!r}")
    fit_bounds = _FIT_BOUNDS[family]
    if family == "frank" and params[0] < 0:
        fit_bounds = ((-35.0, -1e-4),)
    params = tuple(
        min(max(p, flo), fhi) for p, (flo, fhi) in zip(params, fit_bounds)
    )
    return FittedBicop(family, rotation, params, loglik=float(ll), n_obs=n)


def default_candidates(tau_hat: float) -> list[tuple[str, int]]:
    """Candidate (family, rotation) pairs, pre-filtered by the sign of the
    empirical Kendall's tau; symmetric families always participate."""
    rots = (0, 180) if tau_hat >= 0 else (90, 270)
    out: list[tuple[str, int]] = []
    for fam in FAMILIES:
        if fam in SYMMETRIC_FAMILIES:
            out.append((fam, 0))
        else:
            out.extend((fam, r) for r in rots)
    return out


def select_family(
    u,
    v,
    criterion: str = "aic",
    candidates: list[tuple[str, int]] | None = None,
) -> FittedBicop:
    """Fit every candidate and return the one with the lowest criterion.

    Ties break toward the earliest candidate in the enumeration order
    (independence first).
    """
    if criterion not in ("aic", "bic"):
        raise ValueError("criterion must be 'aic' or 'bic'")
    u = _as_unit(u)
    v = _as_unit(v)
    tau_hat = kendalltau(u, v).statistic
    if not np.isfinite(tau_hat):
        raise FitError("degenerate data: Kendall's tau undefined (all ties?)")
    if candidates is None:
        candidates = default_candidates(tau_hat)
    if not candidates:
        raise FitError("empty candidate set")
    best: FittedBicop | None = None
    best_value = math.inf
    for fam, rot in candidates:
        try:
            fit = fit_mle(u, v, fam, rot, tau_hat=tau_hat)
        except FitError:
            continue
        value = fit.aic if criterion == "aic" else fit.bic
        if value < best_value:
            best = fit
            best_value = value
    if best is None:
        raise FitError("all candidate fits failed")
    return best


def sample(cop: FittedBicop, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw n pairs by conditional inversion."""
    u = rng.uniform(UNIT_EPS, 1.0 - UNIT_EPS, size=n)
    w = rng.uniform(UNIT_EPS, 1.0 - UNIT_EPS, size=n)
    v = hinv(cop, w, u, cond="first")
    return u, v
