"""GARCH-family model definitions, volatility filtering, simulation and
stationarity diagnostics.

Families
--------
``garch``      sigma2_i = omega + sum_k beta_k sigma2_{i-k} + sum_j alpha_j (x_{i-j} - mean)^2
``egarch``     ln sigma2_i = omega + alpha (|e| - E|e|) + gamma e + beta ln sigma2_{i-1}
``ngarch``     sigma2_i = omega + alpha (e - rho)^2 sigma2_{i-1} + beta sigma2_{i-1}
``ngarch-abs`` sigma2_i = omega + alpha |e|^delta + beta sigma2_{i-1}
               (power-shock variant; its exponent rides in ``aug.delta``)
``gjr``        sigma2_i = omega + sigma2_{i-1} (alpha e^2 + beta + gamma max(0, -e)^2)
``augmented``  Box-Cox volatility process driven by xi_1, xi_2 shock maps

with e = (x_{i-1} - mean) / sigma_{i-1}.  The first r = max(p, q) variances
are pinned at ``sigma1_sq`` (r = 1 for the non-garch families).
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .distributions import Gaussian, Ged, distribution_from_dict
from .errors import DomainError, InsufficientData, NonPositiveVariance
from .numerics import lgamma_fn, rng_stream

__all__ = [
    "FAMILIES",
    "AugParams",
    "GarchSpec",
    "GarchParams",
    "VolatilityFilterOutput",
    "SimulationOutput",
    "StationarityReport",
    "InformationCriteria",
    "filter_volatility",
    "simulate",
    "forecast_sigma_sq",
    "stationarity",
    "information_criteria",
    "spectral_radius_companion",
    "params_to_dict",
    "params_from_dict",
]

FAMILIES = ("garch", "egarch", "ngarch", "ngarch-abs", "gjr", "augmented")


@dataclass(frozen=True)
class AugParams:
    """Augmented-family shock-map coefficients (alpha_0..alpha_5, c, delta, lam).

    ``delta`` doubles as the shock exponent of the ``ngarch-abs`` variant.
    """

    a0: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    a4: float = 0.0
    a5: float = 0.0
    c: float = 0.0
    delta: float = 2.0
    lam: float = 1.0

    def to_dict(self):
        return {"a0": self.a0, "a1": self.a1, "a2": self.a2, "a3": self.a3,
                "a4": self.a4, "a5": self.a5, "c": self.c,
                "delta": self.delta, "lam": self.lam}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: float(v) for k, v in d.items()})


@dataclass(frozen=True)
class GarchSpec:
    """Model family, lag orders and innovation distribution.

    ``p`` counts variance lags (beta terms) and ``q`` shock lags (alpha
    terms); both are 1 for the non-``garch`` families.
    """

    family: str = "garch"
    p: int = 1
    q: int = 1
    innovation: object = field(default_factory=Gaussian)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.p < 1 or self.q < 1:
            raise DomainError("lag orders p and q must be >= 1")
        if self.family != "garch" and (self.p != 1 or self.q != 1):
            raise DomainError(f"family {self.family!r} supports only p = q = 1")

    @property
    def r(self) -> int:
        """Number of presample variances pinned at sigma1_sq."""
        return max(self.p, self.q) if self.family == "garch" else 1


@dataclass(frozen=True)
class GarchParams:
    omega: float = 0.0
    alpha: tuple = (0.0,)
    beta: tuple = (0.0,)
    gamma: float = 0.0
    rho: float = 0.0
    aug: Optional[AugParams] = None
    mean: float = 0.0
    sigma1_sq: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(a) for a in np.atleast_1d(self.alpha)))
        object.__setattr__(self, "beta", tuple(float(b) for b in np.atleast_1d(self.beta)))


def _validate(spec: GarchSpec, params: GarchParams):
    p_ = params
    vals = [p_.omega, p_.gamma, p_.rho, p_.mean, p_.sigma1_sq, *p_.alpha, *p_.beta]
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("parameters must be finite")
    if p_.sigma1_sq <= 0:
        raise DomainError("sigma1_sq must be positive")
    fam = spec.family
    if fam == "garch":
        if len(p_.alpha) != spec.q or len(p_.beta) != spec.p:
            raise DomainError(
                f"coefficient counts (len alpha={len(p_.alpha)}, len beta={len(p_.beta)}) "
                f"must match orders (q={spec.q}, p={spec.p})")
        if p_.omega <= 0 or any(a < 0 for a in p_.alpha) or any(b < 0 for b in p_.beta):
            raise DomainError("garch requires omega > 0, alpha_j >= 0, beta_k >= 0")
    elif fam == "egarch":
        pass  # log-variance recursion needs no positivity constraints
    elif fam in ("ngarch", "ngarch-abs"):
        if p_.omega <= 0 or p_.alpha[0] < 0 or p_.beta[0] < 0:
            raise DomainError(f"{fam} requires omega > 0, alpha >= 0, beta >= 0")
        if fam == "ngarch-abs":
            if p_.aug is None or p_.aug.delta <= 0:
                raise DomainError("ngarch-abs requires a positive shock exponent in aug.delta")
    elif fam == "gjr":
        if p_.omega <= 0 or p_.alpha[0] < 0 or p_.beta[0] < 0:
            raise DomainError("gjr requires omega > 0, alpha >= 0, beta >= 0")
        if p_.alpha[0] + p_.gamma < 0:
            raise DomainError("gjr requires alpha + gamma >= 0 for variance positivity")
    elif fam == "augmented":
        if p_.aug is None:
            raise DomainError("augmented family requires aug coefficients")
        a = p_.aug
        if any(v < 0 for v in (a.a0, a.a1, a.a2, a.a3, a.a4, a.a5)):
            raise DomainError("augmented requires alpha_i >= 0")
        if a.delta < 0 or a.lam < 0:
            raise DomainError("augmented requires delta >= 0 and lam >= 0")


@dataclass(frozen=True)
class VolatilityFilterOutput:
    sigma_sq: np.ndarray
    residuals: np.ndarray
    loglik: float


class SimulationOutput(NamedTuple):
    returns: np.ndarray
    sigma_sq: np.ndarray
    innovations: np.ndarray


def _run_filter(spec, params, x):
    p_ = params
    alpha = np.asarray(p_.alpha, dtype=float)
    beta = np.asarray(p_.beta, dtype=float)
    fam = spec.family
    if fam == "garch":
        return _kernels.garch_pq_filter(x, p_.mean, p_.omega, alpha, beta, p_.sigma1_sq)
    if fam == "gjr":
        return _kernels.gjr_filter(x, p_.mean, p_.omega, alpha[0], beta[0],
                                   p_.gamma, p_.sigma1_sq)
    if fam == "ngarch":
        return _kernels.ngarch_filter(x, p_.mean, p_.omega, alpha[0], beta[0],
                                      p_.rho, p_.sigma1_sq)
    if fam == "ngarch-abs":
        return _kernels.ngarch_abs_filter(x, p_.mean, p_.omega, alpha[0], beta[0],
                                          p_.aug.delta, p_.sigma1_sq)
    if fam == "egarch":
        e_abs = spec.innovation.abs_moment()
        return _kernels.egarch_filter(x, p_.mean, p_.omega, alpha[0], beta[0],
                                      p_.gamma, e_abs, p_.sigma1_sq)
    s, bad = _kernels.augmented_filter(
        x, p_.mean, p_.aug.a0, p_.aug.a1, p_.aug.a2, p_.aug.a3, p_.aug.a4,
        p_.aug.a5, p_.aug.c, p_.aug.delta, p_.aug.lam, p_.sigma1_sq)
    if bad >= 0:
        raise DomainError(
            f"augmented Box-Cox inverse left its domain at step {bad} "
            f"(x*lam + 1 must stay positive)")
    return s


def filter_volatility(spec: GarchSpec, params: GarchParams,
                      returns: np.ndarray) -> VolatilityFilterOutput:
    """Run the family's variance recursion over ``returns``.

    Returns the sigma_t^2 path, the standardized residuals
    e_i = (x_i - mean) / sigma_i and the innovation log-likelihood
    sum_i [ln f(e_i) - ln sigma_i].
    """
    _validate(spec, params)
    x = np.ascontiguousarray(returns, dtype=float)
    if x.ndim != 1:
        raise DomainError("returns must be one-dimensional")
    if x.shape[0] <= spec.r:
        raise InsufficientData(
            f"need more than r={spec.r} observations, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DomainError("returns contain non-finite values")
    s = _run_filter(spec, params, x)
    if not np.all(s > 0) or not np.all(np.isfinite(s)):
        raise NonPositiveVariance(
            "filtered variance left the positive reals; parameter constraints "
            "should make this unreachable")
    sig = np.sqrt(s)
    resid = (x - params.mean) / sig
    loglik = float(np.sum(spec.innovation.logpdf(resid)) - np.sum(np.log(sig)))
    return VolatilityFilterOutput(sigma_sq=s, residuals=resid, loglik=loglik)


def simulate(spec: GarchSpec, params: GarchParams, n: int,
             rng: np.random.Generator) -> SimulationOutput:
    """Draw a path of length ``n``; filtering the simulated returns with the
    same parameters reproduces the sigma_t^2 path exactly."""
    _validate(spec, params)
    if n < 1:
        raise DomainError("n must be >= 1")
    eps = np.ascontiguousarray(spec.innovation.sample(rng, n), dtype=float)
    p_ = params
    alpha = np.asarray(p_.alpha, dtype=float)
    beta = np.asarray(p_.beta, dtype=float)
    fam = spec.family
    if fam == "garch":
        x, s = _kernels.garch_pq_simulate(eps, p_.mean, p_.omega, alpha, beta,
                                          p_.sigma1_sq)
    elif fam == "gjr":
        x, s = _kernels.gjr_simulate(eps, p_.mean, p_.omega, alpha[0], beta[0],
                                     p_.gamma, p_.sigma1_sq)
    elif fam == "ngarch":
        x, s = _kernels.ngarch_simulate(eps, p_.mean, p_.omega, alpha[0], beta[0],
                                        p_.rho, p_.sigma1_sq)
    elif fam == "ngarch-abs":
        x, s = _kernels.ngarch_abs_simulate(eps, p_.mean, p_.omega, alpha[0],
                                            beta[0], p_.aug.delta, p_.sigma1_sq)
    elif fam == "egarch":
        e_abs = spec.innovation.abs_moment()
        x, s = _kernels.egarch_simulate(eps, p_.mean, p_.omega, alpha[0], beta[0],
                                        p_.gamma, e_abs, p_.sigma1_sq)
    else:
        x, s, bad = _kernels.augmented_simulate(
            eps, p_.mean, p_.aug.a0, p_.aug.a1, p_.aug.a2, p_.aug.a3, p_.aug.a4,
            p_.aug.a5, p_.aug.c, p_.aug.delta, p_.aug.lam, p_.sigma1_sq)
        if bad >= 0:
            raise DomainError(
                f"augmented Box-Cox inverse left its domain at step {bad}")
    return SimulationOutput(returns=x, sigma_sq=s, innovations=eps)


def forecast_sigma_sq(spec: GarchSpec, params: GarchParams, returns) -> float:
    """One-step-ahead sigma_{n+1}^2 from the filter recursion.

    Implemented by filtering the series with one dummy observation appended;
    sigma_{n+1}^2 depends only on data up to n, so the dummy value is inert.
    """
    x = np.ascontiguousarray(returns, dtype=float)
    extended = np.append(x, params.mean)
    return float(filter_volatility(spec, params, extended).sigma_sq[-1])


# ---------------------------------------------------------------------------
# stationarity diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StationarityReport:
    k: float
    spectral_radius: float
    lyapunov: float
    lyapunov_se: float
    limit_variance: float


def spectral_radius_companion(lambdas, iters: int = 2000) -> float:
    """Spectral radius of the companion matrix of the lag weights by power
    iteration (the weights are nonnegative, so the radius is a Perron root)."""
    lam = np.asarray(lambdas, dtype=float)
    r = lam.shape[0]
    if r == 0 or np.all(lam == 0):
        return 0.0
    a = np.zeros((r, r))
    a[0, :] = lam
    if r > 1:
        a[np.arange(1, r), np.arange(0, r - 1)] = 1.0
    v = np.ones(r) / math.sqrt(r)
    rho = 0.0
    for _ in range(iters):
        w = a @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        rho_new = nw
        v = w / nw
        if abs(rho_new - rho) < 1e-14 * max(1.0, rho_new):
            return rho_new
        rho = rho_new
    return rho


def _abs_power_moment(dist, delta: float) -> float:
    """E|eps|^delta for the innovation distribution."""
    if isinstance(dist, Gaussian) and dist.mu == 0.0:
        return math.exp(0.5 * delta * math.log(2.0)
                        + lgamma_fn((delta + 1.0) / 2.0)) / math.sqrt(math.pi)
    if isinstance(dist, Ged):
        nu = dist.nu
        return (dist.lam ** delta) * 2.0 ** (delta / nu) * math.exp(
            lgamma_fn((delta + 1.0) / nu) - lgamma_fn(1.0 / nu))
    draws = dist.sample(rng_stream(0, 12345), 200_000)
    return float(np.mean(np.abs(draws) ** delta))


def stationarity(spec: GarchSpec, params: GarchParams, mc_draws: int = 10_000,
                 rng: Optional[np.random.Generator] = None) -> StationarityReport:
    """Family stationarity coefficient k, companion spectral radius, Monte
    Carlo Lyapunov drift E[ln(growth factor)] with its standard error, and
    the variance limit omega/k (returns +inf when k <= 0)."""
    _validate(spec, params)
    if mc_draws < 100:
        raise DomainError("mc_draws too small for a meaningful Lyapunov estimate")
    if rng is None:
        rng = rng_stream(0, 777)
    p_ = params
    fam = spec.family
    eps = np.asarray(spec.innovation.sample(rng, mc_draws), dtype=float)

    def _mc(vals):
        vals = vals[np.isfinite(vals)]
        return float(np.mean(vals)), float(np.std(vals) / math.sqrt(len(vals)))

    if fam == "garch":
        q, p = len(p_.alpha), len(p_.beta)
        r = max(p, q)
        lam = np.zeros(r)
        lam[:q] += np.asarray(p_.alpha)
        lam[:p] += np.asarray(p_.beta)
        k = 1.0 - float(lam.sum())
        rho_a = spectral_radius_companion(lam)
        if p == 1 and q == 1:
            ly, se = _mc(np.log(p_.alpha[0] * eps ** 2 + p_.beta[0]))
        else:
            ly, se = math.nan, math.nan
        limit = p_.omega / k if k > 0 else math.inf
    elif fam == "gjr":
        a, b, g = p_.alpha[0], p_.beta[0], p_.gamma
        k = 1.0 - a - b - g / 2.0
        rho_a = spectral_radius_companion([a + b + g / 2.0])
        neg = np.where(eps < 0, -eps, 0.0)
        ly, se = _mc(np.log(b + a * eps ** 2 + g * neg ** 2))
        limit = p_.omega / k if k > 0 else math.inf
    elif fam == "ngarch":
        a, b = p_.alpha[0], p_.beta[0]
        k = 1.0 - a * (1.0 + p_.rho ** 2) - b
        rho_a = spectral_radius_companion([1.0 - k])
        ly, se = _mc(np.log(b + a * (eps - p_.rho) ** 2))
        limit = p_.omega / k if k > 0 else math.inf
    elif fam == "ngarch-abs":
        b = p_.beta[0]
        k = 1.0 - b
        rho_a = abs(b)
        ly, se = (math.log(b), 0.0) if b > 0 else (-math.inf, 0.0)
        if k > 0:
            shock = _abs_power_moment(spec.innovation, p_.aug.delta)
            limit = (p_.omega + p_.alpha[0] * shock) / k
        else:
            limit = math.inf
    elif fam == "egarch":
        b = p_.beta[0]
        k = 1.0 - b
        rho_a = abs(b)
        ly, se = (math.log(abs(b)), 0.0) if b != 0 else (-math.inf, 0.0)
        # limit of E[ln sigma^2], finite iff |beta| < 1
        limit = p_.omega / k if abs(b) < 1 else math.inf
    else:  # augmented
        a_ = p_.aug
        sup = np.where(a_.c - eps > 0, a_.c - eps, 0.0)
        ae = np.abs(eps - a_.c)
        xi1 = a_.a1 + a_.a2 * ae ** a_.delta + a_.a3 * sup ** a_.delta
        with np.errstate(divide="ignore"):
            ly, se = _mc(np.log(xi1))
        exi1 = float(np.mean(xi1))
        k = 1.0 - exi1
        rho_a = exi1
        if a_.delta > 0:
            xi2 = a_.a4 * (ae ** a_.delta - 1.0) / a_.delta \
                + a_.a5 * (sup ** a_.delta - 1.0) / a_.delta
            exi2 = float(np.mean(xi2))
        else:
            exi2 = math.nan
        if k > 0 and a_.lam == 1.0:
            limit = (a_.a0 + exi2) / k
        else:
            limit = math.inf if k <= 0 else math.nan
    return StationarityReport(k=k, spectral_radius=rho_a, lyapunov=ly,
                              lyapunov_se=se, limit_variance=limit)


# ---------------------------------------------------------------------------
# information criteria
# ---------------------------------------------------------------------------


class InformationCriteria(NamedTuple):
    aic: float
    aicc: float
    bic: float
    hqc: float
    caic: float


def information_criteria(loglik: float, n_params: int, n_obs: int) -> InformationCriteria:
    """AIC, AICc, BIC, HQC and CAIC from a maximized log-likelihood."""
    if n_obs <= n_params + 1:
        raise DomainError("AICc needs n_obs > n_params + 1")
    k = n_params
    n = n_obs
    aic = -2.0 * loglik + 2.0 * k
    return InformationCriteria(
        aic=aic,
        aicc=aic + 2.0 * k * (k + 1.0) / (n - k - 1.0),
        bic=-2.0 * loglik + k * math.log(n),
        hqc=-2.0 * loglik + 2.0 * k * math.log(math.log(n)),
        caic=-2.0 * loglik + k * (math.log(n) + 1.0),
    )


# ---------------------------------------------------------------------------
# JSON mapping (flat object, field names fixed by the file contract)
# ---------------------------------------------------------------------------


def params_to_dict(spec: GarchSpec, params: GarchParams) -> dict:
    return {
        "family": spec.family,
        "omega": params.omega,
        "alpha": list(params.alpha),
        "beta": list(params.beta),
        "gamma": params.gamma,
        "rho": params.rho,
        "aug": params.aug.to_dict() if params.aug is not None else None,
        "mean": params.mean,
        "sigma1_sq": params.sigma1_sq,
        "innovation": spec.innovation.to_dict(),
    }


def params_from_dict(d: dict):
    """Returns ``(spec, params)``; lag orders come from the coefficient
    vector lengths."""
    family = d["family"]
    alpha = tuple(float(a) for a in d["alpha"])
    beta = tuple(float(b) for b in d["beta"])
    innovation = distribution_from_dict(d["innovation"])
    spec = GarchSpec(family=family, p=len(beta) if family == "garch" else 1,
                     q=len(alpha) if family == "garch" else 1,
                     innovation=innovation)
    aug = d.get("aug")
    params = GarchParams(
        omega=float(d["omega"]), alpha=alpha, beta=beta,
        gamma=float(d.get("gamma", 0.0) or 0.0), rho=float(d.get("rho", 0.0) or 0.0),
        aug=AugParams.from_dict(aug) if aug else None,
        mean=float(d.get("mean", 0.0)), sigma1_sq=float(d["sigma1_sq"]))
    _validate(spec, params)
    return spec, params
