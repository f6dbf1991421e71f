"""Maximum-likelihood estimation of GARCH parameters with a constant mean.

The optimizer works on an unconstrained transform of the parameter vector
(log for positive coefficients, a logistic map for box-constrained shapes)
with a soft penalty outside the finite-variance region, runs a restarted
Nelder-Mead simplex search and then a quasi-Newton polish.  Standard errors
come from a central-difference Hessian in the original coordinates.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import optimize

from .distributions import Ged
from .errors import (
    DegenerateData,
    DomainError,
    InsufficientData,
    NonPositiveVariance,
)
from .garch import (
    AugParams,
    GarchParams,
    GarchSpec,
    InformationCriteria,
    filter_volatility,
    information_criteria,
    params_to_dict,
)

__all__ = ["FitOptions", "FitResult", "loglikelihood", "fit"]

# box for the jointly estimated GED shape
_NU_LO, _NU_HI = 0.3, 8.0
# box for the egarch persistence coefficient
_BETA_LO, _BETA_HI = -0.999999, 0.999999
# soft stationarity penalty: persistence above this margin is charged
_PERSISTENCE_CAP = 0.9999
_PENALTY_SCALE = 1e7


def loglikelihood(spec: GarchSpec, params: GarchParams, returns) -> float:
    """sum_t [ln f(e_t) - ln sigma_t] under ``spec.innovation``'s density."""
    return filter_volatility(spec, params, returns).loglik


@dataclass(frozen=True)
class FitOptions:
    """Fitting controls; the defaults follow standard practice for daily
    financial returns (initial point inside the finite-variance region)."""

    init: Optional[GarchParams] = None
    init_nu: float = 1.5
    tol: float = 1e-8           # absolute simplex size
    ftol: float = 1e-10         # objective-change tolerance
    max_iter: int = 50_000
    restarts: int = 4
    polish: bool = True
    grad_tol: float = 0.1       # max-norm certifying a stationary point
    min_obs: int = 100
    hessian_step: float = 1e-4


@dataclass(frozen=True)
class FitResult:
    spec: GarchSpec
    params: GarchParams
    nu_hat: Optional[float]
    loglik: float
    criteria: InformationCriteria
    converged: bool
    iterations: int
    std_errors: dict
    trace: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        se = {k: (None if (v is None or not math.isfinite(v)) else v)
              for k, v in self.std_errors.items()}
        return {
            "spec": {"family": self.spec.family, "p": self.spec.p, "q": self.spec.q,
                     "innovation": self.spec.innovation.to_dict()},
            "params": params_to_dict(self.spec, self.params),
            "nu_hat": self.nu_hat,
            "loglik": self.loglik,
            "criteria": dict(self.criteria._asdict()),
            "converged": self.converged,
            "iterations": self.iterations,
            "std_errors": se,
        }


# ---------------------------------------------------------------------------
# unconstrained transform
# ---------------------------------------------------------------------------


def _logistic(u, lo, hi):
    return lo + (hi - lo) / (1.0 + math.exp(-u))


def _logit(x, lo, hi):
    t = (x - lo) / (hi - lo)
    return math.log(t / (1.0 - t))


def _param_names(spec: GarchSpec, fit_nu: bool):
    names = ["mean", "omega"]
    names += [f"alpha[{j + 1}]" for j in range(spec.q)]
    names += [f"beta[{k + 1}]" for k in range(spec.p)]
    if spec.family == "gjr":
        names.append("gamma")
    elif spec.family == "ngarch":
        names.append("rho")
    elif spec.family == "ngarch-abs":
        names.append("delta")
    elif spec.family == "egarch":
        names.append("gamma")
    if fit_nu:
        names.append("nu")
    return names


def _encode(spec: GarchSpec, params: GarchParams, nu: Optional[float]):
    fam = spec.family
    if fam == "egarch":
        x = [params.mean, params.omega, params.alpha[0],
             _logit(params.beta[0], _BETA_LO, _BETA_HI), params.gamma]
    else:
        x = [params.mean, math.log(params.omega)]
        x += [math.log(max(a, 1e-12)) for a in params.alpha]
        x += [math.log(max(b, 1e-12)) for b in params.beta]
        if fam == "gjr":
            x.append(math.log(max(params.alpha[0] + params.gamma, 1e-12)))
        elif fam == "ngarch":
            x.append(params.rho)
        elif fam == "ngarch-abs":
            x.append(math.log(params.aug.delta))
    if nu is not None:
        x.append(_logit(nu, _NU_LO, _NU_HI))
    return np.asarray(x, dtype=float)


def _decode(spec: GarchSpec, x, sigma1_sq: float, fit_nu: bool, aug=None):
    fam = spec.family
    nu = _logistic(x[-1], _NU_LO, _NU_HI) if fit_nu else None
    if fam == "egarch":
        params = GarchParams(
            mean=x[0], omega=x[1], alpha=(x[2],),
            beta=(_logistic(x[3], _BETA_LO, _BETA_HI),), gamma=x[4],
            sigma1_sq=sigma1_sq)
        return params, nu
    mean = x[0]
    omega = math.exp(x[1])
    alpha = tuple(math.exp(v) for v in x[2:2 + spec.q])
    beta = tuple(math.exp(v) for v in x[2 + spec.q:2 + spec.q + spec.p])
    j = 2 + spec.q + spec.p
    gamma, rho = 0.0, 0.0
    if fam == "gjr":
        gamma = math.exp(x[j]) - alpha[0]
    elif fam == "ngarch":
        rho = x[j]
    elif fam == "ngarch-abs":
        aug = replace(aug or AugParams(), delta=math.exp(x[j]))
    params = GarchParams(mean=mean, omega=omega, alpha=alpha, beta=beta,
                         gamma=gamma, rho=rho, aug=aug, sigma1_sq=sigma1_sq)
    return params, nu


def _persistence(spec: GarchSpec, params: GarchParams) -> float:
    fam = spec.family
    if fam == "garch":
        return sum(params.alpha) + sum(params.beta)
    if fam == "gjr":
        return params.alpha[0] + params.beta[0] + params.gamma / 2.0
    if fam == "ngarch":
        return params.alpha[0] * (1.0 + params.rho ** 2) + params.beta[0]
    if fam == "ngarch-abs":
        return params.beta[0]
    return 0.0  # egarch persistence is box-bounded by the transform


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def _rescale_params(spec: GarchSpec, params: GarchParams, s: float) -> GarchParams:
    """Map parameters fitted on returns/s back to the original scale.

    The likelihood is exactly invariant under this map (up to -n ln s), so
    fitting on standardized data and rescaling loses nothing.  The shock
    coefficients are dimensionless for every family except the egarch
    intercept (affine in ln s^2) and the ngarch-abs shock weight (variance
    units).
    """
    fam = spec.family
    s2 = s * s
    omega = params.omega
    alpha = params.alpha
    if fam == "egarch":
        omega = params.omega + (1.0 - params.beta[0]) * math.log(s2)
    else:
        omega = s2 * params.omega
    if fam == "ngarch-abs":
        alpha = tuple(s2 * a for a in params.alpha)
    return GarchParams(omega=omega, alpha=alpha, beta=params.beta,
                       gamma=params.gamma, rho=params.rho, aug=params.aug,
                       mean=s * params.mean, sigma1_sq=s2 * params.sigma1_sq)


def fit(spec: GarchSpec, returns, options: Optional[FitOptions] = None) -> FitResult:
    """Maximize the innovation log-likelihood; the GED shape is estimated
    jointly when ``spec.innovation`` is GED.

    The search runs on internally standardized returns (exact likelihood
    invariance; keeps the optimizer and its convergence certificate
    well-conditioned for any data scale) and the estimates are mapped back.
    Deterministic given (data, init, tolerances).  On hitting the iteration
    cap the best point found is returned with ``converged=False``.
    """
    opts = options or FitOptions()
    x_orig = np.ascontiguousarray(returns, dtype=float)
    if x_orig.ndim != 1:
        raise DomainError("returns must be one-dimensional")
    if x_orig.shape[0] < opts.min_obs:
        raise InsufficientData(
            f"need at least {opts.min_obs} observations, got {x_orig.shape[0]}")
    if float(np.var(x_orig)) <= 0.0:
        raise DegenerateData("returns have zero variance")

    fam = spec.family
    if fam == "augmented":
        raise DomainError("fitting is not supported for the augmented family "
                          "(filtering and simulation only)")
    fit_nu = isinstance(spec.innovation, Ged)

    scale = math.sqrt(float(np.var(x_orig)))
    x_data = x_orig / scale
    var = 1.0  # variance of the standardized series, by construction

    if opts.init is not None:
        init = _rescale_params(spec, opts.init, 1.0 / scale)
    else:
        mean0 = float(np.mean(x_data))
        if fam == "egarch":
            init = GarchParams(mean=mean0, omega=0.0, alpha=(0.1,),
                               beta=(0.9,), gamma=0.0, sigma1_sq=var)
        elif fam == "ngarch-abs":
            init = GarchParams(mean=mean0, omega=0.05 * var, alpha=(0.05,),
                               beta=(0.85,), aug=AugParams(), sigma1_sq=var)
        else:
            init = GarchParams(mean=mean0, omega=0.05 * var,
                               alpha=tuple([0.05 / spec.q] * spec.q),
                               beta=tuple([0.85 / spec.p] * spec.p),
                               sigma1_sq=var)
    sigma1_sq = init.sigma1_sq
    nu0 = spec.innovation.nu if fit_nu and opts.init is None else opts.init_nu
    if fit_nu and not (_NU_LO < nu0 < _NU_HI):
        nu0 = 1.5
    x0 = _encode(spec, init, nu0 if fit_nu else None)

    trace = []
    best = {"f": math.inf}

    def objective(xv):
        try:
            params, nu = _decode(spec, xv, sigma1_sq, fit_nu, aug=init.aug)
            spec_eval = spec if not fit_nu else replace(spec, innovation=Ged(nu))
            ll = filter_volatility(spec_eval, params, x_data).loglik
        except (DomainError, NonPositiveVariance, OverflowError,
                FloatingPointError, ValueError):
            return 1e12
        if not math.isfinite(ll):
            return 1e12
        pen = 0.0
        over = _persistence(spec, params) - _PERSISTENCE_CAP
        if over > 0:
            pen = _PENALTY_SCALE * over * over
        f = -ll + pen
        if f < best["f"]:
            best["f"] = f
            trace.append(-f)
        return f

    total_iters = 0
    xc = x0
    fc = objective(x0)
    success = False
    for _ in range(opts.restarts + 1):
        res = optimize.minimize(
            objective, xc, method="Nelder-Mead",
            options={"xatol": opts.tol, "fatol": opts.ftol,
                     "maxiter": opts.max_iter, "maxfev": opts.max_iter,
                     "adaptive": True})
        total_iters += res.nit
        improved = fc - res.fun
        xc, fc = res.x, res.fun
        success = bool(res.success)
        if improved < max(opts.ftol, 1e-9 * abs(fc)):
            break
    if opts.polish:
        res = optimize.minimize(objective, xc, method="BFGS",
                                options={"maxiter": 200, "gtol": 1e-8})
        total_iters += int(res.nit)
        if res.fun < fc:
            xc, fc = res.x, res.fun

    grad = _central_gradient(objective, xc)
    grad_ok = bool(np.max(np.abs(grad)) < opts.grad_tol)

    params_std, nu_hat = _decode(spec, xc, sigma1_sq, fit_nu, aug=init.aug)
    params_hat = _rescale_params(spec, params_std, scale)
    spec_hat = spec if not fit_nu else replace(spec, innovation=Ged(nu_hat))
    ll_hat = filter_volatility(spec_hat, params_hat, x_orig).loglik

    names = _param_names(spec, fit_nu)
    theta = _original_vector(spec, params_hat, nu_hat, fit_nu)
    ses = _hessian_std_errors(spec, params_hat, nu_hat, fit_nu, x_orig,
                              theta, opts.hessian_step)
    std_errors = dict(zip(names, ses))

    criteria = information_criteria(ll_hat, n_params=len(names),
                                    n_obs=x_orig.shape[0])
    return FitResult(
        spec=spec_hat, params=params_hat, nu_hat=nu_hat, loglik=ll_hat,
        criteria=criteria, converged=success and grad_ok,
        iterations=total_iters, std_errors=std_errors, trace=tuple(trace))


def _central_gradient(f, x, rel_step=1e-5):
    # forward differences drown in roundoff when |f| is large; central
    # differences with a coarser step keep the certificate meaningful
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        h = rel_step * (1.0 + abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


# ---------------------------------------------------------------------------
# standard errors (central-difference Hessian in original coordinates)
# ---------------------------------------------------------------------------


def _original_vector(spec, params, nu, fit_nu):
    theta = [params.mean, params.omega, *params.alpha, *params.beta]
    fam = spec.family
    if fam in ("gjr", "egarch"):
        theta.append(params.gamma)
    elif fam == "ngarch":
        theta.append(params.rho)
    elif fam == "ngarch-abs":
        theta.append(params.aug.delta)
    if fit_nu:
        theta.append(nu)
    return np.asarray(theta, dtype=float)


def _params_from_original(spec, theta, template: GarchParams, fit_nu):
    q, p = spec.q, spec.p
    mean, omega = theta[0], theta[1]
    alpha = tuple(theta[2:2 + q])
    beta = tuple(theta[2 + q:2 + q + p])
    j = 2 + q + p
    gamma, rho, aug = 0.0, 0.0, template.aug
    fam = spec.family
    if fam in ("gjr", "egarch"):
        gamma = theta[j]
    elif fam == "ngarch":
        rho = theta[j]
    elif fam == "ngarch-abs":
        aug = replace(aug, delta=theta[j])
    nu = theta[-1] if fit_nu else None
    params = GarchParams(mean=mean, omega=omega, alpha=alpha, beta=beta,
                         gamma=gamma, rho=rho, aug=aug,
                         sigma1_sq=template.sigma1_sq)
    return params, nu


def _hessian_std_errors(spec, params, nu, fit_nu, x_data, theta, rel_step):
    """Central-difference Hessian of the log-likelihood; NaN standard errors
    when the negative Hessian is not positive definite."""
    m = theta.shape[0]

    def ll_at(th):
        try:
            pp, nn = _params_from_original(spec, th, params, fit_nu)
            spec_eval = spec if not fit_nu else replace(spec, innovation=Ged(nn))
            return filter_volatility(spec_eval, pp, x_data).loglik
        except Exception:
            return math.nan

    h = rel_step * (1.0 + np.abs(theta))
    hess = np.empty((m, m))
    f0 = ll_at(theta)
    for i in range(m):
        for j in range(i, m):
            ei = np.zeros(m)
            ej = np.zeros(m)
            ei[i] = h[i]
            ej[j] = h[j]
            if i == j:
                val = (ll_at(theta + ei) - 2.0 * f0 + ll_at(theta - ei)) / (h[i] * h[i])
            else:
                val = (ll_at(theta + ei + ej) - ll_at(theta + ei - ej)
                       - ll_at(theta - ei + ej) + ll_at(theta - ei - ej)) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    nan_row = [math.nan] * m
    if not np.all(np.isfinite(hess)):
        return nan_row
    neg_h = -hess
    try:
        eigs = np.linalg.eigvalsh(neg_h)
        if np.min(eigs) <= 0:
            return nan_row
        cov = np.linalg.inv(neg_h)
    except np.linalg.LinAlgError:
        return nan_row
    diag = np.diag(cov)
    if np.any(diag <= 0):
        return nan_row
    return list(np.sqrt(diag))
