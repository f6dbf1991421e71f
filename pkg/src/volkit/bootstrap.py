"""Parametric-bootstrap p-values for the GED-innovation EDF tests.

Each replicate simulates a series of the observed length from the fitted
model, optionally refits, and recomputes the KS/CvM statistics; p-values use
the (count + 1) / (N + 1) finite-sample convention.  Replicate r draws from
``rng_stream(seed, r)``, so results do not depend on worker scheduling.
"""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BootstrapAborted, DomainError
from .estimation import FitOptions, FitResult, fit
from .garch import filter_volatility, simulate
from .gof import edf_ks_cvm, test_ged_innovations_edf, GofReport
from .numerics import rng_stream

__all__ = ["BootstrapConfig", "BootstrapResult", "bootstrap_pvalue", "export_null_csv"]

_FAILURE_TOLERANCE = 0.05


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    seed: int = 0
    refit: bool = True
    parallelism: int = 1
    fit_options: Optional[FitOptions] = None

    def __post_init__(self):
        if self.replicates < 99:
            raise DomainError("bootstrap needs at least 99 replicates")
        if self.parallelism < 1:
            raise DomainError("parallelism must be >= 1")


@dataclass(frozen=True)
class BootstrapResult:
    ks_pvalue: float
    cvm_pvalue: float
    ks_null: np.ndarray
    cvm_null: np.ndarray
    replicate_indices: np.ndarray
    n_failed: int

    def critical_values(self, levels=(0.90, 0.95, 0.99)):
        """(level, ks, cvm) rows from the simulated null distribution."""
        return tuple(
            (lv, float(np.quantile(self.ks_null, lv)), float(np.quantile(self.cvm_null, lv)))
            for lv in levels
        )


def _replicate_stats(fit_result: FitResult, n_obs: int, seed: int, index: int,
                     refit: bool, fit_options):
    rng = rng_stream(seed, index)
    sim = simulate(fit_result.spec, fit_result.params, n_obs, rng)
    if refit:
        fr = fit(fit_result.spec, sim.returns, options=fit_options)
    else:
        fr = fit_result
    innovation = fr.spec.innovation
    out = filter_volatility(fr.spec, fr.params, sim.returns)
    u = np.sort(np.clip(innovation.cdf(out.residuals), 1e-12, 1 - 1e-12))
    return edf_ks_cvm(u)


def _worker(args):
    fit_result, n_obs, seed, indices, refit, fit_options = args
    out = []
    for idx in indices:
        try:
            ks, cvm = _replicate_stats(fit_result, n_obs, seed, idx, refit, fit_options)
            out.append((idx, ks, cvm, False))
        except Exception:
            out.append((idx, np.nan, np.nan, True))
    return out


def bootstrap_pvalue(fit_result: FitResult, returns, cfg: BootstrapConfig,
                     observed: Optional[GofReport] = None) -> BootstrapResult:
    """Bootstrap p-values for the EDF KS/CvM statistics of ``fit_result``.

    ``observed`` may carry precomputed statistics; otherwise they are
    computed from (fit_result, returns).  Failed replicates are dropped as
    long as they stay under 5 percent of N; beyond that the run aborts.
    """
    if not fit_result.converged:
        raise DomainError("bootstrap requires a converged fit")
    x = np.ascontiguousarray(returns, dtype=float)
    if observed is None:
        observed = test_ged_innovations_edf(fit_result.spec, x, fit_result)
    ks_obs, cvm_obs = observed.ks, observed.cvm

    indices = list(range(cfg.replicates))
    if cfg.parallelism == 1:
        rows = _worker((fit_result, x.shape[0], cfg.seed, indices, cfg.refit,
                        cfg.fit_options))
    else:
        chunks = np.array_split(indices, cfg.parallelism * 4)
        args = [(fit_result, x.shape[0], cfg.seed, list(chunk), cfg.refit,
                 cfg.fit_options) for chunk in chunks if len(chunk)]
        rows = []
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            for part in pool.map(_worker, args):
                rows.extend(part)
    rows.sort(key=lambda r: r[0])

    kept = [(i, ks, cvm) for (i, ks, cvm, bad) in rows if not bad]
    n_failed = cfg.replicates - len(kept)
    if n_failed > _FAILURE_TOLERANCE * cfg.replicates:
        raise BootstrapAborted(
            f"{n_failed} of {cfg.replicates} replicates failed "
            f"(tolerance {_FAILURE_TOLERANCE:.0%})")
    idx = np.array([r[0] for r in kept], dtype=int)
    ks_null = np.array([r[1] for r in kept])
    cvm_null = np.array([r[2] for r in kept])
    n_used = len(kept)
    ks_p = (float(np.sum(ks_null >= ks_obs)) + 1.0) / (n_used + 1.0)
    cvm_p = (float(np.sum(cvm_null >= cvm_obs)) + 1.0) / (n_used + 1.0)
    return BootstrapResult(ks_pvalue=ks_p, cvm_pvalue=cvm_p, ks_null=ks_null,
                           cvm_null=cvm_null, replicate_indices=idx,
                           n_failed=n_failed)


def export_null_csv(result: BootstrapResult, path: str):
    """Write (replicate, ks, cvm) rows for diagnostic plotting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replicate", "ks", "cvm"])
        for i, ks, cvm in zip(result.replicate_indices, result.ks_null,
                              result.cvm_null):
            writer.writerow([int(i), repr(float(ks)), repr(float(cvm))])
