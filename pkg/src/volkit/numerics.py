"""Shared numerical kernels.

Gauss-Kronrod quadrature (fixed G7-K15 base rule with adaptive interval
bisection), a gamma-function suite (Lanczos log-gamma plus the regularized
incomplete functions and their inverse), 3x3 matrix inversion with a
singularity floor, and deterministic RNG streams.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .errors import DomainError, NonConvergence, NonFiniteEvaluation, SingularMatrix

__all__ = [
    "QuadratureRule",
    "integrate_gk",
    "GK15_NODES",
    "GK15_WEIGHTS",
    "G7_WEIGHTS",
    "gamma_fn",
    "lgamma_fn",
    "lower_incomplete_gamma",
    "upper_incomplete_gamma",
    "regularized_upper_gamma",
    "regularized_lower_gamma",
    "regularized_upper_gamma_inv",
    "special_gamma_suite",
    "GammaSuite",
    "invert3",
    "rng_stream",
]

# G7-K15 nodes on [-1, 1] and the matching weights; odd-indexed interior
# nodes plus the centre form the embedded Gauss rule.
GK15_NODES = _kernels._XGK15
GK15_WEIGHTS = _kernels._WGK15
G7_WEIGHTS = _kernels._WG7


@dataclass(frozen=True)
class QuadratureRule:
    """Adaptive Gauss-Kronrod configuration.

    ``node_count`` is the Gauss order g of the embedded rule (Kronrod order
    2g+1).  Only the conventional g=7 rule is shipped; other orders raise.
    """

    node_count: int = 7
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.node_count != 7:
            raise DomainError("only the G7-K15 rule is supported")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


DEFAULT_RULE = QuadratureRule()


def _panel(f: Callable[[float], float], a: float, b: float):
    """Single K15 panel: returns (kronrod_value, err_estimate)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fc = f(c)
    if not np.isfinite(fc):
        raise NonFiniteEvaluation(f"integrand non-finite at x={c!r}")
    resk = GK15_WEIGHTS[7] * fc
    resg = G7_WEIGHTS[3] * fc
    for j in range(7):
        dx = h * GK15_NODES[j]
        f1 = f(c - dx)
        f2 = f(c + dx)
        if not (np.isfinite(f1) and np.isfinite(f2)):
            raise NonFiniteEvaluation(f"integrand non-finite near x={c - dx!r}")
        resk += GK15_WEIGHTS[j] * (f1 + f2)
        if j % 2 == 1:
            resg += G7_WEIGHTS[(j - 1) // 2] * (f1 + f2)
    return resk * h, abs(resk - resg) * h


def integrate_gk(f: Callable[[float], float], a: float, b: float,
                 rule: QuadratureRule = DEFAULT_RULE):
    """Integrate ``f`` over [a, b] adaptively with the G7-K15 rule.

    Returns ``(value, err_estimate)``.  Subdivision always splits the
    segment carrying the largest error estimate.  Raises
    :class:`NonConvergence` when the error is still above tolerance at the
    subdivision cap and :class:`NonFiniteEvaluation` when the integrand
    returns NaN or infinity at an evaluation node.
    """
    if a > b:
        raise DomainError(f"requires a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0, 0.0
    val, err = _panel(f, a, b)
    segments = [(err, a, b, val)]
    for _ in range(rule.max_subdivisions):
        total = sum(s[3] for s in segments)
        total_err = sum(s[0] for s in segments)
        if total_err <= max(rule.abs_tol, rule.rel_tol * abs(total)):
            return total, total_err
        worst = max(range(len(segments)), key=lambda i: segments[i][0])
        _, lo, hi, _ = segments.pop(worst)
        mid = 0.5 * (lo + hi)
        v1, e1 = _panel(f, lo, mid)
        v2, e2 = _panel(f, mid, hi)
        segments.append((e1, lo, mid, v1))
        segments.append((e2, mid, hi, v2))
    total = sum(s[3] for s in segments)
    total_err = sum(s[0] for s in segments)
    if total_err <= max(rule.abs_tol, rule.rel_tol * abs(total)):
        return total, total_err
    raise NonConvergence(
        f"err={total_err:.3e} above tolerance after {rule.max_subdivisions} subdivisions")


# ---------------------------------------------------------------------------
# gamma suite
# ---------------------------------------------------------------------------


def gamma_fn(a: float) -> float:
    """Gamma(a) for a > 0 (Lanczos)."""
    if a <= 0:
        raise DomainError(f"gamma requires a > 0, got {a}")
    return _kernels.gamma_fn(float(a))


def lgamma_fn(a: float) -> float:
    if a <= 0:
        raise DomainError(f"lgamma requires a > 0, got {a}")
    return _kernels.lgamma_fn(float(a))


def _check_ax(a, x):
    if a <= 0:
        raise DomainError(f"requires a > 0, got a={a}")
    if x < 0:
        raise DomainError(f"requires x >= 0, got x={x}")


def regularized_lower_gamma(a: float, x: float) -> float:
    """P(a, x) = gamma(a, x) / Gamma(a)."""
    _check_ax(a, x)
    p = _kernels.gammainc_p(float(a), float(x))
    if np.isnan(p):
        raise NonConvergence(f"incomplete gamma did not converge at a={a}, x={x}")
    return p


def regularized_upper_gamma(a: float, x: float) -> float:
    """Q(a, x) = Gamma(a, x) / Gamma(a)."""
    _check_ax(a, x)
    q = _kernels.gammainc_q(float(a), float(x))
    if np.isnan(q):
        raise NonConvergence(f"incomplete gamma did not converge at a={a}, x={x}")
    return q


def lower_incomplete_gamma(a: float, x: float) -> float:
    return regularized_lower_gamma(a, x) * gamma_fn(a)


def upper_incomplete_gamma(a: float, x: float) -> float:
    return regularized_upper_gamma(a, x) * gamma_fn(a)


def regularized_upper_gamma_inv(a: float, y: float) -> float:
    """Solve Q(a, x) = y for x, with y in [0, 1]."""
    if a <= 0:
        raise DomainError(f"requires a > 0, got a={a}")
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"requires y in [0, 1], got {y}")
    return _kernels.gammainc_q_inv(float(a), float(y))


@dataclass(frozen=True)
class GammaSuite:
    gamma: float
    lower_incomplete: float
    upper_incomplete: float
    regularized_upper: float
    regularized_upper_inverse: Callable[[float], float]


def special_gamma_suite(a: float, x: float) -> GammaSuite:
    """Bundle of gamma-family values at (a, x) plus the Q^{-1}(a, .) solver."""
    _check_ax(a, x)
    g = gamma_fn(a)
    q = regularized_upper_gamma(a, x)
    return GammaSuite(
        gamma=g,
        lower_incomplete=(1.0 - q) * g,
        upper_incomplete=q * g,
        regularized_upper=q,
        regularized_upper_inverse=lambda y, _a=a: regularized_upper_gamma_inv(_a, y),
    )


# ---------------------------------------------------------------------------
# small-matrix algebra
# ---------------------------------------------------------------------------

SINGULARITY_FLOOR = 1e-13


def invert3(m: np.ndarray, floor: float = SINGULARITY_FLOOR) -> np.ndarray:
    """Invert a 3x3 matrix by cofactors.

    Raises :class:`SingularMatrix` (carrying the determinant) when |det|
    falls below ``floor``; for the goodness-of-fit C(s) matrices this is the
    s -> 1 degeneracy.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise DomainError(f"expected a 3x3 matrix, got shape {m.shape}")
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    if abs(det) < floor:
        raise SingularMatrix(det)
    adj = np.array([
        [e * i - f * h, c * h - b * i, b * f - c * e],
        [f * g - d * i, a * i - c * g, c * d - a * f],
        [d * h - e * g, b * g - a * h, a * e - b * d],
    ])
    return adj / det


# ---------------------------------------------------------------------------
# deterministic RNG streams
# ---------------------------------------------------------------------------


def rng_stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Deterministic generator for (seed, stream_id).

    Identical arguments yield bit-identical sequences; distinct stream ids
    yield statistically independent streams.  Streams are cheap to create,
    so consumers should derive one per task (e.g. per bootstrap replicate).
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.PCG64(ss))
