"""Scalar special-function and recursion kernels.

Everything here is written in numba-compatible Python and compiled with
``@njit`` unless the fallback path is active (see :mod:`volkit._accel`).
The same source runs on both paths, so numerical results do not depend on
whether numba is available.
"""

import math

import numpy as np

from ._accel import njit

SQRT_2PI = 2.5066282746310002
LN_SQRT_2PI = 0.9189385332046727


# ---------------------------------------------------------------------------
# standard normal pdf / cdf / quantile
# ---------------------------------------------------------------------------


@njit(cache=True)
def norm_pdf(z):
    return math.exp(-0.5 * z * z) / SQRT_2PI


@njit(cache=True)
def norm_cdf(z):
    return 0.5 * math.erfc(-z * 0.7071067811865476)


@njit(cache=True)
def norm_ppf(p):
    """Inverse standard normal cdf (Wichura's PPND16 rational approximation)."""
    if p <= 0.0:
        return -math.inf
    if p >= 1.0:
        return math.inf
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    x = num / den
    if q < 0.0:
        return -x
    return x


# ---------------------------------------------------------------------------
# gamma function family (Lanczos g=7, 9 terms; series / continued fraction
# split for the incomplete functions at x = a + 1)
# ---------------------------------------------------------------------------

_LANCZOS_G = 7.0


@njit(cache=True)
def lgamma_fn(z):
    """ln Gamma(z) for z > 0 via the Lanczos approximation."""
    if z < 0.5:
        # reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return math.log(math.pi / math.sin(math.pi * z)) - lgamma_fn(1.0 - z)
    z = z - 1.0
    x = 0.99999999999980993
    x += 676.5203681218851 / (z + 1.0)
    x += -1259.1392167224028 / (z + 2.0)
    x += 771.32342877765313 / (z + 3.0)
    x += -176.61502916214059 / (z + 4.0)
    x += 12.507343278686905 / (z + 5.0)
    x += -0.13857109526572012 / (z + 6.0)
    x += 9.9843695780195716e-6 / (z + 7.0)
    x += 1.5056327351493116e-7 / (z + 8.0)
    t = z + _LANCZOS_G + 0.5
    return LN_SQRT_2PI + (z + 0.5) * math.log(t) - t + math.log(x)


@njit(cache=True)
def gamma_fn(z):
    return math.exp(lgamma_fn(z))


@njit(cache=True)
def _gser_p(a, x):
    """Regularized lower incomplete gamma P(a, x) by power series (x < a+1)."""
    if x <= 0.0:
        return 0.0
    ap = a
    total = 1.0 / a
    term = total
    for _ in range(500):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            return total * math.exp(-x + a * math.log(x) - lgamma_fn(a))
    return math.nan


@njit(cache=True)
def _gcf_q(a, x):
    """Regularized upper incomplete gamma Q(a, x) by continued fraction (x >= a+1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-x + a * math.log(x) - lgamma_fn(a))
    return math.nan


@njit(cache=True)
def gammainc_p(a, x):
    """Regularized lower incomplete gamma P(a, x), a > 0, x >= 0."""
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return _gser_p(a, x)
    return 1.0 - _gcf_q(a, x)


@njit(cache=True)
def gammainc_q(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gser_p(a, x)
    return _gcf_q(a, x)


@njit(cache=True)
def gammainc_q_inv(a, y):
    """Solve Q(a, x) = y for x, y in (0, 1), by safeguarded Newton iteration."""
    if y <= 0.0:
        return math.inf
    if y >= 1.0:
        return 0.0
    # Wilson-Hilferty starting point for the equivalent chi-square quantile
    z = -norm_ppf(y)
    t = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * math.sqrt(a))
    x = a * t * t * t
    if x <= 0.0 or not math.isfinite(x):
        x = a
    lo = 0.0
    hi = math.inf
    lga = lgamma_fn(a)
    for _ in range(200):
        q = gammainc_q(a, x)
        if q > y:
            lo = x
        else:
            hi = x
        # dQ/dx = -x^(a-1) e^(-x) / Gamma(a)
        logpdf = (a - 1.0) * math.log(x) - x - lga
        step = (q - y) * math.exp(-logpdf) if logpdf > -700.0 else math.inf
        x_new = x - step
        if not (lo < x_new < hi) or not math.isfinite(x_new):
            x_new = 0.5 * (lo + (hi if math.isfinite(hi) else 2.0 * x + 1.0))
        if abs(x_new - x) <= 1e-15 * (abs(x) + 1e-300):
            return x_new
        x = x_new
    return x


# ---------------------------------------------------------------------------
# GED helpers
# ---------------------------------------------------------------------------


@njit(cache=True)
def norm_cdf_array(x):
    n = x.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = norm_cdf(x[i])
    return out


@njit(cache=True)
def ged_cdf_array(x, nu, lam):
    """cdf of the unit-variance GED evaluated elementwise."""
    n = x.shape[0]
    out = np.empty(n)
    inv_nu = 1.0 / nu
    for i in range(n):
        u = 0.5 * (abs(x[i]) / lam) ** nu
        p = gammainc_p(inv_nu, u)
        if x[i] <= 0.0:
            out[i] = 0.5 - 0.5 * p
        else:
            out[i] = 0.5 + 0.5 * p
    return out


# ---------------------------------------------------------------------------
# GARCH-family variance recursions (filtering and simulation)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _safe_exp(t):
    # keeps the pure-Python path from raising OverflowError where the
    # compiled path would return inf
    if t > 709.0:
        return math.inf
    return math.exp(t)


@njit(cache=True)
def _safe_pow(base, expo):
    """base ** expo for base >= 0 without OverflowError on the Python path."""
    if base <= 0.0:
        return 0.0 if expo > 0.0 else math.inf
    if not math.isfinite(base):
        return math.inf
    return _safe_exp(expo * math.log(base))


@njit(cache=True)
def garch_pq_filter(x, mean, omega, alpha, beta, sigma1_sq):
    n = x.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    r = max(p, q)
    s = np.empty(n)
    for i in range(min(r, n)):
        s[i] = sigma1_sq
    for i in range(r, n):
        acc = omega
        for j in range(q):
            d = x[i - 1 - j] - mean
            acc += alpha[j] * d * d
        for k in range(p):
            acc += beta[k] * s[i - 1 - k]
        s[i] = acc
    return s


@njit(cache=True)
def garch_pq_simulate(eps, mean, omega, alpha, beta, sigma1_sq):
    n = eps.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    r = max(p, q)
    s = np.empty(n)
    x = np.empty(n)
    for i in range(min(r, n)):
        s[i] = sigma1_sq
        x[i] = mean + math.sqrt(s[i]) * eps[i]
    for i in range(r, n):
        acc = omega
        for j in range(q):
            d = x[i - 1 - j] - mean
            acc += alpha[j] * d * d
        for k in range(p):
            acc += beta[k] * s[i - 1 - k]
        s[i] = acc
        x[i] = mean + math.sqrt(acc) * eps[i]
    return x, s


@njit(cache=True)
def gjr_filter(x, mean, omega, alpha, beta, gamma, sigma1_sq):
    n = x.shape[0]
    s = np.empty(n)
    s[0] = sigma1_sq
    for i in range(1, n):
        e = (x[i - 1] - mean) / math.sqrt(s[i - 1])
        neg = -e if e < 0.0 else 0.0
        s[i] = omega + s[i - 1] * (alpha * e * e + beta + gamma * neg * neg)
    return s


@njit(cache=True)
def gjr_simulate(eps, mean, omega, alpha, beta, gamma, sigma1_sq):
    n = eps.shape[0]
    s = np.empty(n)
    x = np.empty(n)
    s[0] = sigma1_sq
    x[0] = mean + math.sqrt(s[0]) * eps[0]
    for i in range(1, n):
        e = eps[i - 1]
        neg = -e if e < 0.0 else 0.0
        s[i] = omega + s[i - 1] * (alpha * e * e + beta + gamma * neg * neg)
        x[i] = mean + math.sqrt(s[i]) * eps[i]
    return x, s


@njit(cache=True)
def ngarch_filter(x, mean, omega, alpha, beta, rho, sigma1_sq):
    n = x.shape[0]
    s = np.empty(n)
    s[0] = sigma1_sq
    for i in range(1, n):
        e = (x[i - 1] - mean) / math.sqrt(s[i - 1])
        d = e - rho
        s[i] = omega + alpha * d * d * s[i - 1] + beta * s[i - 1]
    return s


@njit(cache=True)
def ngarch_simulate(eps, mean, omega, alpha, beta, rho, sigma1_sq):
    n = eps.shape[0]
    s = np.empty(n)
    x = np.empty(n)
    s[0] = sigma1_sq
    x[0] = mean + math.sqrt(s[0]) * eps[0]
    for i in range(1, n):
        d = eps[i - 1] - rho
        s[i] = omega + alpha * d * d * s[i - 1] + beta * s[i - 1]
        x[i] = mean + math.sqrt(s[i]) * eps[i]
    return x, s


@njit(cache=True)
def ngarch_abs_filter(x, mean, omega, alpha, beta, delta, sigma1_sq):
    n = x.shape[0]
    s = np.empty(n)
    s[0] = sigma1_sq
    for i in range(1, n):
        e = (x[i - 1] - mean) / math.sqrt(s[i - 1])
        s[i] = omega + alpha * _safe_pow(abs(e), delta) + beta * s[i - 1]
    return s


@njit(cache=True)
def ngarch_abs_simulate(eps, mean, omega, alpha, beta, delta, sigma1_sq):
    n = eps.shape[0]
    s = np.empty(n)
    x = np.empty(n)
    s[0] = sigma1_sq
    x[0] = mean + math.sqrt(s[0]) * eps[0]
    for i in range(1, n):
        s[i] = omega + alpha * _safe_pow(abs(eps[i - 1]), delta) + beta * s[i - 1]
        x[i] = mean + math.sqrt(s[i]) * eps[i]
    return x, s


@njit(cache=True)
def egarch_filter(x, mean, omega, alpha, beta, gamma, e_abs_mean, sigma1_sq):
    n = x.shape[0]
    s = np.empty(n)
    s[0] = sigma1_sq
    ln_s = math.log(sigma1_sq)
    for i in range(1, n):
        e = (x[i - 1] - mean) / math.sqrt(s[i - 1])
        ln_s = omega + alpha * (abs(e) - e_abs_mean) + gamma * e + beta * ln_s
        s[i] = _safe_exp(ln_s)
    return s


@njit(cache=True)
def egarch_simulate(eps, mean, omega, alpha, beta, gamma, e_abs_mean, sigma1_sq):
    n = eps.shape[0]
    s = np.empty(n)
    x = np.empty(n)
    s[0] = sigma1_sq
    x[0] = mean + math.sqrt(s[0]) * eps[0]
    ln_s = math.log(sigma1_sq)
    for i in range(1, n):
        e = eps[i - 1]
        ln_s = omega + alpha * (abs(e) - e_abs_mean) + gamma * e + beta * ln_s
        s[i] = _safe_exp(ln_s)
        x[i] = mean + math.sqrt(s[i]) * eps[i]
    return x, s


@njit(cache=True)
def _box_cox(x, delta):
    if delta > 0.0:
        return (_safe_pow(x, delta) - 1.0) / delta
    return math.log(x)


@njit(cache=True)
def augmented_filter(x, mean, a0, a1, a2, a3, a4, a5, c, delta, lam, sigma1_sq):
    """Augmented-GARCH filter. Returns (sigma_sq, fail_index); fail_index >= 0
    marks the first step where the Box-Cox inverse left its domain."""
    n = x.shape[0]
    s = np.empty(n)
    s[0] = sigma1_sq
    phi = _box_cox(sigma1_sq, lam) + 1.0
    for i in range(1, n):
        e = (x[i - 1] - mean) / math.sqrt(s[i - 1])
        sup = c - e if c - e > 0.0 else 0.0
        ae = abs(e - c)
        xi1 = a1 + a2 * _safe_pow(ae, delta) + a3 * _safe_pow(sup, delta)
        if delta == 0.0 and (ae == 0.0 or sup == 0.0) and (a4 != 0.0 or a5 != 0.0):
            return s, i
        xi2 = a4 * _box_cox(ae, delta) + a5 * _box_cox(sup, delta) if (a4 != 0.0 or a5 != 0.0) else 0.0
        phi = a0 + phi * xi1 + xi2
        arg = phi - 1.0
        if lam > 0.0:
            base = arg * lam + 1.0
            if base <= 0.0:
                return s, i
            s[i] = _safe_pow(base, 1.0 / lam)
        else:
            s[i] = _safe_exp(arg)
        if not (s[i] > 0.0) or not math.isfinite(s[i]):
            return s, i
    return s, -1


@njit(cache=True)
def augmented_simulate(eps, mean, a0, a1, a2, a3, a4, a5, c, delta, lam, sigma1_sq):
    n = eps.shape[0]
    s = np.empty(n)
    x = np.empty(n)
    s[0] = sigma1_sq
    x[0] = mean + math.sqrt(s[0]) * eps[0]
    phi = _box_cox(sigma1_sq, lam) + 1.0
    for i in range(1, n):
        e = eps[i - 1]
        sup = c - e if c - e > 0.0 else 0.0
        ae = abs(e - c)
        xi1 = a1 + a2 * _safe_pow(ae, delta) + a3 * _safe_pow(sup, delta)
        if delta == 0.0 and (ae == 0.0 or sup == 0.0) and (a4 != 0.0 or a5 != 0.0):
            return x, s, i
        xi2 = a4 * _box_cox(ae, delta) + a5 * _box_cox(sup, delta) if (a4 != 0.0 or a5 != 0.0) else 0.0
        phi = a0 + phi * xi1 + xi2
        arg = phi - 1.0
        if lam > 0.0:
            base = arg * lam + 1.0
            if base <= 0.0:
                return x, s, i
            s[i] = _safe_pow(base, 1.0 / lam)
        else:
            s[i] = _safe_exp(arg)
        if not (s[i] > 0.0) or not math.isfinite(s[i]):
            return x, s, i
        x[i] = mean + math.sqrt(s[i]) * eps[i]
    return x, s, -1


# ---------------------------------------------------------------------------
# martingale-transform core
# ---------------------------------------------------------------------------
#
# The transformed process is
#     W_n(s) = V_n(s) - int_0^s gdot(t)' C(t)^{-1} q(t) dt,
# with V_n the uniform empirical process of the pseudo-observations,
# q(t) = n^{-1/2} sum_{v_i > t} gdot(v_i) - n^{1/2} int_t^1 gdot,
# and C(t) = int_t^1 gdot gdot'.  Both the tail integral and C(t) have
# closed forms; the outer integral is accumulated interval by interval
# between consecutive order statistics.
#
# Score variants (z = Phi^{-1}(t)):
#   0: (1, -z, z^2)       "printed" form
#   1: (1, -z, 1 - z^2)   mean/variance score with the -1 shift
# The transform itself is invariant between the two (they span the same
# function space); only the C(t) bookkeeping differs.

_XGK15 = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK15 = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG7 = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


@njit(cache=True)
def _score(t, variant):
    z = norm_ppf(t)
    if variant == 0:
        return 1.0, -z, z * z
    return 1.0, -z, 1.0 - z * z


@njit(cache=True)
def _tail_integral(t, variant):
    """Closed form of int_t^1 gdot(tau) dtau."""
    z = norm_ppf(t)
    x = norm_pdf(z)
    m0 = 1.0 - t
    if variant == 0:
        return m0, -x, z * x + m0
    return m0, -x, -z * x


@njit(cache=True)
def _cmat(t, variant):
    """Closed form of C(t) = int_t^1 gdot gdot' dtau (six unique entries)."""
    z = norm_ppf(t)
    x = norm_pdf(z)
    m0 = 1.0 - t
    m2 = z * x + m0
    if variant == 0:
        m3 = (z * z + 2.0) * x
        m4 = (z * z * z + 3.0 * z) * x + 3.0 * m0
        return m0, -x, m2, m2, -m3, m4
    c23 = (z * z + 1.0) * x
    c33 = 2.0 * m0 + z * (z * z + 1.0) * x
    return m0, -x, -z * x, m2, c23, c33


@njit(cache=True)
def _psi(t, s1, s2, s3, sqn, variant, det_floor):
    """Integrand gdot(t)' C(t)^{-1} q(t); returns (value, det)."""
    c11, c12, c13, c22, c23, c33 = _cmat(t, variant)
    det = (c11 * (c22 * c33 - c23 * c23)
           - c12 * (c12 * c33 - c23 * c13)
           + c13 * (c12 * c23 - c22 * c13))
    if abs(det) < det_floor:
        return 0.0, det
    g1, g2, g3 = _score(t, variant)
    t1, t2, t3 = _tail_integral(t, variant)
    q1 = s1 / sqn - sqn * t1
    q2 = s2 / sqn - sqn * t2
    q3 = s3 / sqn - sqn * t3
    # adjugate of the symmetric 3x3
    i11 = c22 * c33 - c23 * c23
    i12 = c13 * c23 - c12 * c33
    i13 = c12 * c23 - c13 * c22
    i22 = c11 * c33 - c13 * c13
    i23 = c12 * c13 - c11 * c23
    i33 = c11 * c22 - c12 * c12
    y1 = (i11 * q1 + i12 * q2 + i13 * q3) / det
    y2 = (i12 * q1 + i22 * q2 + i23 * q3) / det
    y3 = (i13 * q1 + i23 * q2 + i33 * q3) / det
    return g1 * y1 + g2 * y2 + g3 * y3, det


@njit(cache=True)
def _panel_k15(lo, hi, s1, s2, s3, sqn, variant, det_floor):
    """One Gauss-Kronrod 7-15 panel of psi over (lo, hi).

    Returns (value, err_estimate, min_abs_det, nonfinite_flag)."""
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    fc, det = _psi(c, s1, s2, s3, sqn, variant, det_floor)
    det_min = abs(det)
    resk = _WGK15[7] * fc
    resg = _WG7[3] * fc
    bad = not math.isfinite(fc)
    for j in range(7):
        dx = h * _XGK15[j]
        f1, d1 = _psi(c - dx, s1, s2, s3, sqn, variant, det_floor)
        f2, d2 = _psi(c + dx, s1, s2, s3, sqn, variant, det_floor)
        if abs(d1) < det_min:
            det_min = abs(d1)
        if abs(d2) < det_min:
            det_min = abs(d2)
        if not (math.isfinite(f1) and math.isfinite(f2)):
            bad = True
        resk += _WGK15[j] * (f1 + f2)
        if j == 1:
            resg += _WG7[0] * (f1 + f2)
        elif j == 3:
            resg += _WG7[1] * (f1 + f2)
        elif j == 5:
            resg += _WG7[2] * (f1 + f2)
    return resk * h, abs(resk - resg) * h, det_min, bad


STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_NO_CONVERGENCE = 2
STATUS_NON_FINITE = 3


@njit(cache=True)
def khmaladze_core(v, s_max, abs_tol, rel_tol, max_subdiv, method, variant,
                   t_floor, det_floor):
    """Evaluate W_n at each order statistic v_j <= s_max.

    method: 0 = adaptive Gauss-Kronrod, 1 = midpoint rule of the single
    interval, 2 = left-endpoint (frozen C^{-1} and tail) approximation.

    Returns (w, count, truncation_point, status).
    """
    n = v.shape[0]
    sqn = math.sqrt(float(n))
    # suffix sums of the score at the order statistics
    suf = np.zeros((n + 1, 3))
    for i in range(n - 1, -1, -1):
        g1, g2, g3 = _score(v[i], variant)
        suf[i, 0] = suf[i + 1, 0] + g1
        suf[i, 1] = suf[i + 1, 1] + g2
        suf[i, 2] = suf[i + 1, 2] + g3
    w = np.empty(n)
    total = 0.0
    count = 0
    status = STATUS_OK
    trunc = 0.0
    prev = t_floor
    stack_lo = np.empty(64)
    stack_hi = np.empty(64)
    for j in range(n):
        vj = v[j]
        if vj > s_max:
            break
        s1 = suf[j, 0]
        s2 = suf[j, 1]
        s3 = suf[j, 2]
        lo = prev
        hi = vj
        seg = 0.0
        if hi > lo:
            if method == 1:
                mid = 0.5 * (lo + hi)
                val, det = _psi(mid, s1, s2, s3, sqn, variant, det_floor)
                if abs(det) < det_floor:
                    status = STATUS_SINGULAR
                    break
                if not math.isfinite(val):
                    status = STATUS_NON_FINITE
                    break
                seg = (hi - lo) * val
            elif method == 2:
                c11, c12, c13, c22, c23, c33 = _cmat(lo, variant)
                det = (c11 * (c22 * c33 - c23 * c23)
                       - c12 * (c12 * c33 - c23 * c13)
                       + c13 * (c12 * c23 - c22 * c13))
                if abs(det) < det_floor:
                    status = STATUS_SINGULAR
                    break
                ta1, ta2, ta3 = _tail_integral(lo, variant)
                tb1, tb2, tb3 = _tail_integral(hi, variant)
                # int_lo^hi gdot dt = tail(lo) - tail(hi)
                r1 = ta1 - tb1
                r2 = ta2 - tb2
                r3 = ta3 - tb3
                q1 = s1 / sqn - sqn * ta1
                q2 = s2 / sqn - sqn * ta2
                q3 = s3 / sqn - sqn * ta3
                i11 = c22 * c33 - c23 * c23
                i12 = c13 * c23 - c12 * c33
                i13 = c12 * c23 - c13 * c22
                i22 = c11 * c33 - c13 * c13
                i23 = c12 * c13 - c11 * c23
                i33 = c11 * c22 - c12 * c12
                y1 = (i11 * q1 + i12 * q2 + i13 * q3) / det
                y2 = (i12 * q1 + i22 * q2 + i23 * q3) / det
                y3 = (i13 * q1 + i23 * q2 + i33 * q3) / det
                seg = r1 * y1 + r2 * y2 + r3 * y3
                if not math.isfinite(seg):
                    status = STATUS_NON_FINITE
                    break
            else:
                # adaptive Gauss-Kronrod on this interval
                depth = 0
                nseg = 1
                stack_lo[0] = lo
                stack_hi[0] = hi
                budget = abs_tol
                while nseg > 0:
                    nseg -= 1
                    a = stack_lo[nseg]
                    b = stack_hi[nseg]
                    val, err, dmin, bad = _panel_k15(a, b, s1, s2, s3, sqn,
                                                     variant, det_floor)
                    if dmin < det_floor:
                        status = STATUS_SINGULAR
                        break
                    if bad:
                        status = STATUS_NON_FINITE
                        break
                    tol_here = budget * (b - a) / (hi - lo)
                    if err <= tol_here or err <= rel_tol * abs(val):
                        seg += val
                    else:
                        depth += 1
                        if depth > max_subdiv or nseg + 2 > 62:
                            seg += val
                            status = STATUS_NO_CONVERGENCE
                        else:
                            m = 0.5 * (a + b)
                            stack_lo[nseg] = a
                            stack_hi[nseg] = m
                            stack_lo[nseg + 1] = m
                            stack_hi[nseg + 1] = b
                            nseg += 2
                if status == STATUS_SINGULAR or status == STATUS_NON_FINITE:
                    break
        total += seg
        vn = (float(j + 1) - float(n) * vj) / sqn
        w[count] = vn - total
        count += 1
        trunc = vj
        prev = vj
    return w[:count], count, trunc, status
