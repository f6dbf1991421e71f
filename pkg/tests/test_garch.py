import json
import math

import numpy as np
import pytest

from volkit.distributions import Ged
from volkit.errors import DomainError, InsufficientData
from volkit.garch import (
    AugParams,
    GarchParams,
    GarchSpec,
    filter_volatility,
    forecast_sigma_sq,
    information_criteria,
    params_from_dict,
    params_to_dict,
    simulate,
    spectral_radius_companion,
    stationarity,
)
from volkit.numerics import rng_stream

G11 = GarchSpec()
P11 = GarchParams(omega=0.1, alpha=(0.1,), beta=(0.8,), mean=0.0, sigma1_sq=1.0)


class TestFilter:
    def test_constant_variance_degenerate(self):
        params = GarchParams(omega=0.1, alpha=(0.0,), beta=(0.0,), sigma1_sq=0.5)
        out = filter_volatility(G11, params, np.array([0.3, -1.2, 0.4, 2.0]))
        assert np.allclose(out.sigma_sq[1:], 0.1)
        assert out.sigma_sq[0] == 0.5

    def test_hand_recursion_one_step(self):
        # sigma2_2 = omega + alpha * (x_1 - mean)^2 + beta * sigma2_1
        out = filter_volatility(G11, P11, np.array([1.0, 0.0]))
        assert out.sigma_sq[1] == pytest.approx(0.1 + 0.1 * 1.0 + 0.8 * 1.0, abs=1e-15)

    def test_residual_standardization(self):
        x = rng_stream(0, 0).standard_normal(50)
        out = filter_volatility(G11, P11, x)
        assert np.allclose(out.residuals, x / np.sqrt(out.sigma_sq))
        assert out.residuals.shape == x.shape

    def test_gaussian_loglik_value(self):
        params = GarchParams(omega=1.0, alpha=(0.0,), beta=(0.0,), sigma1_sq=1.0)
        out = filter_volatility(G11, params, np.array([0.0, 0.0]))
        assert out.loglik == pytest.approx(2 * (-0.5 * math.log(2 * math.pi)), abs=1e-12)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            filter_volatility(GarchSpec(p=2, q=2), GarchParams(
                omega=0.1, alpha=(0.05, 0.05), beta=(0.4, 0.4)), np.array([0.1, 0.2]))

    def test_constraint_violations(self):
        with pytest.raises(DomainError):
            filter_volatility(G11, GarchParams(omega=-0.1, alpha=(0.1,), beta=(0.8,)),
                              np.zeros(10))
        with pytest.raises(DomainError):
            filter_volatility(G11, GarchParams(omega=0.1, alpha=(-0.1,), beta=(0.8,)),
                              np.zeros(10))

    def test_coefficient_count_mismatch(self):
        with pytest.raises(DomainError):
            filter_volatility(GarchSpec(p=2, q=1), P11, np.zeros(10))

    def test_positivity_fuzz(self, rng):
        for _ in range(60):
            q = int(rng.integers(1, 4))
            p = int(rng.integers(1, 4))
            alpha = rng.uniform(0.0, 0.3, q)
            beta = rng.uniform(0.0, 0.6, p)
            scale = min(1.0, 0.98 / max(alpha.sum() + beta.sum(), 1e-9))
            alpha, beta = alpha * scale, beta * scale
            params = GarchParams(omega=float(rng.uniform(1e-4, 1.0)),
                                 alpha=tuple(alpha), beta=tuple(beta),
                                 mean=float(rng.normal()), sigma1_sq=float(rng.uniform(0.1, 2.0)))
            spec = GarchSpec(p=p, q=q)
            x = rng.standard_normal(200) * rng.uniform(0.5, 3.0)
            out = filter_volatility(spec, params, x)
            assert np.all(out.sigma_sq > 0)


class TestReductions:
    def test_gjr_gamma_zero_is_garch(self, rng):
        sim = simulate(G11, P11, 400, rng)
        gjr = GarchSpec(family="gjr")
        pg = GarchParams(omega=0.1, alpha=(0.1,), beta=(0.8,), gamma=0.0,
                         mean=0.0, sigma1_sq=1.0)
        out_g = filter_volatility(G11, P11, sim.returns)
        out_j = filter_volatility(gjr, pg, sim.returns)
        assert np.abs(out_g.sigma_sq - out_j.sigma_sq).max() < 1e-10

    def test_ngarch_rho_zero_is_garch(self, rng):
        sim = simulate(G11, P11, 400, rng)
        ng = GarchSpec(family="ngarch")
        pn = GarchParams(omega=0.1, alpha=(0.1,), beta=(0.8,), rho=0.0,
                         mean=0.0, sigma1_sq=1.0)
        out_g = filter_volatility(G11, P11, sim.returns)
        out_n = filter_volatility(ng, pn, sim.returns)
        assert np.abs(out_g.sigma_sq - out_n.sigma_sq).max() < 1e-10

    def test_augmented_reduces_to_garch(self, rng):
        # lam=1, delta=2, c=0, a0=omega, a1=beta, a2=alpha
        sim = simulate(G11, P11, 400, rng)
        aug = GarchSpec(family="augmented")
        pa = GarchParams(omega=0.0, alpha=(0.0,), beta=(0.0,), mean=0.0,
                         sigma1_sq=1.0,
                         aug=AugParams(a0=0.1, a1=0.8, a2=0.1, c=0.0, delta=2.0, lam=1.0))
        out_g = filter_volatility(G11, P11, sim.returns)
        out_a = filter_volatility(aug, pa, sim.returns)
        assert np.abs(out_g.sigma_sq - out_a.sigma_sq).max() < 1e-10

    def test_egarch_runs_and_stays_positive(self, rng):
        eg = GarchSpec(family="egarch")
        pe = GarchParams(omega=-0.1, alpha=(0.15,), beta=(0.9,), gamma=-0.05,
                         mean=0.0, sigma1_sq=1.0)
        sim = simulate(eg, pe, 500, rng)
        out = filter_volatility(eg, pe, sim.returns)
        assert np.all(out.sigma_sq > 0)
        assert np.abs(out.sigma_sq - sim.sigma_sq).max() < 1e-12

    def test_ngarch_abs_variant(self, rng):
        spec = GarchSpec(family="ngarch-abs")
        params = GarchParams(omega=0.1, alpha=(0.1,), beta=(0.8,),
                             aug=AugParams(delta=1.5), sigma1_sq=1.0)
        sim = simulate(spec, params, 300, rng)
        out = filter_volatility(spec, params, sim.returns)
        assert np.abs(out.sigma_sq - sim.sigma_sq).max() < 1e-12

    def test_egarch_ged_innovation_roundtrip(self, rng):
        # E|eps| enters the recursion and must match the innovation law
        spec = GarchSpec(family="egarch", innovation=Ged(1.3))
        params = GarchParams(omega=-0.05, alpha=(0.12,), beta=(0.92,),
                             gamma=-0.04, sigma1_sq=1.0)
        sim = simulate(spec, params, 500, rng)
        out = filter_volatility(spec, params, sim.returns)
        assert np.abs(out.sigma_sq - sim.sigma_sq).max() < 1e-12

    def test_ged_abs_moment_closed_form(self):
        g = Ged(1.3)
        x = g.sample(rng_stream(123, 0), 2_000_000)
        mc = float(np.mean(np.abs(x)))
        se = float(np.std(np.abs(x)) / math.sqrt(x.size))
        assert abs(g.abs_moment() - mc) < 4 * se

    def test_augmented_domain_guard_raises(self):
        # xi_2 drags phi below the Box-Cox inverse domain at eps = 0
        spec = GarchSpec(family="augmented")
        params = GarchParams(sigma1_sq=1.0,
                             aug=AugParams(a0=0.0, a4=2.0, delta=0.5, lam=0.5))
        with pytest.raises(DomainError, match="Box-Cox"):
            filter_volatility(spec, params, np.zeros(50))


class TestSimulate:
    def test_roundtrip_identity(self, rng):
        for spec, params in [
            (G11, P11),
            (GarchSpec(p=2, q=2), GarchParams(omega=0.1, alpha=(0.1, 0.05),
                                              beta=(0.5, 0.2), sigma1_sq=0.9)),
            (GarchSpec(family="gjr"), GarchParams(omega=0.05, alpha=(0.03,),
                                                  beta=(0.9,), gamma=0.05)),
            (GarchSpec(family="ngarch"), GarchParams(omega=0.05, alpha=(0.05,),
                                                     beta=(0.85,), rho=0.3)),
        ]:
            sim = simulate(spec, params, 600, rng)
            out = filter_volatility(spec, params, sim.returns)
            assert np.abs(out.sigma_sq - sim.sigma_sq).max() < 1e-12

    def test_mean_variance_limit(self):
        # E[sigma^2_n] -> omega / k; Monte Carlo over many short paths
        total = 0.0
        n_paths = 10_000
        for i in range(n_paths):
            sim = simulate(G11, P11, 500, rng_stream(99, i))
            total += sim.sigma_sq[-1]
        assert abs(total / n_paths - 1.0) < 0.05

    def test_explosive_mean_growth(self):
        # alpha + beta > 1: E[sigma^2_n] grows beyond any bound
        params = GarchParams(omega=0.1, alpha=(0.15,), beta=(0.9,), sigma1_sq=1.0)
        means = []
        for n in (100, 1_000, 10_000):
            vals = [simulate(G11, params, n, rng_stream(7, i)).sigma_sq[-1]
                    for i in range(60)]
            means.append(np.mean(vals))
        assert means[0] < means[1] < means[2]
        assert means[2] > 10 * 0.1

    def test_ged_innovations(self, rng):
        spec = GarchSpec(innovation=Ged(1.3))
        sim = simulate(spec, P11, 4000, rng)
        assert abs(np.var(sim.innovations) - 1.0) < 0.1
        out = filter_volatility(spec, P11, sim.returns)
        assert np.abs(out.sigma_sq - sim.sigma_sq).max() < 1e-12


class TestForecast:
    def test_one_step_ahead_matches_recursion(self, rng):
        sim = simulate(G11, P11, 300, rng)
        x = sim.returns
        s = filter_volatility(G11, P11, x).sigma_sq
        expected = 0.1 + 0.1 * x[-1] ** 2 + 0.8 * s[-1]
        assert forecast_sigma_sq(G11, P11, x) == pytest.approx(expected, rel=1e-14)


class TestStationarity:
    def test_k_and_limit_arithmetic(self):
        rep = stationarity(G11, P11)
        assert rep.k == pytest.approx(0.1, abs=1e-12)
        assert rep.limit_variance == pytest.approx(1.0, abs=1e-9)

    def test_garch22_spectral_radius_vs_eigvals(self):
        # lag weights 0.3+0.25, 0.2+0.15 -> k = 0.1
        spec = GarchSpec(p=2, q=2)
        params = GarchParams(omega=0.2, alpha=(0.3, 0.2), beta=(0.25, 0.15),
                             sigma1_sq=1.0)
        rep = stationarity(spec, params)
        assert rep.k == pytest.approx(0.1, abs=1e-12)
        lam = np.array([0.55, 0.35])
        comp = np.array([[0.55, 0.35], [1.0, 0.0]])
        ref = np.max(np.abs(np.linalg.eigvals(comp)))
        assert rep.spectral_radius == pytest.approx(ref, abs=1e-10)
        assert rep.spectral_radius < 1
        assert spectral_radius_companion(lam) == pytest.approx(ref, abs=1e-10)

    def test_k_positive_iff_radius_below_one(self, rng):
        for _ in range(40):
            lam = rng.uniform(0.0, 0.5, int(rng.integers(1, 5)))
            k = 1.0 - lam.sum()
            rho = spectral_radius_companion(lam)
            if abs(k) > 1e-10:
                assert (k > 0) == (rho < 1.0)

    def test_integrated_regime_lyapunov_negative(self):
        # k = -0.05 yet strictly stationary: E[ln(alpha e^2 + beta)] < 0.
        # (quadrature gives -0.070 at alpha=0.45, beta=0.60; note that
        # smaller-alpha k=-0.05 points such as (0.15, 0.90) sit on the
        # non-stationary side with a positive drift)
        params = GarchParams(omega=0.1, alpha=(0.45,), beta=(0.6,), sigma1_sq=1.0)
        rep = stationarity(G11, params, mc_draws=200_000)
        assert rep.k == pytest.approx(-0.05, abs=1e-12)
        assert rep.limit_variance == math.inf
        assert rep.lyapunov + 3 * rep.lyapunov_se < 0

    def test_lemma_ordering_fuzz(self, rng):
        # k > 0 implies a non-positive Lyapunov drift (never the reverse)
        for _ in range(25):
            a = float(rng.uniform(0.01, 0.5))
            b = float(rng.uniform(0.0, 0.95))
            if a + b >= 0.99:
                continue
            params = GarchParams(omega=0.1, alpha=(a,), beta=(b,), sigma1_sq=1.0)
            rep = stationarity(G11, params, mc_draws=20_000)
            assert rep.k > 0
            assert rep.lyapunov < 3 * rep.lyapunov_se

    def test_gjr_k_formula(self):
        spec = GarchSpec(family="gjr")
        params = GarchParams(omega=0.1, alpha=(0.05,), beta=(0.8,), gamma=0.1)
        rep = stationarity(spec, params)
        assert rep.k == pytest.approx(1 - 0.05 - 0.8 - 0.05, abs=1e-12)

    def test_ngarch_k_formula(self):
        spec = GarchSpec(family="ngarch")
        params = GarchParams(omega=0.1, alpha=(0.1,), beta=(0.7,), rho=0.5)
        rep = stationarity(spec, params)
        assert rep.k == pytest.approx(1 - 0.1 * 1.25 - 0.7, abs=1e-12)

    def test_egarch_limit(self):
        spec = GarchSpec(family="egarch")
        params = GarchParams(omega=0.2, alpha=(0.1,), beta=(0.5,), gamma=0.0,
                             sigma1_sq=1.0)
        rep = stationarity(spec, params)
        assert rep.limit_variance == pytest.approx(0.4, abs=1e-12)
        assert rep.spectral_radius == pytest.approx(0.5, abs=1e-12)

    def test_augmented_stationarity_mc(self):
        spec = GarchSpec(family="augmented")
        params = GarchParams(aug=AugParams(a0=0.1, a1=0.8, a2=0.1, delta=2.0, lam=1.0),
                             sigma1_sq=1.0)
        rep = stationarity(spec, params, mc_draws=100_000)
        assert rep.lyapunov < 0
        assert rep.k == pytest.approx(0.1, abs=0.01)
        assert rep.limit_variance == pytest.approx(1.0, abs=0.1)


class TestInformationCriteria:
    def test_zero_case(self):
        ic = information_criteria(0.0, 0, 100)
        assert ic == (0.0, 0.0, 0.0, 0.0, 0.0)

    def test_reference_arithmetic(self):
        ic = information_criteria(-100.0, 3, 1000)
        assert ic.aic == pytest.approx(206.0, abs=1e-12)
        assert ic.bic == pytest.approx(200 + 3 * math.log(1000), abs=1e-10)
        assert ic.aicc == pytest.approx(206 + 24 / 996, abs=1e-10)
        assert ic.hqc == pytest.approx(200 + 6 * math.log(math.log(1000)), abs=1e-10)
        assert ic.caic == pytest.approx(200 + 3 * (math.log(1000) + 1), abs=1e-10)

    def test_small_sample_guard(self):
        with pytest.raises(DomainError):
            information_criteria(-10.0, 5, 6)


class TestJsonMapping:
    def test_roundtrip(self):
        spec = GarchSpec(p=2, q=1, innovation=Ged(1.4))
        params = GarchParams(omega=0.2, alpha=(0.1,), beta=(0.5, 0.1),
                             mean=0.01, sigma1_sq=1.3)
        doc = params_to_dict(spec, params)
        text = json.dumps(doc)
        spec2, params2 = params_from_dict(json.loads(text))
        assert spec2 == spec
        assert params2 == params

    def test_field_names(self):
        doc = params_to_dict(G11, P11)
        assert set(doc) == {"family", "omega", "alpha", "beta", "gamma", "rho",
                            "aug", "mean", "sigma1_sq", "innovation"}

    def test_aug_roundtrip(self):
        spec = GarchSpec(family="augmented")
        params = GarchParams(aug=AugParams(a0=0.1, a1=0.5, a2=0.1, c=0.2,
                                           delta=1.5, lam=0.5), sigma1_sq=2.0)
        spec2, params2 = params_from_dict(params_to_dict(spec, params))
        assert params2.aug == params.aug

    def test_invalid_rejected(self):
        doc = params_to_dict(G11, P11)
        doc["omega"] = -1.0
        with pytest.raises(DomainError):
            params_from_dict(doc)
