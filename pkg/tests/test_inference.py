import numpy as np
import pytest

from lsmgraph import (
    BetaParams,
    LsmSpec,
    ase,
    beta_fisher_information,
    beta_loglik,
    clamp_to_interior,
    default_tube,
    fit_beta,
    lsm_m_estimate,
    mollified_loglik,
    procrustes,
    sample_lsm,
)
from lsmgraph.inference import FitError, smoothstep

from conftest import philox


class TestBetaLoglik:
    def test_uniform_density_is_one(self):
        y = np.array([0.2, 0.5, 0.9])
        assert beta_loglik(y, BetaParams(1, 1)) == pytest.approx(0.0, abs=1e-14)

    def test_closed_form_single_point(self):
        # Beta(2,2) density at 1/2 is 6 * 0.25 = 1.5
        value = beta_loglik(np.array([0.5]), BetaParams(2, 2))
        assert value == pytest.approx(np.log(1.5), abs=1e-12)

    def test_matches_high_precision_oracle(self):
        # independent log-gamma implementation (mpmath, 50 digits)
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 50
        rng = philox(40)
        y = rng.uniform(0.01, 0.99, 25)
        for a, b in [(0.5, 0.5), (1.0, 2.0), (3.7, 0.9), (10.0, 4.0)]:
            oracle = -len(y) * (
                mpmath.loggamma(a) + mpmath.loggamma(b) - mpmath.loggamma(a + b)
            )
            for yi in y:
                oracle += (a - 1) * mpmath.log(yi) + (b - 1) * mpmath.log(1 - yi)
            ours = beta_loglik(y, BetaParams(a, b))
            assert ours == pytest.approx(float(oracle), abs=1e-10)

    def test_rejects_boundary(self):
        with pytest.raises(FitError, match="strictly inside"):
            beta_loglik(np.array([0.0, 0.5]), BetaParams(1, 2))
        with pytest.raises(FitError, match="strictly inside"):
            beta_loglik(np.array([0.5, 1.0]), BetaParams(1, 2))

    def test_theta_box_enforced(self):
        with pytest.raises(ValueError, match="outside"):
            BetaParams(0.0, 1.0)
        with pytest.raises(ValueError, match="outside"):
            BetaParams(1.0, 2e3)


class TestClampToInterior:
    def test_boundary_values(self):
        clamped, count = clamp_to_interior(np.array([0.0, 1.0]), 1e-6)
        np.testing.assert_allclose(clamped, [1e-6, 1 - 1e-6])
        assert count == 2

    def test_interior_unchanged(self):
        y = np.array([0.2, 0.5, 0.8])
        clamped, count = clamp_to_interior(y, 1e-6)
        np.testing.assert_array_equal(clamped, y)
        assert count == 0

    def test_epsilon_validation(self):
        with pytest.raises(FitError):
            clamp_to_interior(np.array([0.5]), 0.7)

    def test_pipeline_clamp_fraction_small(self, hw_curve):
        # mean fraction of embedded rows nudged off the boundary stays
        # below 1% at n=8000 (the effect shrinks with sample size)
        fractions = []
        for r in range(4):
            A, X, _ = sample_lsm(LsmSpec(curve=hw_curve, underlying=BetaParams(1, 2), n=8000), seed=600 + r)
            emb = ase(A, 3)
            rotated = emb.positions @ procrustes(emb.positions, X).rotation
            fit = lsm_m_estimate(rotated, hw_curve)
            fractions.append(fit.n_clamped / 8000)
        assert np.mean(fractions) < 0.01


class TestFitBeta:
    def test_uniform_sample_near_one_one(self):
        rng = philox(41)
        y = rng.random(20000)
        fit = fit_beta(y)
        # method-of-moments oracle on the same data
        m, v = y.mean(), y.var()
        c = m * (1 - m) / v - 1
        mom = np.array([c * m, c * (1 - m)])
        se = 3 * np.sqrt(np.diag(np.linalg.inv(beta_fisher_information(BetaParams(1, 1)))) / len(y))
        assert abs(fit.theta.a - 1.0) < 3 * se[0] + abs(mom[0] - 1.0)
        assert abs(fit.theta.b - 1.0) < 3 * se[1] + abs(mom[1] - 1.0)
        np.testing.assert_allclose([fit.theta.a, fit.theta.b], mom, atol=0.1)

    def test_flip_symmetric_sample_gives_equal_params(self):
        rng = philox(42)
        half = rng.beta(2.0, 5.0, 500)
        y = np.concatenate([half, 1.0 - half])
        fit = fit_beta(y)
        assert abs(fit.theta.a - fit.theta.b) < 1e-8

    def test_score_norm_and_hessian_at_optimum(self):
        rng = philox(43)
        fit = fit_beta(rng.beta(1.4, 3.1, 5000))
        assert fit.converged
        assert fit.score_norm < 1e-8
        eigs = np.linalg.eigvalsh(fit.hessian)
        assert np.all(eigs < 0)

    def test_degenerate_inputs_rejected(self):
        with pytest.raises(FitError, match="zero variance"):
            fit_beta(np.full(10, 0.4))
        with pytest.raises(FitError, match="two observations"):
            fit_beta(np.array([0.4]))
        with pytest.raises(FitError, match="strictly inside"):
            fit_beta(np.array([0.0, 0.5]))

    def test_recovers_parameters_across_family(self):
        rng = philox(44)
        for a, b in [(0.7, 0.7), (1.0, 2.0), (2.0, 5.0), (5.0, 5.0)]:
            y = rng.beta(a, b, 20000)
            fit = fit_beta(y)
            crlb = np.sqrt(np.diag(np.linalg.inv(beta_fisher_information(BetaParams(a, b)))) / len(y))
            assert abs(fit.theta.a - a) < 5 * crlb[0]
            assert abs(fit.theta.b - b) < 5 * crlb[1]

    def test_sqrt_n_covariance_matches_fisher_information(self):
        # 200 replicates: empirical covariance of sqrt(n)(theta_hat - theta0)
        # within 25% (Frobenius) of the inverse information
        rng = philox(45)
        theta0 = BetaParams(1.0, 2.0)
        n, reps = 2000, 200
        draws = np.empty((reps, 2))
        for r in range(reps):
            fit = fit_beta(rng.beta(theta0.a, theta0.b, n))
            draws[r] = (fit.theta.a - theta0.a, fit.theta.b - theta0.b)
        emp = n * np.cov(draws.T)
        target = np.linalg.inv(beta_fisher_information(theta0))
        rel = np.linalg.norm(emp - target) / np.linalg.norm(target)
        assert rel < 0.25


class TestMollifiedLoglik:
    def test_on_curve_equals_pulled_back_density(self, hw_curve):
        tube = default_tube(hw_curve)
        theta = BetaParams(2, 3)
        s = 0.4
        x = hw_curve.point(np.array([s]))[0]
        expected = float(theta.logpdf(np.array([s]))[0])
        assert mollified_loglik(x, theta, hw_curve, tube) == pytest.approx(expected, abs=1e-9)

    def test_outside_outer_tube_is_zero(self, hw_curve):
        tube = default_tube(hw_curve)
        assert mollified_loglik(np.array([2.0, 2.0, 2.0]), BetaParams(2, 3), hw_curve, tube) == 0.0

    def test_mid_shell_matches_independent_oracle(self, hw_curve):
        # oracle path shares nothing with the library: distance minimized
        # over the raw curve parameter with Brent, arclength by
        # Gauss-Kronrod quadrature, density from scipy.stats
        from scipy.integrate import quad
        from scipy.optimize import minimize_scalar
        from scipy.stats import beta as beta_dist

        def r(t):
            return np.array([t * t, 2 * t * (1 - t), (1 - t) * (1 - t)])

        def speed(t):
            return np.sqrt((2 * t) ** 2 + (2 - 4 * t) ** 2 + (2 * (1 - t)) ** 2)

        total = quad(speed, 0, 1, epsabs=1e-13)[0]
        tube = default_tube(hw_curve)
        theta = BetaParams(2.0, 3.0)
        rng = philox(46)
        for _ in range(5):
            s = rng.uniform(0.2, 0.8)
            base = hw_curve.point(np.array([s]))[0]
            direction = rng.standard_normal(3)
            tangent = hw_curve.point(np.array([min(s + 1e-5, 1.0)]))[0] - base
            direction -= direction @ tangent * tangent / (tangent @ tangent)
            direction /= np.linalg.norm(direction)
            radius = 0.5 * (tube.r_inner + tube.r_outer)
            x = base + radius * direction

            res = minimize_scalar(
                lambda t: float(np.sum((r(t) - x) ** 2)),
                bounds=(0.0, 1.0), method="bounded",
                options={"xatol": 1e-12},
            )
            t_star = float(res.x)
            dist = float(np.sqrt(res.fun))
            s_star = quad(speed, 0, t_star, epsabs=1e-13)[0] / total
            u = (tube.r_outer - dist) / (tube.r_outer - tube.r_inner)
            h = 6 * u**5 - 15 * u**4 + 10 * u**3
            oracle = beta_dist.logpdf(s_star, theta.a, theta.b) * h
            ours = mollified_loglik(x, theta, hw_curve, tube)
            assert ours == pytest.approx(oracle, abs=1e-8)

    def test_smoothstep_endpoints(self):
        assert smoothstep(np.array([0.0]))[0] == 0.0
        assert smoothstep(np.array([1.0]))[0] == 1.0
        assert smoothstep(np.array([0.5]))[0] == pytest.approx(0.5)


class TestLsmMEstimate:
    def test_true_positions_match_direct_fit(self, hw_curve):
        rng = philox(47)
        t = rng.beta(1.0, 2.0, 800)
        X = hw_curve.point(t)
        pipeline = lsm_m_estimate(X, hw_curve, epsilon=1e-6)
        direct = fit_beta(clamp_to_interior(t, 1e-6)[0])
        assert pipeline.theta.a == pytest.approx(direct.theta.a, abs=1e-5)
        assert pipeline.theta.b == pytest.approx(direct.theta.b, abs=1e-5)
        assert pipeline.outside_tube_fraction == 0.0
        assert not pipeline.support_misfit

    def test_single_point_rejected(self, hw_curve):
        x = hw_curve.point(np.array([0.3]))
        with pytest.raises(FitError):
            lsm_m_estimate(x, hw_curve)

    def test_permutation_invariant(self, hw_curve):
        rng = philox(48)
        t = rng.beta(2.0, 2.0, 300)
        X = hw_curve.point(t) + 0.01 * rng.standard_normal((300, 3))
        fit1 = lsm_m_estimate(X, hw_curve)
        perm = rng.permutation(300)
        fit2 = lsm_m_estimate(X[perm], hw_curve)
        assert fit1.theta.a == pytest.approx(fit2.theta.a, abs=1e-12)
        assert fit1.theta.b == pytest.approx(fit2.theta.b, abs=1e-12)

    def test_support_misfit_flagged(self, hw_curve):
        rng = philox(49)
        X = rng.uniform(2.0, 3.0, size=(50, 3))  # nowhere near the curve
        fit = lsm_m_estimate(X, hw_curve)
        assert fit.support_misfit
        assert fit.outside_tube_fraction == 1.0

    def test_estimates_close_to_direct_fit_at_n4000(self, hw_curve):
        # consistency: the pullback estimate tracks the true-position
        # estimate more closely at n=4000 than at n=500 in most replicates
        gaps = {500: [], 4000: []}
        for n in (500, 4000):
            for r in range(8):
                A, X, t = sample_lsm(LsmSpec(curve=hw_curve, underlying=BetaParams(1, 2), n=n), seed=900 + r)
                emb = ase(A, 3)
                rotated = emb.positions @ procrustes(emb.positions, X).rotation
                tilde = lsm_m_estimate(rotated, hw_curve)
                hat = fit_beta(clamp_to_interior(t)[0])
                gaps[n].append(
                    np.hypot(tilde.theta.a - hat.theta.a, tilde.theta.b - hat.theta.b)
                )
        wins = sum(g4 < g5 for g4, g5 in zip(gaps[4000], gaps[500]))
        assert wins >= 6
