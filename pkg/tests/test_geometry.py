import math

import numpy as np
import pytest

import sparsecode as sc
from sparsecode.errors import (
    DegenerateProjectionError,
    DomainError,
    ParameterError,
)


class TestManifoldSampling:
    def test_circle_sample_lies_on_circle(self):
        X = sc.sample_input(sc.circle(4), rng_seed=1, n=1)
        assert X[0, 2] == 0.0 and X[0, 3] == 0.0
        assert X[0, 0] ** 2 + X[0, 1] ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_full_sphere_mean_concentrates(self):
        X = sc.sample_input(sc.full_sphere(3), rng_seed=2, n=10**5)
        assert np.linalg.norm(X.mean(axis=0)) < 0.02
        np.testing.assert_allclose(np.linalg.norm(X, axis=1), 1.0, atol=1e-9)

    def test_same_seed_same_samples(self):
        for man in [sc.full_sphere(5), sc.circle(6), sc.sub_sphere(6, 2)]:
            a = sc.sample_input(man, rng_seed=11, n=50)
            b = sc.sample_input(man, rng_seed=11, n=50)
            assert np.array_equal(a, b)

    def test_sub_sphere_support(self):
        X = sc.sample_input(sc.sub_sphere(7, 3), rng_seed=3, n=200)
        assert np.all(X[:, 4:] == 0.0)
        np.testing.assert_allclose(np.linalg.norm(X[:, :4], axis=1), 1.0, atol=1e-12)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            sc.circle(2)
        with pytest.raises(ParameterError):
            sc.sub_sphere(4, 4)
        with pytest.raises(ParameterError):
            sc.sample_input(sc.circle(4), rng_seed=0, n=0)


class TestUnitVectorValidation:
    def test_accepts_unit_norm(self):
        x = sc.as_unit_vector([0.6, 0.8], d=2)
        assert x.dtype == np.float64

    def test_rejects_off_norm_and_bad_shape(self):
        with pytest.raises(ParameterError):
            sc.as_unit_vector([0.6, 0.9])
        with pytest.raises(ParameterError):
            sc.as_unit_vector([[1.0, 0.0]])
        with pytest.raises(ParameterError):
            sc.as_unit_vector([1.0, 0.0], d=3)


class TestExpansionRows:
    def test_uniform_sphere_rows_unit_norm(self):
        rows = sc.sample_expansion_rows(sc.uniform_sphere(5), m=100, rng_seed=4)
        np.testing.assert_allclose(np.linalg.norm(rows, axis=1), 1.0, atol=1e-9)

    def test_gaussian_rows_variance(self):
        rows = sc.sample_expansion_rows(sc.gaussian(10, sigma=1.0), m=10**4, rng_seed=5)
        var = rows.var(axis=0)
        assert np.all(var > 0.9) and np.all(var < 1.1)

    def test_data_attuned_rows_on_manifold(self):
        man = sc.circle(6)
        rows = sc.sample_expansion_rows(sc.data_attuned(man), m=50, rng_seed=6)
        assert np.all(rows[:, 2:] == 0.0)
        np.testing.assert_allclose(np.hypot(rows[:, 0], rows[:, 1]), 1.0, atol=1e-12)

    def test_gaussian_needs_positive_sigma(self):
        with pytest.raises(ParameterError):
            sc.gaussian(4, sigma=0.0)


class TestProjection:
    def test_circle_closed_form(self):
        pi, delta = sc.circle(4).project(np.array([0.8, 0.6, 0.3, 0.0]))
        np.testing.assert_allclose(pi, [0.8, 0.6, 0.0, 0.0], atol=1e-15)
        assert delta == pytest.approx(0.3, abs=1e-12)

    def test_sphere_radial(self):
        pi, delta = sc.full_sphere(3).project(np.array([2.0, 0.0, 0.0]))
        np.testing.assert_allclose(pi, [1.0, 0.0, 0.0])
        assert delta == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_input(self):
        with pytest.raises(DegenerateProjectionError):
            sc.circle(4).project(np.array([0.0, 0.0, 1.0, 0.0]))
        with pytest.raises(DegenerateProjectionError):
            sc.full_sphere(3).project(np.zeros(3))

    def test_projection_idempotent(self):
        rng = np.random.default_rng(7)
        for man in [sc.full_sphere(4), sc.circle(5), sc.sub_sphere(6, 2)]:
            for _ in range(50):
                theta = rng.standard_normal(man.dim)
                pi, _ = man.project(theta)
                _, delta2 = man.project(pi)
                assert delta2 < 1e-12

    def test_batch_matches_single(self):
        rng = np.random.default_rng(8)
        man = sc.circle(5)
        pts = rng.standard_normal((40, 5))
        pis, deltas, ok = man.project_batch(pts)
        assert ok.all()
        for i in range(40):
            pi, delta = man.project(pts[i])
            np.testing.assert_allclose(pis[i], pi)
            assert deltas[i] == pytest.approx(delta, abs=1e-14)

    def test_batch_flags_degenerate(self):
        man = sc.circle(4)
        pts = np.array([[0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 0.0, 0.0]])
        _, _, ok = man.project_batch(pts)
        assert list(ok) == [False, True]


class TestTargets:
    def test_triangular_values(self):
        f = sc.triangular(1.0)
        x_pi = np.array([math.cos(math.pi), math.sin(math.pi), 0.0, 0.0])
        assert f.evaluate(x_pi) == pytest.approx(2.0, abs=1e-9)
        x_half = np.array([0.0, 1.0, 0.0, 0.0])
        assert f.evaluate(x_half) == pytest.approx(1.0, abs=1e-12)

    def test_constant_everywhere(self):
        f = sc.constant(7.0)
        X = sc.sample_input(sc.full_sphere(5), rng_seed=9, n=20)
        assert np.all(f.evaluate_batch(X) == 7.0)

    def test_triangular_off_circle_raises(self):
        f = sc.triangular(1.0)
        with pytest.raises(DomainError):
            f.evaluate(np.array([0.5, 0.5, 0.5, 0.5]))

    @pytest.mark.parametrize(
        "target,manifold",
        [
            (sc.triangular(1.0), sc.circle(4)),
            (sc.triangular(2.5), sc.circle(6)),
            (sc.coordinate(1), sc.full_sphere(4)),
            (sc.cosine_to_point(1.7), sc.full_sphere(5)),
            (sc.constant(3.0), sc.sub_sphere(5, 2)),
        ],
    )
    def test_lipschitz_audit(self, target, manifold):
        # 10^4 random pairs: |f(x) - f(y)| <= lam * ||x - y|| + 1e-9
        rng = np.random.default_rng(10)
        X = manifold.sample(10**4, rng)
        Y = manifold.sample(10**4, rng)
        df = np.abs(target.evaluate_batch(X) - target.evaluate_batch(Y))
        dx = np.linalg.norm(X - Y, axis=1)
        assert np.all(df <= target.lipschitz * dx + 1e-9)


class TestCapMeasure:
    def test_two_sphere_closed_form(self):
        # on S^2 the cap mass is exactly r^2/4
        assert sc.cap_measure_exact(3, 0.5).exact == pytest.approx(0.0625, abs=1e-12)

    def test_hemisphere_limit(self):
        val = sc.cap_measure_exact(6, math.sqrt(2.0) - 1e-9).exact
        assert val == pytest.approx(0.5, abs=1e-6)

    def test_lower_bound_below_exact_and_monotone(self):
        for d in range(2, 11):
            prev = 0.0
            for r in np.linspace(0.05, 1.35, 14):
                cap = sc.cap_measure_exact(d, float(r))
                assert cap.lower_bound <= cap.exact
                assert cap.exact > prev
                prev = cap.exact

    def test_monte_carlo_agreement(self):
        cap = sc.cap_measure_exact(6, 0.3)
        mc = sc.mc_cap_measure(6, 0.3, n=2 * 10**5, seed=1)
        assert abs(cap.exact - mc.estimate) <= 3 * mc.stderr

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            sc.cap_measure_exact(1, 0.5)
        with pytest.raises(ParameterError):
            sc.cap_measure_exact(4, 1.5)


class TestCircleTubeMeasure:
    def test_closed_form_values(self):
        # eps = r^2 (1 - r^2/4); mass = eps^{(d-2)/2}, Monte Carlo verified
        assert sc.circle_tube_measure(4, 0.5) == pytest.approx(0.234375, abs=1e-12)
        assert sc.circle_tube_measure(4, 1.0 - 1e-12) == pytest.approx(0.75, abs=1e-9)

    def test_monte_carlo_agreement(self):
        closed = sc.circle_tube_measure(5, 0.4)
        mc = sc.mc_circle_tube_measure(5, 0.4, n=2 * 10**5, seed=2)
        assert abs(closed - mc.estimate) <= 3 * mc.stderr

    def test_dimension_restriction(self):
        with pytest.raises(ParameterError):
            sc.circle_tube_measure(3, 0.5)
        with pytest.raises(ParameterError):
            sc.circle_tube_measure(5, 1.0)


class TestBetaTail:
    def test_exact_cases(self):
        assert sc.beta_tail(1.0, 1.0, 0.3).exact == pytest.approx(0.3, abs=1e-15)
        assert sc.beta_tail(1.0, 2.0, 0.5).exact == pytest.approx(0.25, abs=1e-15)

    def test_exact_case_collapses_bounds(self):
        t = sc.beta_tail(1.0, 3.0, 0.4)
        assert t.lower == pytest.approx(t.exact, rel=1e-12)
        assert t.upper == pytest.approx(t.exact, rel=1e-12)

    def test_sandwich_against_monte_carlo(self):
        for a, b, e in [(0.5, 1.5, 0.2), (0.8, 3.0, 0.4), (0.3, 2.0, 0.3)]:
            t = sc.beta_tail(a, b, e)
            mc = sc.mc_beta_tail(a, b, e, n=2 * 10**5, seed=3)
            assert t.lower <= mc.estimate <= t.upper
            assert 0.0 < t.lower <= t.upper <= 1.0

    def test_parameter_errors(self):
        for bad in [(1.5, 2.0, 0.5), (1.0, 0.5, 0.5), (1.0, 2.0, 0.0)]:
            with pytest.raises(ParameterError):
                sc.beta_tail(*bad)
