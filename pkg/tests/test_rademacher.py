"""Empirical complexity estimators and the closed-form covering bound."""

import math

import numpy as np
import pytest

from mixcert import (
    Activation,
    EmptyDataset,
    FunctionClass,
    LabeledDataset,
    LayerNorms,
    NetworkParams,
    TooLarge,
    ZeroSpectralNorm,
    constant_class,
    covering_bound_terms,
    covering_rademacher_bound,
    empirical_rademacher_exact,
    empirical_rademacher_mc,
    loss_class,
    table_class,
)

# One-layer reference terms at n=100, B=10, gamma=1, W=16, s=2, b=4, p=1,
# frozen from an arbitrary-precision evaluation of the displayed formula.
COVERING_FIRST = 0.004
COVERING_SECOND = 229.82837258997824328
ONE_LAYER = LayerNorms(spectral=(2.0,), two_one=(4.0,), lipschitz=(1.0,))


def points(n, d=1, seed=0):
    rng = np.random.default_rng(seed)
    return LabeledDataset(inputs=rng.normal(size=(n, d)),
                          labels=(1 + np.arange(n) % 2).astype(np.int64),
                          num_classes=2, kind="sequence", seed=seed)


class TestFunctionClass:
    def test_range_enforced(self):
        bad = FunctionClass(evaluators=(lambda X, y: np.full(len(X), 1.5),))
        with pytest.raises(ValueError):
            bad.evaluate(np.zeros((3, 1)), np.ones(3, dtype=np.int64))

    def test_constant_class_shape(self):
        c = constant_class([0.0, 0.5, 1.0])
        vals = c.evaluate(np.zeros((4, 1)), np.ones(4, dtype=np.int64))
        assert vals.shape == (3, 4)
        np.testing.assert_array_equal(vals[1], 0.5)

    def test_table_class_lookup(self):
        alphabet = np.array([[0.0], [1.0]])
        tables = [np.array([[0.2, 0.8], [0.6, 0.4]])]
        c = table_class(alphabet, tables)
        X = np.array([[1.0], [0.0]])
        y = np.array([2, 1])
        vals = c.evaluate(X, y)
        np.testing.assert_allclose(vals[0], [0.4, 0.2])

    def test_loss_class_in_range(self):
        rng = np.random.default_rng(31)
        nets = [NetworkParams(layers=(rng.normal(size=(2, 3)),),
                              activations=(Activation("identity"),))
                for _ in range(3)]
        c = loss_class(nets, gamma=0.5)
        vals = c.evaluate(rng.normal(size=(10, 3)),
                          rng.integers(1, 3, size=10).astype(np.int64))
        assert vals.shape == (3, 10)
        assert np.all((vals >= 0.0) & (vals <= 1.0))


class TestExactEnumeration:
    def test_frozen_single_point(self):
        """Class values {0, 1} on one point: E max(s, 0) = 1/2."""
        c = constant_class([0.0, 1.0])
        assert empirical_rademacher_exact(c, points(1)).value == 0.5

    def test_frozen_two_points(self):
        """Same class on two points: E max(0, (s1+s2)/2) = 1/4."""
        c = constant_class([0.0, 1.0])
        assert empirical_rademacher_exact(c, points(2)).value == 0.25

    def test_singleton_class_is_zero(self):
        c = constant_class([0.5])
        assert empirical_rademacher_exact(c, points(6)).value == 0.0

    def test_adding_functions_never_decreases(self):
        d = points(8)
        small = constant_class([0.0, 1.0])
        big = constant_class([0.0, 0.25, 0.5, 1.0])
        assert empirical_rademacher_exact(big, d).value >= \
            empirical_rademacher_exact(small, d).value

    def test_massart_cap(self):
        """Finite class of M bounded functions: complexity is at most
        sqrt(2 ln M / n) plus enumeration slack."""
        for n in (2, 5, 10):
            d = points(n)
            c = constant_class([0.0, 0.25, 0.5, 0.75, 1.0])
            est = empirical_rademacher_exact(c, d)
            assert est.value <= math.sqrt(2 * math.log(5) / n) + 1e-9

    def test_too_large_guard(self):
        c = constant_class([0.0, 1.0])
        with pytest.raises(TooLarge):
            empirical_rademacher_exact(c, points(21))

    def test_empty_rejected(self):
        c = constant_class([0.0, 1.0])
        d = LabeledDataset(inputs=np.zeros((0, 1)), labels=np.zeros(0, dtype=np.int64),
                           num_classes=2, kind="sequence", seed=0)
        with pytest.raises(EmptyDataset):
            empirical_rademacher_exact(c, d)

    def test_method_tag(self):
        est = empirical_rademacher_exact(constant_class([0.0, 1.0]), points(3))
        assert est.method == "exact" and est.stderr == 0.0


class TestMonteCarlo:
    def test_matches_exact_within_three_stderr(self):
        d = points(10)
        c = constant_class([0.0, 0.3, 0.7, 1.0])
        exact = empirical_rademacher_exact(c, d)
        mc = empirical_rademacher_mc(c, d, trials=2000, seed=13)
        assert abs(mc.value - exact.value) <= 3 * mc.stderr
        assert mc.method == "monte_carlo" and mc.trials == 2000

    def test_deterministic_given_seed(self):
        d = points(9)
        c = constant_class([0.0, 1.0])
        a = empirical_rademacher_mc(c, d, trials=500, seed=2)
        b = empirical_rademacher_mc(c, d, trials=500, seed=2)
        assert a.value == b.value and a.stderr == b.stderr

    def test_trial_floor(self):
        with pytest.raises(ValueError):
            empirical_rademacher_mc(constant_class([0.0, 1.0]), points(4),
                                    trials=99, seed=1)


class TestCoveringBound:
    def test_frozen_reference_terms(self):
        first, second = covering_bound_terms(B=10.0, gamma=1.0, W=16, n=100,
                                             norms=ONE_LAYER)
        assert first == pytest.approx(COVERING_FIRST, rel=1e-15)
        assert second == pytest.approx(COVERING_SECOND, rel=1e-13)
        total = covering_rademacher_bound(B=10.0, gamma=1.0, W=16, n=100,
                                          norms=ONE_LAYER)
        assert total == pytest.approx(COVERING_FIRST + COVERING_SECOND, rel=1e-13)

    def test_strictly_decreasing_in_gamma(self):
        prev = None
        for gamma in (0.25, 0.5, 1.0, 2.0, 4.0):
            v = covering_rademacher_bound(B=10.0, gamma=gamma, W=16, n=100,
                                          norms=ONE_LAYER)
            if prev is not None:
                assert v < prev
            prev = v

    def test_decreasing_in_n_past_eight(self):
        prev = None
        for n in range(8, 200, 7):
            v = covering_rademacher_bound(B=10.0, gamma=1.0, W=16, n=n,
                                          norms=ONE_LAYER)
            if prev is not None:
                assert v <= prev + 1e-15
            prev = v

    def test_linear_in_b(self):
        v1 = covering_bound_terms(B=5.0, gamma=1.0, W=16, n=100, norms=ONE_LAYER)[1]
        v2 = covering_bound_terms(B=10.0, gamma=1.0, W=16, n=100, norms=ONE_LAYER)[1]
        assert v2 == pytest.approx(2 * v1, rel=1e-15)

    def test_zero_b_kills_complexity_term(self):
        first, second = covering_bound_terms(B=0.0, gamma=1.0, W=16, n=100,
                                             norms=ONE_LAYER)
        assert second == 0.0 and first == pytest.approx(0.004, rel=1e-15)

    def test_validation_errors(self):
        from mixcert import NonpositiveGamma
        with pytest.raises(NonpositiveGamma):
            covering_bound_terms(B=10.0, gamma=0.0, W=16, n=100, norms=ONE_LAYER)
        with pytest.raises(ValueError):
            covering_bound_terms(B=10.0, gamma=1.0, W=0, n=100, norms=ONE_LAYER)
        with pytest.raises(ValueError):
            covering_bound_terms(B=10.0, gamma=1.0, W=16, n=1, norms=ONE_LAYER)
        zero = LayerNorms(spectral=(0.0,), two_one=(0.0,), lipschitz=(1.0,))
        with pytest.raises(ZeroSpectralNorm):
            covering_bound_terms(B=10.0, gamma=1.0, W=16, n=100, norms=zero)
