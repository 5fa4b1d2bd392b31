"""Regression core tests: scaler, cost, gradient, fit, selection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bracketlab.dataio import PairExample
from bracketlab.errors import DataError
from bracketlab.linmodel import (
    accuracy,
    cost,
    cost_gradient,
    feature_importance,
    fit,
    fit_scaler,
    load_model,
    logistic,
    predict_proba,
    restrict_examples,
    save_model,
    select_features,
    transform,
)

from conftest import manual_model, synthetic_examples, team

LN2 = math.log(2.0)


def examples_from(X, y):
    return [PairExample(x=np.asarray(xi, dtype=float), y=int(yi)) for xi, yi in zip(X, y)]


def packed_cost(v, X, y, lam):
    return cost((float(v[0]), v[1:]), X, y, lam)


def fd_gradient(v, X, y, lam, h=1e-5):
    """Central-difference oracle for the packed (intercept, coefs) cost."""
    out = np.empty_like(v)
    for i in range(len(v)):
        up, down = v.copy(), v.copy()
        up[i] += h
        down[i] -= h
        out[i] = (packed_cost(up, X, y, lam) - packed_cost(down, X, y, lam)) / (2 * h)
    return out


class TestScaler:
    def test_population_std(self):
        scaler = fit_scaler(examples_from([[1.0], [2.0], [3.0]], [0, 1, 0]))
        assert scaler.means[0] == 2.0
        assert scaler.stds[0] == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-15)

    def test_zero_variance_names_feature(self):
        with pytest.raises(DataError, match="CONST"):
            fit_scaler(
                examples_from([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]], [0, 1, 0]),
                feature_names=("CONST", "VAR"),
            )

    def test_transform_of_fit_set_is_standardized(self):
        rng = np.random.default_rng(0)
        X = rng.normal(50.0, 7.0, size=(40, 3))
        exs = examples_from(X, rng.integers(0, 2, size=40))
        scaler = fit_scaler(exs)
        Z = transform(scaler, X)
        assert np.all(np.abs(Z.mean(axis=0)) < 1e-10)
        assert np.all(np.abs(Z.std(axis=0) - 1.0) < 1e-10)

    def test_already_standardized_is_near_identity(self):
        rng = np.random.default_rng(1)
        X = rng.normal(0.0, 1.0, size=(500, 1))
        X = (X - X.mean()) / X.std()
        scaler = fit_scaler(examples_from(X, np.zeros(len(X))))
        assert abs(scaler.means[0]) < 1e-10
        assert abs(scaler.stds[0] - 1.0) < 1e-10


class TestTransform:
    def test_centering_unit_step_and_arithmetic(self):
        scaler = fit_scaler(examples_from([[0.0, 0.0], [4.0, 8.0]], [0, 1]))
        assert np.array_equal(transform(scaler, scaler.means), np.zeros(2))
        assert np.allclose(transform(scaler, scaler.means + scaler.stds), np.ones(2))
        one = manual_model(["f"], [1.0], means=[2.0], stds=[4.0])
        assert transform(one.scaler, np.array([10.0]))[0] == 2.0

    def test_dimension_mismatch(self):
        scaler = fit_scaler(examples_from([[0.0], [4.0]], [0, 1]))
        with pytest.raises(ValueError, match="dimension"):
            transform(scaler, np.array([1.0, 2.0]))


class TestLogistic:
    def test_symmetry_point(self):
        assert logistic(0.0) == 0.5

    def test_ln3(self):
        assert logistic(math.log(3.0)) == pytest.approx(0.75, abs=1e-15)

    @pytest.mark.parametrize("t", [0.1, 1.7, 35.0])
    def test_complement_identity(self, t):
        assert logistic(t) + logistic(-t) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("t", [-700.0, 700.0])
    def test_no_overflow_at_700(self, t):
        v = logistic(t)
        assert 0.0 <= v <= 1.0 and math.isfinite(v)

    def test_monotone(self):
        ts = np.linspace(-30, 30, 101)
        vs = logistic(ts)
        assert np.all(np.diff(vs) > 0)


class TestCost:
    def test_zero_params_is_ln2(self):
        X = np.random.default_rng(2).normal(size=(10, 3))
        y = np.array([0, 1] * 5, dtype=float)
        assert cost((0.0, np.zeros(3)), X, y, 0.0) == pytest.approx(LN2, abs=1e-15)

    def test_penalty_arithmetic(self):
        # one example, x=0 forces h=0.5; lambda=1 and coef 2 add 4
        X = np.zeros((1, 1))
        y = np.ones(1)
        assert cost((0.0, np.array([2.0])), X, y, 1.0) == pytest.approx(LN2 + 4.0, abs=1e-12)

    def test_true_params_beat_zero_on_separable_data(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(200, 2))
        y = (X @ np.array([2.0, -1.0]) > 0).astype(float)
        assert cost((0.0, np.array([2.0, -1.0])), X, y, 0.0) < cost((0.0, np.zeros(2)), X, y, 0.0)

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            cost((0.0, np.zeros(2)), np.zeros((0, 2)), np.zeros(0), 0.0)

    def test_intercept_excluded_from_penalty(self):
        X = np.zeros((1, 1))
        y = np.ones(1)
        with_intercept = cost((3.0, np.zeros(1)), X, y, 10.0)
        assert with_intercept == pytest.approx(-math.log(logistic(3.0)), abs=1e-12)


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            n = int(rng.integers(5, 51))
            p = int(rng.integers(1, 7))
            X = rng.normal(size=(n, p))
            y = rng.integers(0, 2, size=n).astype(float)
            lam = float(rng.uniform(0, 0.5))
            for _ in range(5):
                v = rng.uniform(-2.0, 2.0, size=p + 1)
                g0, g = cost_gradient((float(v[0]), v[1:]), X, y, lam)
                analytic = np.concatenate(([g0], g))
                fd = fd_gradient(v, X, y, lam)
                rel = np.abs(fd - analytic).max() / max(np.abs(analytic).max(), 1e-8)
                assert rel < 1e-5


class TestFit:
    def test_synthetic_recovery(self):
        rng = np.random.default_rng(5)
        train = synthetic_examples(5000, [2.0, -1.0], rng)
        model = fit(train, 1e-4)
        assert model.fit_meta.converged
        assert model.fit_meta.grad_inf_norm <= 1e-6
        assert abs(model.intercept) < 0.15
        assert abs(model.coefficients[0] - 2.0) < 0.15
        assert abs(model.coefficients[1] + 1.0) < 0.15

    def test_huge_lambda_crushes_coefficients(self):
        rng = np.random.default_rng(6)
        train = synthetic_examples(400, [2.0, -1.0], rng)
        model = fit(train, 1e6)
        assert np.all(np.abs(model.coefficients) < 1e-2)

    def test_zero_intercept_option(self):
        rng = np.random.default_rng(7)
        train = synthetic_examples(500, [1.0], rng)
        model = fit(train, 0.01, zero_intercept=True)
        assert model.intercept == 0.0

    def test_single_class_without_zero_intercept_rejected(self):
        exs = [PairExample(x=np.array([float(i)]), y=1) for i in range(10)]
        with pytest.raises(DataError, match="single-class"):
            fit(exs, 0.01)

    def test_non_convergence_is_flagged_not_raised(self):
        rng = np.random.default_rng(8)
        train = synthetic_examples(300, [2.0, -1.0], rng)
        model = fit(train, 0.0, max_iter=3)
        assert not model.fit_meta.converged
        assert model.fit_meta.iterations == 3

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        train = synthetic_examples(300, [1.0, 0.5], rng)
        m1 = fit(train, 0.01)
        m2 = fit(train, 0.01)
        assert np.array_equal(m1.coefficients, m2.coefficients)
        assert m1.intercept == m2.intercept
        assert m1.fit_meta == m2.fit_meta

    def test_alternate_schedule_reaches_same_cost(self):
        # convexity: a plain fixed-step descent must land on the same optimum
        rng = np.random.default_rng(10)
        train = synthetic_examples(300, [1.0, -0.5, 0.25], rng)
        model = fit(train, 0.01)
        X = np.stack([ex.x for ex in train])
        Z = transform(model.scaler, X)
        y = np.array([ex.y for ex in train], dtype=float)

        v = np.zeros(4)
        for _ in range(200000):
            g0, g = cost_gradient((float(v[0]), v[1:]), Z, y, 0.01)
            full = np.concatenate(([g0], g))
            if np.abs(full).max() <= 1e-6:
                break
            v -= 0.25 * full
        assert np.abs(full).max() <= 1e-6
        assert abs(packed_cost(v, Z, y, 0.01) - model.fit_meta.final_cost) < 1e-8

    def test_penalty_monotone_in_lambda(self):
        rng = np.random.default_rng(11)
        train = synthetic_examples(400, [1.5, -0.75], rng)
        norms = []
        for lam in (0.0, 0.01, 0.1, 1.0, 10.0):
            model = fit(train, lam)
            norms.append(float(model.coefficients @ model.coefficients))
        assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))

    def test_scale_invariance_of_probabilities(self):
        rng = np.random.default_rng(12)
        train = synthetic_examples(400, [1.0, -2.0], rng)
        scaled = [PairExample(x=ex.x * np.array([1000.0, 1.0]), y=ex.y) for ex in train]
        m1 = fit(train, 0.01)
        m2 = fit(scaled, 0.01)
        X1 = np.stack([ex.x for ex in train])
        X2 = np.stack([ex.x for ex in scaled])
        p1 = logistic(m1.intercept + transform(m1.scaler, X1) @ m1.coefficients)
        p2 = logistic(m2.intercept + transform(m2.scaler, X2) @ m2.coefficients)
        assert np.max(np.abs(p1 - p2)) < 1e-8


class TestPredictProba:
    def test_identical_teams_zero_intercept_gives_half(self):
        model = manual_model(["F"], [1.3], zero_intercept=True)
        a = team("A", F=2.0)
        b = team("B", F=2.0)
        assert predict_proba(model, a, b) == 0.5

    def test_ln3_composition(self):
        model = manual_model(["F"], [1.0])
        assert predict_proba(model, team("A", F=math.log(3.0)), team("B", F=0.0)) == pytest.approx(
            0.75, abs=1e-15
        )

    def test_unknown_feature_rejected(self):
        model = manual_model(["F"], [1.0])
        with pytest.raises(DataError, match="missing features"):
            predict_proba(model, team("A", G=1.0), team("B", G=2.0))

    def test_antisymmetry_for_zero_intercept_fit(self):
        rng = np.random.default_rng(13)
        # mirrored training set, then check the identity on fresh pairs
        half = synthetic_examples(300, [1.0, -0.5, 0.25, 2.0], rng)
        train = []
        for ex in half:
            train.append(ex)
            train.append(PairExample(x=-ex.x, y=1 - ex.y, pair_id=ex.pair_id))
        model = fit(train, 0.01, feature_names=("A", "B", "C", "D"), zero_intercept=True)
        for _ in range(100):
            fa = rng.normal(100.0, 15.0, size=4)
            fb = rng.normal(100.0, 15.0, size=4)
            a = team("X", A=fa[0], B=fa[1], C=fa[2], D=fa[3])
            b = team("Y", A=fb[0], B=fb[1], C=fb[2], D=fb[3])
            total = predict_proba(model, a, b) + predict_proba(model, b, a)
            assert abs(total - 1.0) < 1e-12


class TestAccuracy:
    def test_perfect_and_fractional(self):
        model = manual_model(["F"], [5.0])
        right = examples_from([[2.0], [-2.0], [1.0], [-1.0]], [1, 0, 1, 0])
        assert accuracy(model, right) == 100.0
        three_of_four = examples_from([[2.0], [-2.0], [1.0], [-1.0]], [1, 0, 1, 1])
        assert accuracy(model, three_of_four) == 75.0

    def test_tie_at_half_predicts_class_one(self):
        model = manual_model(["F"], [1.0])
        tied = examples_from([[0.0]], [1])
        assert accuracy(model, tied) == 100.0
        tied0 = examples_from([[0.0]], [0])
        assert accuracy(model, tied0) == 0.0


class TestImportanceAndSelection:
    def test_importance_order(self):
        model = manual_model(["A", "B", "C"], [0.5, -0.9, 0.1])
        assert feature_importance(model) == [("B", 0.9), ("A", 0.5), ("C", 0.1)]

    def test_all_zero_ties_break_lexicographically(self):
        model = manual_model(["C", "A", "B"], [0.0, 0.0, 0.0])
        assert feature_importance(model) == [("A", 0.0), ("B", 0.0), ("C", 0.0)]

    def test_threshold_selection(self):
        model = manual_model(["A", "B", "C"], [0.5, 0.44, 0.46])
        assert select_features(model, 0.45) == ["A", "C"]
        assert select_features(model, 0.0) == ["A", "B", "C"]

    def test_selection_monotone_in_threshold(self):
        model = manual_model(["A", "B", "C", "D"], [0.5, -0.44, 0.46, 0.1])
        thresholds = [0.0, 0.1, 0.44, 0.45, 0.46, 0.5, 2.0]
        for t1, t2 in zip(thresholds, thresholds[1:]):
            assert set(select_features(model, t2)) <= set(select_features(model, t1))

    @settings(deadline=None, max_examples=50)
    @given(
        coefs=st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=6),
        threshold=st.floats(0, 3, allow_nan=False),
    )
    def test_selection_threshold_semantics(self, coefs, threshold):
        names = [f"F{i}" for i in range(len(coefs))]
        model = manual_model(names, coefs)
        keep = select_features(model, threshold)
        assert keep == [n for n, c in zip(names, coefs) if abs(c) >= threshold]

    def test_restrict_examples(self):
        exs = examples_from([[1.0, 2.0, 3.0]], [1])
        out = restrict_examples(exs, ["A", "B", "C"], ["C", "A"])
        assert np.array_equal(out[0].x, np.array([3.0, 1.0]))


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(14)
        train = synthetic_examples(200, [0.7, -1.3], rng)
        model = fit(train, 0.01)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.scaler.feature_names == model.scaler.feature_names
        assert np.array_equal(loaded.scaler.means, model.scaler.means)
        assert np.array_equal(loaded.scaler.stds, model.scaler.stds)
        assert np.array_equal(loaded.coefficients, model.coefficients)
        assert loaded.intercept == model.intercept
        assert loaded.lam == model.lam
        assert loaded.fit_meta == model.fit_meta
        save_model(loaded, tmp_path / "model2.json")
        assert (tmp_path / "model.json").read_bytes() == (tmp_path / "model2.json").read_bytes()

    def test_load_rejects_junk(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{}", encoding="utf-8")
        with pytest.raises(DataError, match="format"):
            load_model(path)
        with pytest.raises(DataError, match="not found"):
            load_model(tmp_path / "missing.json")
