import json

import numpy as np
import pytest

from mongemmd.errors import InputError
from mongemmd.evaluation import (
    EvalReport,
    TranslationMap,
    evaluate,
    gaussian_optimal_map,
    map_deviation,
    w2_squared_gaussian,
)
from mongemmd.kernel import KernelSpec
from mongemmd.mmd import mmd2_unbiased
from mongemmd.nn import Activation, MlpParams, init_params

GAUSS = KernelSpec(family="gaussian", alpha=1.0)


def identity_params(dim):
    return MlpParams([np.eye(dim)], [np.zeros(dim)], [Activation.IDENTITY])


def shift_params(offset):
    offset = np.asarray(offset, dtype=np.float64)
    d = offset.size
    return MlpParams([np.eye(d)], [offset.copy()], [Activation.IDENTITY])


class TestEvaluate:
    def test_identity_map_statistics(self):
        rng = np.random.default_rng(0)
        src = rng.standard_normal((200, 2))
        tgt = rng.standard_normal((150, 2))
        rep = evaluate(identity_params(2), src, tgt, GAUSS)
        np.testing.assert_allclose(rep.mean, src.mean(axis=0), rtol=1e-13)
        np.testing.assert_allclose(rep.sd, src.std(axis=0, ddof=1),
                                   rtol=1e-13)
        assert rep.transport_cost == 0.0
        assert rep.n == 200
        assert rep.mmd2 == mmd2_unbiased(GAUSS, src, tgt)

    def test_translation_map_cost(self):
        """Shifting by (3, 4) costs exactly 25 per point."""
        rng = np.random.default_rng(1)
        src = rng.standard_normal((50, 2))
        tgt = src + np.array([3.0, 4.0])
        rep = evaluate(shift_params((3.0, 4.0)), src, tgt, GAUSS)
        np.testing.assert_allclose(rep.transport_cost, 25.0, rtol=1e-12)
        # images coincide with targets point-for-point here, so the
        # unbiased statistic should be very slightly negative, never large
        assert rep.mmd2 < 1e-12

    def test_sd_uses_ddof_one(self):
        src = np.array([[0.0], [1.0]])
        tgt = np.array([[0.0], [1.0]])
        rep = evaluate(identity_params(1), src, tgt, GAUSS)
        np.testing.assert_allclose(rep.sd, [np.sqrt(0.5)], rtol=1e-15)

    def test_requires_two_points_each_side(self):
        with pytest.raises(InputError):
            evaluate(identity_params(2), np.zeros((1, 2)), np.zeros((5, 2)),
                     GAUSS)
        with pytest.raises(InputError):
            evaluate(identity_params(2), np.zeros((5, 2)), np.zeros((1, 2)),
                     GAUSS)


class TestEvalReportJson:
    def report(self):
        return EvalReport(mean=np.array([4.9, 5.1]), sd=np.array([1.0, 0.9]),
                          transport_cost=50.5, mmd2=1.25e-3, n=1000)

    def test_key_set(self):
        payload = json.loads(self.report().to_json())
        assert sorted(payload) == ["mean", "mean_pooled", "mmd2", "n", "sd",
                                   "sd_pooled", "transport_cost"]

    def test_pooled_values_average_coordinates(self):
        payload = json.loads(self.report().to_json())
        np.testing.assert_allclose(payload["mean_pooled"], 5.0)
        np.testing.assert_allclose(payload["sd_pooled"], 0.95)

    def test_round_trip(self):
        rep = self.report()
        back = EvalReport.from_json(rep.to_json())
        np.testing.assert_array_equal(back.mean, rep.mean)
        np.testing.assert_array_equal(back.sd, rep.sd)
        assert back.transport_cost == rep.transport_cost
        assert back.mmd2 == rep.mmd2
        assert back.n == rep.n

    def test_deterministic_serialization(self):
        assert self.report().to_json() == self.report().to_json()
        assert self.report().to_json().endswith("\n")

    def test_from_json_rejects_garbage(self):
        with pytest.raises(InputError):
            EvalReport.from_json("{not json")
        with pytest.raises(InputError):
            EvalReport.from_json(json.dumps({"mean": [1.0]}))


class TestGaussianReferences:
    def test_optimal_map_is_the_translation(self):
        ref = gaussian_optimal_map((0.0, 0.0), (5.0, 5.0))
        assert isinstance(ref, TranslationMap)
        X = np.array([[1.0, -2.0], [0.0, 0.0]])
        np.testing.assert_array_equal(ref(X), X + np.array([5.0, 5.0]))

    def test_w2_squared(self):
        assert w2_squared_gaussian((0.0, 0.0), (5.0, 5.0)) == 50.0
        assert w2_squared_gaussian((1.0,), (1.0,)) == 0.0
        assert w2_squared_gaussian((0.0, 0.0, 0.0), (1.0, 2.0, 2.0)) == 9.0

    def test_mean_validation(self):
        with pytest.raises(InputError):
            w2_squared_gaussian((0.0, 0.0), (1.0,))
        with pytest.raises(InputError):
            gaussian_optimal_map((0.0,), (float("nan"),))

    def test_translation_map_dimension_check(self):
        ref = TranslationMap(offset=(1.0, 2.0))
        with pytest.raises(InputError):
            ref(np.zeros((3, 3)))


class TestMapDeviation:
    def test_exact_match_gives_zero(self):
        probe = np.random.default_rng(2).standard_normal((100, 2))
        dev = map_deviation(shift_params((5.0, 5.0)),
                            gaussian_optimal_map((0.0, 0.0), (5.0, 5.0)),
                            probe)
        assert dev == 0.0

    def test_identity_vs_translation_is_offset_norm(self):
        """|x - (x + (3,4))|^2 = 25 for every probe point."""
        probe = np.random.default_rng(3).standard_normal((64, 2))
        dev = map_deviation(identity_params(2),
                            gaussian_optimal_map((0.0, 0.0), (3.0, 4.0)),
                            probe)
        np.testing.assert_allclose(dev, 25.0, rtol=1e-12)

    def test_accepts_any_callable_reference(self):
        probe = np.linspace(0.0, 1.0, 10)[:, None]
        dev = map_deviation(identity_params(1), lambda X: 2.0 * X, probe)
        np.testing.assert_allclose(dev, (probe ** 2).mean(), rtol=1e-12)

    def test_reference_shape_checked(self):
        probe = np.zeros((4, 2))
        with pytest.raises(InputError):
            map_deviation(identity_params(2), lambda X: X[:, :1], probe)
