import numpy as np
import pytest

from mongemmd.data import DatasetSpec, generate
from mongemmd.errors import InputError, NumericError
from mongemmd.kernel import KernelSpec
from mongemmd.loss import monge_mmd_loss
from mongemmd.nn import mlp_forward_batch
from mongemmd.train import (
    LossHistory,
    TrainConfig,
    TrainState,
    epoch_rng,
    init_state,
    train,
)

SMALL = dict(epochs=5, batch_size=10, hidden_widths=(8,), seed=0)


def clouds(n=30, seed_a=1, seed_b=2):
    src = generate(DatasetSpec(family="isotropic_gaussian", n=n, seed=seed_a))
    tgt = generate(DatasetSpec(family="isotropic_gaussian", n=n, seed=seed_b,
                               mean=(2.0, 2.0)))
    return src, tgt


def assert_params_equal(a, b):
    for wa, wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(wa, wb)
    for ba, bb in zip(a.biases, b.biases):
        np.testing.assert_array_equal(ba, bb)


class TestConfigValidation:
    def test_rejects_bad_fields(self):
        with pytest.raises(InputError):
            TrainConfig(epochs=-1, batch_size=10)
        with pytest.raises(InputError):
            TrainConfig(epochs=1, batch_size=1)
        with pytest.raises(InputError):
            TrainConfig(epochs=1, batch_size=10, inv_lambda=-1e-6)
        with pytest.raises(InputError):
            TrainConfig(epochs=1, batch_size=10, hidden_widths=())
        with pytest.raises(InputError):
            TrainConfig(epochs=1, batch_size=10, seed=-3)

    def test_activation_coerced_from_name(self):
        cfg = TrainConfig(epochs=1, batch_size=5, hidden_activation="tanh")
        assert cfg.hidden_activation.value == "tanh"


class TestTrainingLoop:
    def test_zero_epochs_returns_initial_params(self):
        src, tgt = clouds()
        cfg = TrainConfig(epochs=0, batch_size=10, hidden_widths=(8,), seed=4)
        state, history = train(cfg, src, tgt)
        assert len(history) == 0
        assert state.epoch == 0
        assert_params_equal(state.params, init_state(cfg, 2).params)

    def test_history_has_one_row_per_epoch(self):
        src, tgt = clouds()
        state, history = train(TrainConfig(**SMALL), src, tgt)
        assert history.epochs == [1, 2, 3, 4, 5]
        assert len(history.objective) == 5
        assert state.epoch == 5

    def test_objective_decreases_on_easy_problem(self):
        src, tgt = clouds(n=60)
        cfg = TrainConfig(epochs=60, batch_size=20, hidden_widths=(16,),
                          seed=0)
        state, history = train(cfg, src, tgt)
        assert history.objective[-1] < history.objective[0]

    def test_bit_identical_reruns(self):
        src, tgt = clouds()
        cfg = TrainConfig(**SMALL)
        s1, h1 = train(cfg, src, tgt)
        s2, h2 = train(cfg, src, tgt)
        assert_params_equal(s1.params, s2.params)
        assert h1.objective == h2.objective
        assert h1.mmd2 == h2.mmd2
        assert h1.cost == h2.cost

    def test_seed_changes_the_run(self):
        src, tgt = clouds()
        _, h0 = train(TrainConfig(**{**SMALL, "seed": 0}), src, tgt)
        _, h1 = train(TrainConfig(**{**SMALL, "seed": 1}), src, tgt)
        assert h0.objective != h1.objective

    def test_resume_matches_uninterrupted_run(self):
        """Stopping after epoch 3 and resuming gives the exact same state."""
        src, tgt = clouds()
        cfg8 = TrainConfig(**{**SMALL, "epochs": 8})
        full_state, full_hist = train(cfg8, src, tgt)

        cfg3 = TrainConfig(**{**SMALL, "epochs": 3})
        mid_state, first_hist = train(cfg3, src, tgt)
        resumed_state, rest_hist = train(cfg8, src, tgt, state=mid_state)

        assert_params_equal(full_state.params, resumed_state.params)
        assert resumed_state.optimizer.step_count == full_state.optimizer.step_count
        assert first_hist.objective + rest_hist.objective == full_hist.objective
        assert rest_hist.epochs == [4, 5, 6, 7, 8]

    def test_shuffle_off_uses_data_order(self):
        """Without shuffling every epoch sees identical batches, so a single

        epoch's recorded loss equals the direct loss of the first batch
        sequence under the initial parameters."""
        src, tgt = clouds(n=20)
        cfg = TrainConfig(epochs=1, batch_size=20, hidden_widths=(4,),
                          seed=7, shuffle=False)
        state0 = init_state(cfg, 2)
        expected = monge_mmd_loss(state0.params, src, tgt, cfg.kernel,
                                  cfg.inv_lambda)
        _, history = train(cfg, src, tgt)
        assert history.objective[0] == expected.objective

    def test_remainder_points_are_dropped(self):
        """With 25 points and batch 10 only 2 batches run per epoch."""
        src, tgt = clouds(n=25)
        cfg = TrainConfig(epochs=2, batch_size=10, hidden_widths=(4,), seed=0)
        calls = []
        train(cfg, src, tgt, progress=lambda e, v: calls.append(e))
        assert calls == [1, 2]

    def test_unequal_sizes_use_smaller_count(self):
        src = generate(DatasetSpec(family="isotropic_gaussian", n=40, seed=1))
        tgt = generate(DatasetSpec(family="isotropic_gaussian", n=23, seed=2))
        cfg = TrainConfig(epochs=1, batch_size=23, hidden_widths=(4,), seed=0)
        _, history = train(cfg, src, tgt)
        assert len(history) == 1

    def test_progress_callback_sees_history_rows(self):
        src, tgt = clouds()
        seen = []
        _, history = train(TrainConfig(**SMALL), src, tgt,
                           progress=lambda e, v: seen.append((e, v.objective)))
        assert [e for e, _ in seen] == history.epochs
        assert [o for _, o in seen] == history.objective


class TestTrainingErrors:
    def test_batch_size_larger_than_data(self):
        src, tgt = clouds(n=5)
        with pytest.raises(InputError):
            train(TrainConfig(epochs=1, batch_size=10), src, tgt)

    def test_dimension_mismatch(self):
        src = np.zeros((10, 2))
        tgt = np.zeros((10, 3))
        with pytest.raises(InputError):
            train(TrainConfig(epochs=1, batch_size=5), src, tgt)

    def test_state_past_requested_epochs(self):
        src, tgt = clouds()
        cfg = TrainConfig(**SMALL)
        state, _ = train(cfg, src, tgt)
        shorter = TrainConfig(**{**SMALL, "epochs": 3})
        with pytest.raises(InputError):
            train(shorter, src, tgt, state=state)

    @pytest.mark.filterwarnings("ignore:overflow")
    def test_numeric_error_reports_epoch_and_batch(self):
        src, tgt = clouds(n=10)
        cfg = TrainConfig(epochs=1, batch_size=10, hidden_widths=(4,), seed=0)
        with pytest.raises(NumericError, match="epoch 1, batch 0"):
            train(cfg, src * 1e200, tgt)


class TestEpochRng:
    def test_deterministic_per_epoch(self):
        a = epoch_rng(3, 7).permutation(10)
        b = epoch_rng(3, 7).permutation(10)
        np.testing.assert_array_equal(a, b)

    def test_distinct_across_epochs_and_seeds(self):
        perms = {tuple(epoch_rng(s, e).permutation(20))
                 for s in range(3) for e in range(5)}
        assert len(perms) == 15


class TestLossHistory:
    def sample(self):
        hist = LossHistory()
        hist.epochs = [1, 2]
        hist.objective = [0.5, -0.25]
        hist.mmd2 = [0.125, 0.0625]
        hist.cost = [3.0, 2.5]
        return hist

    def test_csv_round_trip_exact(self):
        hist = self.sample()
        hist.objective[0] = 1.0 / 3.0  # not representable in short decimal
        back = LossHistory.from_csv(hist.to_csv())
        assert back.epochs == hist.epochs
        assert back.objective == hist.objective
        assert back.mmd2 == hist.mmd2
        assert back.cost == hist.cost

    def test_csv_header(self):
        assert self.sample().to_csv().splitlines()[0] == "epoch,objective,mmd2,cost"

    def test_from_csv_rejects_wrong_header(self):
        with pytest.raises(InputError):
            LossHistory.from_csv("a,b,c\n1,2,3\n")

    def test_extend_concatenates(self):
        a, b = self.sample(), self.sample()
        a.extend(b)
        assert a.epochs == [1, 2, 1, 2]
        assert len(a) == 4


class TestTrainState:
    def test_init_state_seeding(self):
        cfg = TrainConfig(**SMALL)
        a = init_state(cfg, 2)
        b = init_state(cfg, 2)
        assert_params_equal(a.params, b.params)
        assert isinstance(a, TrainState)
        assert a.epoch == 0
        assert a.optimizer.step_count == 0
        assert a.params.widths == (2, 8, 2)
