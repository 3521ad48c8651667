import numpy as np
import pytest

from prosodia.errors import NumericError, ValidationError
from prosodia.cyclegan import (
    CorpusStats,
    LossWeights,
    TrainSchedule,
    adversarial_loss,
    build_model,
    convert_features,
    convert_utterance,
    cycle_loss,
    identity_loss,
    load_model_checkpoint,
    save_model_checkpoint,
    train,
)
from prosodia.cyclegan.train import LossLog
from prosodia.features import UtteranceFeatures
from prosodia.nn import Tensor
from prosodia.prosody import NormStats, WaveletParams

rng = np.random.default_rng(7)


class TestAdversarialLoss:
    def test_perfect_discriminator_zero_loss(self):
        real = Tensor(np.ones((1, 2, 4)))
        fake = Tensor(np.zeros((1, 2, 4)))
        assert adversarial_loss(real, fake, "discriminator").item() == 0.0

    def test_fooled_discriminator_zero_generator_loss(self):
        fake = Tensor(np.ones((1, 2, 4)))
        assert adversarial_loss(None, fake, "generator").item() == 0.0

    def test_half_scores_give_half_loss(self):
        real = Tensor(np.full((1, 2, 4), 0.5))
        fake = Tensor(np.full((1, 2, 4), 0.5))
        assert adversarial_loss(real, fake, "discriminator").item() == pytest.approx(0.5)

    def test_unknown_side_rejected(self):
        t = Tensor(np.ones(3))
        with pytest.raises(ValidationError):
            adversarial_loss(t, t, "critic")


class TestCycleAndIdentityLosses:
    def test_identity_generators_zero(self):
        x = Tensor(rng.normal(0, 1, (4, 8)))
        y = Tensor(rng.normal(0, 1, (4, 8)))
        assert cycle_loss(x, x, y, y).item() == 0.0
        assert identity_loss(x, x, y, y).item() == 0.0

    def test_unit_offset_gives_unit_loss(self):
        x = Tensor(rng.normal(0, 1, (4, 8)))
        y = Tensor(rng.normal(0, 1, (4, 8)))
        x_off = Tensor(x.values + 1.0)
        assert cycle_loss(x, x_off, y, y).item() == pytest.approx(1.0)
        assert identity_loss(x, x_off, y, y).item() == pytest.approx(1.0)

    def test_nonnegative(self):
        for _ in range(5):
            x = Tensor(rng.normal(0, 1, (3, 6)))
            xc = Tensor(rng.normal(0, 1, (3, 6)))
            y = Tensor(rng.normal(0, 1, (3, 6)))
            yc = Tensor(rng.normal(0, 1, (3, 6)))
            assert cycle_loss(x, xc, y, yc).item() >= 0.0

    def test_shape_mismatch_rejected(self):
        x = Tensor(np.zeros((3, 6)))
        bad = Tensor(np.zeros((3, 7)))
        with pytest.raises(ValidationError):
            cycle_loss(x, bad, x, x)


class TestSchedule:
    def test_learning_rate_law(self):
        sched = TrainSchedule(total_iters=100, constant_lr_iters=60, decay_iters=40, lr_g=1e-3)
        for t in (1, 30, 60):
            assert sched.learning_rate(1e-3, t) == 1e-3
        for t in (61, 80, 99, 100):
            expected = 1e-3 * (1.0 - (t - 60) / 40)
            assert sched.learning_rate(1e-3, t) == pytest.approx(expected, abs=1e-18)
        assert sched.learning_rate(1e-3, 100) == 0.0

    def test_inconsistent_totals_rejected(self):
        with pytest.raises(ValidationError):
            TrainSchedule(total_iters=10, constant_lr_iters=6, decay_iters=5)

    def test_weights_validation(self):
        with pytest.raises(ValidationError):
            LossWeights(lambda_cyc=-1.0)


def tiny_feature_sets(channels, n_utts=2, frames=48, seed=0):
    r = np.random.default_rng(seed)
    return [r.normal(0, 1, (channels, frames)) for _ in range(n_utts)]


def tiny_model(mode="prosody-separate", seed=0):
    return build_model(mode, base_channels=2, n_residual=1, seed=seed)


def tiny_schedule(total=12, seed=0, segment=16):
    return TrainSchedule(
        total_iters=total,
        constant_lr_iters=total // 2,
        decay_iters=total - total // 2,
        segment_frames=segment,
        seed=seed,
    )


class TestTraining:
    def test_loss_log_bookkeeping(self):
        model = tiny_model()
        xs, ys = tiny_feature_sets(10, seed=1), tiny_feature_sets(10, seed=2)
        _, log = train(model, xs, ys, LossWeights(), tiny_schedule(total=12))
        assert len(log.rows) == 12
        arr = np.asarray(log.rows)
        assert np.isfinite(arr).all()
        assert arr[0, 0] == 1 and arr[-1, 0] == 12

    def test_identity_cutoff_reflected_in_log(self):
        model = tiny_model(seed=3)
        xs, ys = tiny_feature_sets(10, seed=1), tiny_feature_sets(10, seed=2)
        weights = LossWeights(lambda_cyc=10, lambda_id=5, id_cutoff_iters=5)
        _, log = train(model, xs, ys, weights, tiny_schedule(total=10))
        id_col = [row[5] for row in log.rows]
        assert all(v > 0 for v in id_col[:4])
        assert all(v == 0.0 for v in id_col[4:])

    def test_deterministic_given_seed(self):
        def run():
            model = tiny_model(seed=4)
            xs, ys = tiny_feature_sets(10, seed=5), tiny_feature_sets(10, seed=6)
            model, log = train(model, xs, ys, LossWeights(), tiny_schedule(total=8, seed=9))
            return log, model.g_xy["in.w"].values.copy()

        log1, w1 = run()
        log2, w2 = run()
        assert log1.rows == log2.rows
        assert np.array_equal(w1, w2)

    def test_dimension_mismatch_rejected(self):
        model = tiny_model()
        with pytest.raises(ValidationError):
            train(model, tiny_feature_sets(24), tiny_feature_sets(10),
                  LossWeights(), tiny_schedule())

    def test_empty_sets_rejected(self):
        model = tiny_model()
        with pytest.raises(ValidationError):
            train(model, [], tiny_feature_sets(10), LossWeights(), tiny_schedule())

    def test_loss_log_csv_roundtrip(self, tmp_path):
        model = tiny_model(seed=11)
        xs, ys = tiny_feature_sets(10, seed=1), tiny_feature_sets(10, seed=2)
        _, log = train(model, xs, ys, LossWeights(), tiny_schedule(total=6))
        path = tmp_path / "losslog.csv"
        log.to_csv(path)
        assert path.read_text().splitlines()[0] == "iter,lr,adv_g,adv_d,cyc,id"
        back = LossLog.from_csv(path)
        np.testing.assert_allclose(np.asarray(back.rows), np.asarray(log.rows), rtol=1e-10)


def smooth_signals(r, channels, frames, count):
    """Rank-one smooth feature maps: channels are scaled copies of one latent."""
    t = np.arange(frames)
    weights = np.linspace(1.0, 0.2, channels)
    out = []
    for _ in range(count):
        z = np.zeros(frames)
        for period in (16.0, 24.0, 40.0):
            z += r.uniform(0.5, 1.0) * np.cos(2 * np.pi * t / period + r.uniform(0, 2 * np.pi))
        out.append(np.outer(weights, z))
    return out


class TestToyAffineEfficacy:
    def test_cycle_loss_decreases_on_learnable_task(self):
        # Ratio frozen from pre-build runs: on a smooth low-rank source
        # distribution whose target is an elementwise affine copy, this
        # config reached a late/early cycle-loss ratio of 0.284; asserted
        # at 0.5 for headroom.
        r = np.random.default_rng(42)
        xs = smooth_signals(r, 10, 64, 3)
        ys = [2.0 * f + 0.5 for f in smooth_signals(r, 10, 64, 3)]
        model = build_model("prosody-separate", base_channels=16, n_residual=2, seed=1)
        sched = TrainSchedule(
            total_iters=500, constant_lr_iters=250, decay_iters=250,
            segment_frames=32, seed=3,
        )
        _, log = train(model, xs, ys, LossWeights(id_cutoff_iters=125), sched)
        early = np.mean([row[4] for row in log.rows[5:15]])
        late = np.mean([row[4] for row in log.rows[-10:]])
        assert late < 0.5 * early


class TestConvertFeatures:
    def test_shape_contract_and_input_untouched(self):
        model = tiny_model(seed=2)
        feats = rng.normal(0, 1, (10, 37))
        copy = feats.copy()
        out = convert_features(model, feats, "forward")
        assert out.shape == (10, 37)
        np.testing.assert_array_equal(feats, copy)

    def test_single_frame_input(self):
        model = tiny_model(seed=2)
        out = convert_features(model, rng.normal(0, 1, (10, 1)), "forward")
        assert out.shape == (10, 1)

    def test_bad_direction_rejected(self):
        model = tiny_model()
        with pytest.raises(ValidationError):
            convert_features(model, np.zeros((10, 8)), "sideways")

    def test_channel_mismatch_rejected(self):
        model = tiny_model()
        with pytest.raises(ValidationError):
            convert_features(model, np.zeros((24, 8)), "forward")


class _IdentityModel:
    """Stand-in with the conversion interface of a trained model."""

    mode = "prosody-separate"

    def convert(self, features, direction="forward"):
        return np.asarray(features, dtype=np.float64).copy()


class _IdentitySpectrumModel(_IdentityModel):
    mode = "spectrum-separate"


def synthetic_utterance(seed=0, n=512):
    r = np.random.default_rng(seed)
    t = np.arange(n)
    contour = np.zeros(n)
    for period in (64.0, 76.0, 90.0):
        contour += np.cos(2 * np.pi * t / period + r.uniform(0, 2 * np.pi))
    contour = (contour - contour.mean()) / contour.std()
    f0 = np.exp(5.3 + 0.2 * contour)
    mask = np.ones(n, dtype=bool)
    mask[100:110] = False
    mask[300:307] = False
    f0 = np.where(mask, f0, 0.0)
    return UtteranceFeatures(
        utterance_id=f"s{seed}",
        emotion_label="A",
        frame_period_ms=5.0,
        mceps=r.normal(0, 1, (24, n)).astype(np.float32),
        f0_hz=f0.astype(np.float32),
    )


class TestConvertUtterance:
    def test_identity_models_preserve_contour_shape(self):
        # With pass-through generators the only distortion is the wavelet
        # round trip; correlation threshold frozen from the transform
        # calibration (>= 0.90 on voiced frames).
        utt = synthetic_utterance(seed=1)
        contour = np.log(utt.f0_hz[utt.f0_hz > 0])
        stats = NormStats(mean=float(contour.mean()), std=float(contour.std()))
        out = convert_utterance(
            utt,
            spectrum_model=_IdentitySpectrumModel(),
            prosody_model=_IdentityModel(),
            target_stats=stats,
            stats_policy="source",
        )
        assert out.n_frames == utt.n_frames
        assert out.frame_period_ms == utt.frame_period_ms
        voiced = utt.voicing_mask
        corr = np.corrcoef(
            np.log(out.f0_hz[voiced].astype(np.float64)),
            np.log(utt.f0_hz[voiced].astype(np.float64)),
        )[0, 1]
        assert corr >= 0.90
        np.testing.assert_allclose(out.mceps, utt.mceps, atol=1e-6)

    def test_voicing_mask_reapplied(self):
        utt = synthetic_utterance(seed=2)
        stats = NormStats(mean=5.5, std=0.2)
        out = convert_utterance(
            utt,
            spectrum_model=_IdentitySpectrumModel(),
            prosody_model=_IdentityModel(),
            target_stats=stats,
            stats_policy="target",
        )
        np.testing.assert_array_equal(out.f0_hz == 0.0, utt.f0_hz == 0.0)

    def test_joint_model_stacks_and_unstacks(self):
        class JointProbe(_IdentityModel):
            mode = "joint"
            seen = None

            def convert(self, features, direction="forward"):
                JointProbe.seen = np.asarray(features).shape
                return np.asarray(features, dtype=np.float64).copy()

        utt = synthetic_utterance(seed=3)
        stats = NormStats(mean=5.5, std=0.2)
        out = convert_utterance(
            utt, joint_model=JointProbe(), target_stats=stats, stats_policy="target"
        )
        assert JointProbe.seen == (34, utt.n_frames)
        assert out.mceps.shape == (24, utt.n_frames)

    def test_model_combination_validated(self):
        utt = synthetic_utterance(seed=4)
        stats = NormStats(mean=5.5, std=0.2)
        with pytest.raises(ValidationError):
            convert_utterance(utt, target_stats=stats, prosody_model=_IdentityModel())
        with pytest.raises(ValidationError):
            convert_utterance(
                utt,
                target_stats=stats,
                joint_model=_IdentityModel(),  # wrong mode attribute
            )

    def test_stats_policy_target_imposes_target_register(self):
        utt = synthetic_utterance(seed=5)
        stats = NormStats(mean=np.log(300.0), std=0.1)
        out = convert_utterance(
            utt,
            spectrum_model=_IdentitySpectrumModel(),
            prosody_model=_IdentityModel(),
            target_stats=stats,
            stats_policy="target",
        )
        voiced_log = np.log(out.f0_hz[out.f0_hz > 0].astype(np.float64))
        assert abs(voiced_log.mean() - np.log(300.0)) < 0.05


class TestCheckpointDirectory:
    def test_save_load_roundtrip(self, tmp_path):
        model = tiny_model(seed=6)
        xs, ys = tiny_feature_sets(10, seed=1), tiny_feature_sets(10, seed=2)
        model, _ = train(model, xs, ys, LossWeights(), tiny_schedule(total=4))
        weights = LossWeights()
        sched = tiny_schedule(total=4)
        stats = CorpusStats(
            source_emotion="A",
            target_emotion="B",
            source_log_f0=NormStats(5.2, 0.2),
            target_log_f0=NormStats(5.6, 0.25),
        )
        save_model_checkpoint(tmp_path, model, weights, sched, stats, WaveletParams())
        for fname in ("g_xy.prm1", "g_yx.prm1", "d_x.prm1", "d_y.prm1", "metadata.json"):
            assert (tmp_path / fname).exists()
        loaded = load_model_checkpoint(tmp_path)
        assert loaded.model.mode == model.mode
        assert loaded.stats.target_emotion == "B"
        for name in model.g_xy.names():
            np.testing.assert_array_equal(
                loaded.model.g_xy[name].values, model.g_xy[name].values
            )
        feats = rng.normal(0, 1, (10, 20))
        np.testing.assert_allclose(
            loaded.model.convert(feats, "forward"), model.convert(feats, "forward"),
            atol=1e-12,
        )

    def test_missing_store_rejected(self, tmp_path):
        model = tiny_model(seed=6)
        stats = CorpusStats("A", "B", NormStats(5.2, 0.2), NormStats(5.6, 0.25))
        save_model_checkpoint(
            tmp_path, model, LossWeights(), tiny_schedule(total=4), stats, WaveletParams()
        )
        (tmp_path / "d_y.prm1").unlink()
        with pytest.raises(ValidationError, match="d_y"):
            load_model_checkpoint(tmp_path)


class TestNonFiniteAbort:
    def test_training_abort_reports_iteration(self):
        model = tiny_model(seed=8)
        # a learning rate near the f64 overflow range forces the squared
        # generator outputs past inf within two iterations
        sched = TrainSchedule(
            total_iters=30, constant_lr_iters=15, decay_iters=15,
            lr_g=1e200, lr_d=1e200, segment_frames=16, seed=0,
        )
        xs, ys = tiny_feature_sets(10, seed=1), tiny_feature_sets(10, seed=2)
        with np.errstate(all="ignore"), pytest.raises(NumericError, match="iteration"):
            train(model, xs, ys, LossWeights(), sched)
