import numpy as np
import pytest

from prosodia.errors import NumericError, ValidationError
from prosodia.prosody import (
    denormalize_log_f0,
    interpolate_unvoiced,
    normalize_log_f0,
    preprocess_f0,
)


class TestInterpolateUnvoiced:
    def test_interior_gap_linear(self):
        continuous, mask = interpolate_unvoiced([100.0, 0.0, 0.0, 200.0])
        np.testing.assert_allclose(continuous, [100.0, 400 / 3, 500 / 3, 200.0])
        assert mask.tolist() == [True, False, False, True]

    def test_edge_extension(self):
        continuous, mask = interpolate_unvoiced([0.0, 0.0, 150.0, 0.0])
        np.testing.assert_allclose(continuous, [150.0, 150.0, 150.0, 150.0])
        assert mask.tolist() == [False, False, True, False]

    def test_all_unvoiced_rejected(self):
        with pytest.raises(ValidationError, match="voiced"):
            interpolate_unvoiced([0.0, 0.0, 0.0])

    def test_all_voiced_identity(self):
        f0 = np.array([120.0, 130.0, 125.0, 140.0])
        continuous, mask = interpolate_unvoiced(f0)
        np.testing.assert_array_equal(continuous, f0)
        assert mask.all()


class TestNormalizeLogF0:
    def test_two_point_hand_values(self):
        out = normalize_log_f0([np.e**4, np.e**6])
        np.testing.assert_allclose(out.values, [-1.0, 1.0], atol=1e-12)
        assert abs(out.stats.mean - 5.0) < 1e-12
        assert abs(out.stats.std - 1.0) < 1e-12

    def test_output_zero_mean_unit_variance(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            hz = np.exp(rng.normal(5.2, 0.3, size=rng.integers(2, 200)))
            out = normalize_log_f0(hz)
            assert abs(out.values.mean()) < 1e-12
            assert abs(out.values.std() - 1.0) < 1e-9

    def test_constant_rejected(self):
        with pytest.raises(NumericError, match="degenerate"):
            normalize_log_f0([100.0, 100.0, 100.0])

    def test_nonpositive_rejected(self):
        with pytest.raises(ValidationError):
            normalize_log_f0([100.0, 0.0, 120.0])


class TestDenormalizeLogF0:
    def test_inverse_of_normalize(self):
        rng = np.random.default_rng(1)
        hz = np.exp(rng.normal(5.0, 0.25, size=64))
        out = normalize_log_f0(hz)
        back = denormalize_log_f0(out.values, out.stats, np.ones(64, dtype=bool))
        np.testing.assert_allclose(back, hz, rtol=1e-9)

    def test_zero_values_reconstruct_mean(self):
        from prosodia.prosody import NormStats

        stats = NormStats(mean=np.log(200.0), std=1.0)
        out = denormalize_log_f0(np.zeros(5), stats, np.ones(5, dtype=bool))
        np.testing.assert_allclose(out, 200.0, rtol=1e-12)

    def test_unvoiced_positions_exactly_zero(self):
        from prosodia.prosody import NormStats

        mask = np.array([True, False, True, False])
        out = denormalize_log_f0(
            np.zeros(4), NormStats(mean=5.0, std=1.0), mask
        )
        assert out[1] == 0.0 and out[3] == 0.0
        assert (out[[0, 2]] > 0).all()

    def test_length_mismatch_rejected(self):
        from prosodia.prosody import NormStats

        with pytest.raises(ValidationError):
            denormalize_log_f0(np.zeros(4), NormStats(0.0, 1.0), np.ones(3, dtype=bool))


def test_preprocess_pipeline_combines_stages():
    f0 = np.array([0.0, 180.0, 0.0, 0.0, 220.0, 210.0, 0.0])
    contour = preprocess_f0(f0)
    assert contour.values.shape == (7,)
    assert abs(contour.values.mean()) < 1e-12
    assert contour.voicing_mask.tolist() == [False, True, False, False, True, True, False]
