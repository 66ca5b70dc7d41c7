import struct

import numpy as np
import pytest

import sparsecode as sc
from sparsecode import container
from sparsecode.errors import ParameterError


def _small_encoder(seed=0):
    return sc.build_expansion(sc.gaussian(3, sigma=0.7), 5, seed=seed)


class TestHeaderLayout:
    def test_magic_and_fixed_fields(self, tmp_path):
        theta = _small_encoder(seed=9)
        path = tmp_path / "enc.easp"
        container.save(path, theta, k=2)
        raw = path.read_bytes()
        assert raw[:5] == b"EASP1"
        assert raw[5] == 1                      # format version
        assert raw[6] == 1                      # gaussian
        assert raw[7] == 0                      # no manifold
        d, m, k, d_o = struct.unpack_from("<IIII", raw, 8)
        assert (d, m, k, d_o) == (3, 5, 2, 0)
        (sigma,) = struct.unpack_from("<d", raw, 24)
        assert sigma == 0.7
        (seed,) = struct.unpack_from("<Q", raw, 32)
        assert seed == 9
        assert len(raw) == 64 + 5 * 3 * 8

    def test_rows_are_row_major_float64(self, tmp_path):
        theta = _small_encoder()
        path = tmp_path / "enc.easp"
        container.save(path, theta)
        raw = path.read_bytes()
        rows = np.frombuffer(raw[64:], dtype="<f8").reshape(5, 3)
        assert np.array_equal(rows, theta.rows)


class TestRoundTrip:
    def test_encoder_only(self, tmp_path):
        theta = _small_encoder(seed=4)
        path = tmp_path / "enc.easp"
        container.save(path, theta, k=3)
        box = container.load(path)
        assert np.array_equal(box.rows, theta.rows)
        assert box.dist == theta.dist
        assert box.seed == 4 and box.k == 3
        assert box.tau is None and box.weights is None
        assert isinstance(box.to_sparsifier(), sc.KWinners)

    def test_with_thresholds(self, tmp_path):
        theta = _small_encoder(seed=5)
        man = sc.full_sphere(3)
        tau = sc.calibrate_thresholds(theta, man, k=2, n_cal=200, seed=6)
        path = tmp_path / "enc.easp"
        container.save(path, theta, k=2, tau=tau)
        box = container.load(path)
        assert np.array_equal(box.tau, tau.tau)
        sparsifier = box.to_sparsifier()
        assert isinstance(sparsifier, sc.ThresholdVector)
        assert sparsifier.target_rate == 2 / 5
        assert sparsifier.calibration_sample_size == 200

    def test_full_model_roundtrip(self, tmp_path):
        theta = sc.build_expansion(sc.gaussian(4, sigma=0.5), 8, seed=7)
        man = sc.circle(4)
        tau = sc.calibrate_thresholds(theta, man, k=2, n_cal=400, seed=8)
        model = sc.learn_weights(
            theta, tau, sc.triangular(1.0), man, n_train=300, seed=9,
            crit=sc.reach_band(man),
        )
        path = tmp_path / "model.easp"
        container.save_model(path, model)
        box = container.load(path)
        loaded = box.to_model()
        assert np.array_equal(loaded.weights, model.weights)
        assert np.array_equal(loaded.counts, model.counts)
        assert np.array_equal(loaded.good_mask, model.good_mask)
        assert loaded.scheme == "threshold"
        x = man.sample(1, np.random.default_rng(1))[0]
        assert loaded.predict(x) == model.predict(x)

    def test_data_attuned_manifold_restored(self, tmp_path):
        man = sc.sub_sphere(5, 2)
        theta = sc.build_expansion(sc.data_attuned(man), 6, seed=10)
        path = tmp_path / "enc.easp"
        container.save(path, theta, k=1)
        box = container.load(path)
        assert box.dist.kind == "data_attuned"
        assert box.dist.manifold == man

    def test_rewrite_is_byte_identical(self, tmp_path):
        theta = _small_encoder(seed=11)
        a, b = tmp_path / "a.easp", tmp_path / "b.easp"
        container.save(a, theta, k=2)
        container.save(b, theta, k=2)
        assert a.read_bytes() == b.read_bytes()


class TestBadInput:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.easp"
        path.write_bytes(b"NOPE!" + bytes(64))
        with pytest.raises(ParameterError, match="magic"):
            container.load(path)

    def test_truncated(self, tmp_path):
        theta = _small_encoder()
        path = tmp_path / "enc.easp"
        container.save(path, theta)
        path.write_bytes(path.read_bytes()[:70])
        with pytest.raises(ParameterError, match="truncated"):
            container.load(path)

    def test_missing_model(self, tmp_path):
        theta = _small_encoder()
        path = tmp_path / "enc.easp"
        container.save(path, theta)
        with pytest.raises(ParameterError, match="model"):
            container.load(path).to_model()
