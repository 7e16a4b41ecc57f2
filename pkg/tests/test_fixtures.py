import math

import numpy as np
import pytest

from blsnav import fixtures as fx
from blsnav.errors import ConfigurationError
from blsnav.linalg import svd
from blsnav.mapnet import LeakyRelu, Linear, PixelNorm, Tanh, jacobian, network_to_dict


def test_depth_one_jacobian_is_weight():
    net = fx.gen_mapping_network(fx.FixtureConfig(dim=5, depth=1, seed=2))
    assert len(net.layers) == 1
    np.testing.assert_array_equal(jacobian(net, np.ones(5)), net.layers[0].weight)


def test_layer_structure():
    net = fx.gen_mapping_network(fx.FixtureConfig(dim=4, depth=3, use_pixel_norm=True))
    kinds = [type(layer) for layer in net.layers]
    assert kinds == [PixelNorm, Linear, LeakyRelu, Linear, LeakyRelu, Linear]
    assert net.layers[1].weight.shape == (16, 4)
    assert net.layers[-1].weight.shape == (4, 16)
    tanh = fx.gen_mapping_network(fx.FixtureConfig(dim=4, depth=2, activation="tanh", hidden_dim=6))
    assert [type(layer) for layer in tanh.layers] == [Linear, Tanh, Linear]


def test_seed_determinism():
    a = fx.gen_mapping_network(fx.FixtureConfig(seed=42))
    b = fx.gen_mapping_network(fx.FixtureConfig(seed=42))
    c = fx.gen_mapping_network(fx.FixtureConfig(seed=43))
    assert network_to_dict(a) == network_to_dict(b)
    assert network_to_dict(a) != network_to_dict(c)


def test_init_scale():
    net = fx.gen_mapping_network(fx.FixtureConfig(dim=64, depth=2, seed=0))
    w = net.layers[0].weight
    assert w.std() == pytest.approx(math.sqrt(2.0 / 64), rel=0.05)


def test_jacobian_well_conditioned_across_seeds():
    for seed in range(100):
        net = fx.gen_mapping_network(fx.FixtureConfig(seed=seed))
        sigma = svd(jacobian(net, np.zeros(16))).sigma
        assert np.all(np.isfinite(sigma))
        assert np.all(sigma > 0.0)


def test_sample_statistics():
    rng = fx.make_rng(1, 2)
    z = np.array([fx.sample_z(16, rng) for _ in range(5000)])
    assert abs(z.mean()) < 5.0 / math.sqrt(z.size)
    assert z.var() == pytest.approx(1.0, rel=0.03)
    ds = np.array([fx.sample_direction(16, rng) for _ in range(2000)])
    np.testing.assert_allclose(np.linalg.norm(ds, axis=1), 1.0, rtol=1e-15)
    # isotropy: mean of a unit vector on the sphere is 0 with per-coordinate variance 1/n
    assert np.all(np.abs(ds.mean(axis=0)) < 5.0 / math.sqrt(16 * 2000))


def test_streams_are_independent_and_reproducible():
    a = fx.make_rng(5, 0).standard_normal(4)
    assert np.array_equal(a, fx.make_rng(5, 0).standard_normal(4))
    assert not np.array_equal(a, fx.make_rng(5, 1).standard_normal(4))
    assert not np.array_equal(a, fx.make_rng(6, 0).standard_normal(4))
    assert fx.step_seed(0, 3) == fx.step_seed(0, 3) != fx.step_seed(0, 4)


def test_extractor_and_scorer_shapes():
    cfg = fx.FixtureConfig(dim=6, seed=1)
    ext = fx.gen_feature_extractor(cfg)
    assert (ext.input_dim, ext.output_dim) == (6, 6)
    assert fx.gen_feature_extractor(cfg, out_dim=3).output_dim == 3
    assert fx.gen_scorer(cfg).output_dim == 1


def test_config_dict_round_trip():
    cfg = fx.FixtureConfig(dim=8, depth=2, activation="tanh", use_pixel_norm=True, seed=2**63)
    assert fx.FixtureConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize(
    "kwargs",
    [dict(dim=1), dict(depth=0), dict(activation="relu"), dict(seed=-1), dict(seed=2**64), dict(hidden_dim=0)],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        fx.FixtureConfig(**kwargs)


def test_unknown_config_field():
    with pytest.raises(ConfigurationError):
        fx.FixtureConfig.from_dict({"dim": 4, "width": 8})
