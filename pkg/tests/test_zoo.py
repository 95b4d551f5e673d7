from __future__ import annotations

import numpy as np
import pytest

from hemadx import zoo
from hemadx.errors import AssetError

from helpers import finite_difference_head_check, softmax_rows_ok

# Exact structural contracts: (total, trainable, frozen), no tolerance.
TRANSFER_AUDITS = {
    "mobilenet": (3_429_572, 200_708, 3_228_864),
    "resnet50": (23_989_124, 401_412, 23_587_712),
    "vgg19": (20_124_740, 100_356, 20_024_384),
}

# Derived layer-by-layer for the documented convnet config:
#   conv 32: 32*(3*3*3)+32            =     896
#   conv 64: 64*(3*3*32)+64           =  18,496
#   conv 128: 128*(3*3*64)+128        =  73,856
#   conv 256: 256*(3*3*128)+256       = 295,168
#   dense: (28*28*256)*4 + 4          = 802,820
CONVNET_TOTAL = 896 + 18_496 + 73_856 + 295_168 + (28 * 28 * 256 * 4 + 4)


@pytest.fixture
def built(all_graphs):
    return all_graphs


class TestParameterAudits:
    @pytest.mark.parametrize("name", sorted(TRANSFER_AUDITS))
    def test_transfer_counts_exact(self, built, name):
        audit = zoo.audit_parameters(built[name])
        assert (audit.total, audit.trainable, audit.frozen) == TRANSFER_AUDITS[name]

    def test_convnet_fully_trainable(self, built):
        audit = zoo.audit_parameters(built["convnet"])
        assert audit.frozen == 0
        assert audit.total == CONVNET_TOTAL == 1_191_236

    def test_total_is_trainable_plus_frozen(self, built):
        for graph in built.values():
            audit = zoo.audit_parameters(graph)
            assert audit.total - audit.trainable == audit.frozen

    def test_mobilenet_head_arithmetic(self):
        # 7x7x1024 flatten into a 4-unit dense layer
        assert 7 * 7 * 1024 * 4 + 4 == TRANSFER_AUDITS["mobilenet"][1]

    def test_resnet50_head_arithmetic(self):
        assert 7 * 7 * 2048 * 4 + 4 == TRANSFER_AUDITS["resnet50"][1]

    def test_vgg19_head_arithmetic(self):
        assert 7 * 7 * 512 * 4 + 4 == TRANSFER_AUDITS["vgg19"][1]


class TestLayerTallies:
    def test_convnet_tally(self, built):
        tally = zoo.layer_kind_tally(built["convnet"])
        assert tally == {"conv": 4, "pool": 3, "dropout": 2, "flatten": 1, "dense": 1}
        assert len(built["convnet"].spec.layer_summary) == 11

    def test_vgg19_tally(self, built):
        tally = zoo.layer_kind_tally(built["vgg19"])
        assert tally["conv"] == 16
        assert tally["pool"] == 5
        assert tally["flatten"] == 1
        assert tally["dense"] == 1

    def test_backbone_frozen_flags(self, built):
        assert built["convnet"].spec.backbone_frozen is False
        for name in TRANSFER_AUDITS:
            assert built[name].spec.backbone_frozen is True


class TestForwardContract:
    @pytest.mark.parametrize("name", zoo.ARCH_ORDER)
    def test_softmax_rows(self, built, name):
        assert softmax_rows_ok(built[name], batch=3, seed=1)

    def test_zero_batch_rows_sum_to_one(self, built):
        probabilities = built["mobilenet"].forward(np.zeros((2, 224, 224, 3), np.float32))
        assert probabilities.shape == (2, 4)
        assert np.allclose(probabilities.sum(axis=1), 1.0, atol=1e-6)


class TestFreezeDiscipline:
    def test_backbone_unchanged_by_training_step(self, built):
        import keras
        import tensorflow as tf

        graph = built["mobilenet"]
        backbone_before = [np.asarray(w).copy() for w in graph.model.non_trainable_weights]
        head_before = [np.asarray(w).copy() for w in graph.model.trainable_weights]

        rng = np.random.default_rng(0)
        x = tf.constant(rng.uniform(0, 1, (4, 224, 224, 3)).astype(np.float32))
        y = tf.constant(np.eye(4, dtype=np.float32)[rng.integers(0, 4, 4)])
        optimizer = keras.optimizers.Adam(1e-3)
        with tf.GradientTape() as tape:
            loss = tf.reduce_mean(keras.losses.categorical_crossentropy(y, graph.model(x, training=True)))
        gradients = tape.gradient(loss, graph.model.trainable_variables)
        optimizer.apply_gradients(zip(gradients, graph.model.trainable_variables))

        backbone_after = [np.asarray(w) for w in graph.model.non_trainable_weights]
        head_after = [np.asarray(w) for w in graph.model.trainable_weights]
        assert all(np.array_equal(a, b) for a, b in zip(backbone_before, backbone_after))
        assert any(not np.array_equal(a, b) for a, b in zip(head_before, head_after))


class TestHeadGradients:
    @pytest.mark.parametrize("name", ["convnet", "mobilenet"])
    def test_finite_differences_match(self, built, name):
        finite_difference_head_check(built[name], n_weights=5, batch=2, seed=2)


class TestAssets:
    def test_missing_weights_file_is_asset_error(self):
        with pytest.raises(AssetError):
            zoo.build_mobilenet_head(pretrained=True, weights_path="/nonexistent/backbone.h5")

    def test_unknown_architecture(self):
        with pytest.raises(ValueError):
            zoo.build_model("alexnet")
