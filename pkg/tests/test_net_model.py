"""Layer shapes, reuse factors, and reuse priority orders."""

import pytest

from dramtile.net_model import (IFM, OFM, WGH, LayerShape, NetworkModel,
                                output_dims, reuse_factors,
                                reuse_priority_order)


def conv(name="l", **kw):
    args = dict(kind="conv", H=8, W=8, I=4, P=3, Q=3, J=4, stride=1)
    args.update(kw)
    return LayerShape(name=name, **args)


VGG_CONV1 = conv("conv1", H=224, W=224, I=3, J=64)
VGG_FC1 = LayerShape(name="fc1", kind="fc", H=1, W=1, I=25088,
                     P=1, Q=1, J=4096)


class TestOutputDims:
    def test_vgg_conv1(self):
        assert output_dims(VGG_CONV1) == (222, 222)

    def test_fc_collapses(self):
        assert output_dims(VGG_FC1) == (1, 1)

    def test_strided(self):
        layer = conv(H=7, W=7, P=3, Q=3, stride=2)
        assert output_dims(layer)[0] == 3  # ceil(5/2)


class TestReuseFactors:
    def test_vgg_conv1(self):
        rf = reuse_factors(VGG_CONV1)
        assert (rf.rf_ifm, rf.rf_wgh, rf.rf_ofm) == (576, 49284, 27)

    def test_vgg_fc1(self):
        rf = reuse_factors(VGG_FC1)
        assert (rf.rf_ifm, rf.rf_wgh, rf.rf_ofm) == (4096, 1, 25088)

    def test_degenerate(self):
        layer = conv(H=1, W=1, I=1, P=1, Q=1, J=1)
        rf = reuse_factors(layer)
        assert (rf.rf_ifm, rf.rf_wgh, rf.rf_ofm) == (1, 1, 1)

    def test_depthwise_ignores_channel_fanout(self):
        dw = conv(kind="depthwise-conv", H=8, W=8, I=16, J=16)
        rf = reuse_factors(dw)
        assert rf.rf_ifm == 9  # P*Q only: each channel feeds one filter
        assert rf.rf_ofm == 9


class TestReusePriorityOrder:
    def test_vgg_conv1(self):
        assert reuse_priority_order(VGG_CONV1).order == (WGH, IFM, OFM)

    def test_vgg_fc1(self):
        assert reuse_priority_order(VGG_FC1).order == (OFM, IFM, WGH)

    def test_tie_break(self):
        layer = conv(H=1, W=1, I=1, P=1, Q=1, J=1)
        assert reuse_priority_order(layer).order == (IFM, WGH, OFM)


class TestValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            conv(kind="pool")

    def test_filter_larger_than_ifmap(self):
        with pytest.raises(ValueError):
            conv(H=2, W=2, P=3, Q=3)

    def test_fc_needs_unit_spatial(self):
        with pytest.raises(ValueError):
            LayerShape(name="bad", kind="fc", H=2, W=1, I=4, P=1, Q=1, J=4)

    def test_network_needs_layers(self):
        with pytest.raises(ValueError):
            NetworkModel(name="empty", layers=())
