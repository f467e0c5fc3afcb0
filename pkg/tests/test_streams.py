import numpy as np

from twirllab.streams import RngStream


def test_named_streams_are_deterministic():
    a = RngStream.named(42, "alpha").normal(16)
    b = RngStream.named(42, "alpha").normal(16)
    assert np.array_equal(a, b)


def test_named_streams_separate_by_name_and_seed():
    base = RngStream.named(42, "alpha").normal(16)
    assert not np.array_equal(base, RngStream.named(42, "beta").normal(16))
    assert not np.array_equal(base, RngStream.named(43, "alpha").normal(16))


def test_substreams_are_deterministic_and_distinct():
    root = RngStream.named(7, "root")
    a = root.substream(3).normal(8)
    b = RngStream.named(7, "root").substream(3).normal(8)
    c = root.substream(4).normal(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_substream_does_not_advance_parent():
    root = RngStream.named(7, "root")
    _ = root.substream(0).normal(8)
    _ = root.substream(1).normal(8)
    direct = RngStream.named(7, "root").normal(8)
    assert np.array_equal(root.normal(8), direct)


def test_integers_respect_bounds():
    vals = RngStream.named(0, "ints").integers(0, 10, size=1000)
    assert vals.min() >= 0 and vals.max() < 10
