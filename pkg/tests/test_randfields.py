import numpy as np

from vacns.grid import Grid
from vacns.randfields import (audit_field, band_limited_field, splitmix64,
                              uniform)


def test_splitmix64_reference_values():
    # splitmix64 with initial state 0: first three outputs of the reference
    # implementation (state advances by the golden-ratio increment)
    out = splitmix64(0, np.arange(3))
    assert out[0] == np.uint64(0xE220A8397B1DCDAF)
    assert out[1] == np.uint64(0x6E789E6AA1B965F4)
    assert out[2] == np.uint64(0x06C45D188009454F)


def test_uniform_range_and_determinism():
    u1 = uniform(42, np.arange(1000))
    u2 = uniform(42, np.arange(1000))
    assert np.array_equal(u1, u2)
    assert np.all((u1 >= 0.0) & (u1 < 1.0))
    assert abs(u1.mean() - 0.5) < 0.05
    assert not np.array_equal(u1, uniform(43, np.arange(1000)))


def test_counter_addressing_is_positional():
    # field i depends only on (seed, i), not on what was generated before
    g = Grid.periodic(2, 8)
    f5_direct = band_limited_field(g, 7, 5)
    for i in range(5):
        band_limited_field(g, 7, i)
    assert np.array_equal(f5_direct, band_limited_field(g, 7, 5))


def test_fields_differ_across_index_and_seed():
    g = Grid.periodic(2, 12)
    a = band_limited_field(g, 0, 0)
    b = band_limited_field(g, 0, 1)
    c = band_limited_field(g, 1, 0)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all(np.isfinite(a))


def test_audit_field_fixed_envelope():
    # audit fields share the spectral envelope: their L2 norms cluster tightly
    g = Grid.periodic(3, 12)
    norms = [g.norm(audit_field(g, 0, i), 2) for i in range(20)]
    assert max(norms) / min(norms) < 1.3
