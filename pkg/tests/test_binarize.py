import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from asofs.binarize import FlipMode, FlipPolicy, TransferKind, apply_flip, transfer
from asofs.errors import ConfigError

S, V = TransferKind.S_SHAPED, TransferKind.V_SHAPED
FIXED = FlipPolicy()
SAMPLED = FlipPolicy(FlipMode.SAMPLED)

velocities = arrays(np.float64, st.integers(1, 40),
                    elements=st.floats(-50, 50, allow_nan=False, allow_subnormal=True))


def test_transfer_values():
    assert transfer(S, 0.0) == 0.5
    assert transfer(V, 0.0) == 0.0
    assert transfer(V, 1.0) == pytest.approx(0.761594155955765, rel=1e-14)
    assert transfer(S, 2.0) == pytest.approx(0.880797077977882, rel=1e-14)


def test_transfer_no_overflow():
    out = transfer(S, np.array([-800.0, 800.0]))
    np.testing.assert_array_equal(out, [0.0, 1.0])


@given(st.floats(-30, 30))
def test_transfer_ranges(v):
    assert 0 < transfer(S, v) < 1 or abs(v) > 30
    assert 0 <= transfer(V, v) <= 1


def test_fixed_threshold_examples():
    v_hi = math.atanh(0.9)   # V transfer value 0.9
    v_lo = math.atanh(0.3)   # V transfer value 0.3
    out = apply_flip([True, True], [v_hi, v_lo], V, FIXED)
    np.testing.assert_array_equal(out, [False, True])
    # S(0) is exactly the threshold: strict comparison keeps the bit
    np.testing.assert_array_equal(apply_flip([True], [0.0], S, FIXED), [True])


@given(velocities)
def test_s_fixed_flips_positive_velocity(v):
    mask = np.arange(len(v)) % 3 == 0
    out = apply_flip(mask, v, S, FIXED)
    np.testing.assert_array_equal(out != mask, v > 0)


@given(velocities)
def test_v_fixed_flips_large_magnitude(v):
    mask = np.arange(len(v)) % 2 == 0
    out = apply_flip(mask, v, V, FIXED)
    np.testing.assert_array_equal(out != mask, np.abs(v) > np.arctanh(0.5))


def test_zero_velocity_never_flips():
    mask = np.array([1, 0, 1, 1, 0], dtype=bool)
    for kind in (S, V):
        np.testing.assert_array_equal(apply_flip(mask, np.zeros(5), kind, FIXED), mask)
    rng = np.random.default_rng(0)
    for _ in range(50):
        np.testing.assert_array_equal(apply_flip(mask, np.zeros(5), V, SAMPLED, rng), mask)


@pytest.mark.parametrize("kind,v", [(S, 0.7), (S, -1.3), (V, 0.4), (V, -2.0)])
def test_sampled_frequency(kind, v):
    rng = np.random.default_rng(42)
    n = 10_000
    out = apply_flip(np.zeros(n, dtype=bool), np.full(n, v), kind, SAMPLED, rng)
    assert abs(out.mean() - transfer(kind, v)) <= 0.02


def test_length_preserved_and_shape_check():
    assert apply_flip([0, 1, 1], [1.0, -1.0, 3.0], V, FIXED).shape == (3,)
    with pytest.raises(ValueError):
        apply_flip([0, 1], [1.0], S, FIXED)


def test_sampled_needs_rng():
    with pytest.raises(ValueError):
        apply_flip([0], [1.0], S, SAMPLED)


def test_policy_validation():
    with pytest.raises(ConfigError):
        FlipPolicy(fixed_value=1.5)
    assert FlipPolicy("sampled").mode is FlipMode.SAMPLED
