import math

import numpy as np
import pytest

from ssckit.discrete import (
    quantize_gaussian,
    quantized_joint_pmf,
    quantized_mutual_information,
)
from ssckit.errors import InvalidParameterError, ResourceLimitError
from ssckit.gaussian import SourceModel


def test_two_level_split_at_zero():
    pmf, x_reps, y_reps = quantized_joint_pmf(1.0, 1.0, 1.0, 2)
    assert pmf.sum() == pytest.approx(1.0, abs=1e-9)
    assert pmf.sum(axis=1) == pytest.approx([0.5, 0.5], abs=1e-9)
    assert pmf.sum(axis=0) == pytest.approx([0.5, 0.5], abs=1e-9)
    # symmetric channel: equal diagonal mass, reps mirror around zero
    assert pmf[0, 0] == pytest.approx(pmf[1, 1], abs=1e-10)
    assert x_reps[0] == pytest.approx(-x_reps[1], abs=1e-10)
    assert y_reps[0] == pytest.approx(-y_reps[1], abs=1e-10)


def test_independent_channel_zero_information():
    from ssckit.discrete import mutual_information_bits

    pmf, _, _ = quantized_joint_pmf(2.0, 0.0, 1.0, 8)
    outer = np.outer(pmf.sum(axis=1), pmf.sum(axis=0))
    assert np.allclose(pmf, outer, atol=1e-9)
    assert mutual_information_bits(pmf, (0,), (1,)) == pytest.approx(0.0, abs=1e-8)


def test_monotone_convergence_to_analytic():
    # 16 equiprobable levels resolve ~0.05 bits only at moderate snr
    # (sigma_x2 * trace up to about 2); higher-snr channels need more cells
    sigma_x2, trace = 2.0, 0.75
    analytic = 0.5 * math.log2(1 + sigma_x2 * trace)
    values = [quantized_mutual_information(sigma_x2, trace, levels)
              for levels in (2, 4, 8, 16)]
    for a, b in zip(values, values[1:]):
        assert b >= a - 1e-9
    assert values[-1] <= analytic + 1e-9
    assert analytic - values[-1] <= 0.05


def test_quantize_gaussian_spec():
    model = SourceModel(1.5, (0.9, 1.1, 0.5))
    spec = quantize_gaussian(model, 4, [{1, 2}, {3}])
    assert spec.joint_xy.shape == (4, 4, 4)
    assert spec.joint_xy.sum() == pytest.approx(1.0, abs=1e-9)
    # identity helper layer, constant coarse layer
    assert np.allclose(spec.v_given_x, np.eye(4))
    assert spec.u_size == 1
    # squared-error distortion on cell representatives
    reps = np.asarray(spec.x_values)
    assert spec.distortion[0, 3] == pytest.approx((reps[0] - reps[3]) ** 2)
    # each axis marginal is equiprobable by construction
    for axis in range(3):
        m = spec.joint_xy.sum(axis=tuple(a for a in range(3) if a != axis))
        assert np.allclose(m, 0.25, atol=1e-8)


def test_quantize_gaussian_validation():
    model = SourceModel(1.0, (1.0, 1.0))
    with pytest.raises(InvalidParameterError):
        quantize_gaussian(model, 1, [{1}])
    with pytest.raises(InvalidParameterError):
        quantize_gaussian(model, 4, [{1}, {1, 2}])
    with pytest.raises(InvalidParameterError):
        quantize_gaussian(model, 4, [])
    with pytest.raises(ResourceLimitError):
        quantize_gaussian(SourceModel(1.0, (1.0,) * 6), 16,
                          [{1}, {2}, {3}, {4}, {5}, {6}])
