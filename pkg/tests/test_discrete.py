import math

import numpy as np
import pytest

from ssckit.access import threshold_structure
from ssckit.discrete import (
    DiscreteSourceSpec,
    binary_symmetric_spec,
    entropy_bits,
    marginal,
    mutual_information_bits,
    rate_region_discrete,
)
from ssckit.errors import InvalidParameterError


def h2(p):
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_entropy_basics():
    assert entropy_bits(np.array([0.5, 0.5])) == pytest.approx(1.0)
    assert entropy_bits(np.array([1.0, 0.0])) == 0.0
    assert entropy_bits(np.full(8, 1 / 8)) == pytest.approx(3.0)


def test_marginal_reorders_axes():
    rng = np.random.default_rng(0)
    t = rng.random((2, 3, 4))
    t /= t.sum()
    swapped = marginal(t, (2, 0))
    direct = t.sum(axis=1).T
    assert np.allclose(swapped, direct)


def test_mutual_information_independent_and_chain():
    px = np.array([0.3, 0.7])
    py = np.array([0.6, 0.4])
    joint = np.outer(px, py)
    assert mutual_information_bits(joint, (0,), (1,)) == pytest.approx(0.0, abs=1e-12)

    spec = binary_symmetric_spec(num_users=1, y_flip=0.1, v_flip=0.2)
    joint_full = spec.full_joint()
    ax, av = spec.axis_x(), spec.axis_v()
    assert mutual_information_bits(joint_full, (av,), (ax,)) == pytest.approx(
        1 - h2(0.2), abs=1e-9)
    # helper chain: V depends on Y only through X
    i_vy = mutual_information_bits(joint_full, (av,), (1,))
    flip_vy = 0.2 * 0.9 + 0.8 * 0.1
    assert i_vy == pytest.approx(1 - h2(flip_vy), abs=1e-9)
    assert mutual_information_bits(joint_full, (av,), (1,), (ax,)) == \
        pytest.approx(0.0, abs=1e-9)


def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        DiscreteSourceSpec(
            joint_xy=np.array([[0.6, 0.6], [0.0, 0.0]]),
            v_given_x=np.eye(2), u_given_v=np.eye(2),
            distortion=1 - np.eye(2))
    with pytest.raises(InvalidParameterError):
        DiscreteSourceSpec(
            joint_xy=np.full((2, 2), 0.25),
            v_given_x=np.array([[0.5, 0.4], [0.5, 0.5]]),
            u_given_v=np.eye(2), distortion=1 - np.eye(2))


def test_binary_spec_shapes_and_mass():
    spec = binary_symmetric_spec(num_users=3, y_flip=0.25, v_flip=0.2)
    assert spec.num_users == 3
    assert spec.joint_xy.shape == (2, 2, 2, 2)
    assert spec.full_joint().sum() == pytest.approx(1.0, abs=1e-12)
    assert spec.d_max == 1.0


def test_bayes_reconstruction_noiseless():
    # noiseless observation: the estimate equals y whatever the helper says
    spec = binary_symmetric_spec(num_users=1, y_flip=0.0, v_flip=0.2)
    table = spec.reconstruction_for({1})
    for v in range(2):
        for y in range(2):
            assert table[v, y] == y
    assert spec.expected_distortion({1}) == pytest.approx(0.0, abs=1e-12)


def test_bayes_reconstruction_prefers_strong_observation():
    spec = binary_symmetric_spec(num_users=2, y_flip=0.1, v_flip=0.25)
    table = spec.reconstruction_for({1, 2})
    # agreeing observations outvote the helper; ties follow the helper
    assert table[0, 1, 1] == 1 and table[1, 0, 0] == 0
    assert table[0, 0, 1] == 0 and table[0, 1, 0] == 0
    assert table[1, 0, 1] == 1 and table[1, 1, 0] == 1
    expected = 0.1 ** 2 + 2 * 0.1 * 0.9 * 0.25
    assert spec.expected_distortion({1, 2}) == pytest.approx(expected, abs=1e-9)
    structure = threshold_structure(2, 2)
    assert spec.target_distortion(structure) == pytest.approx(expected, abs=1e-9)


def test_explicit_reconstruction_table_wins():
    spec = binary_symmetric_spec(num_users=1, y_flip=0.1, v_flip=0.2)
    constant = {frozenset({1}): np.zeros((2, 2), dtype=int)}
    override = DiscreteSourceSpec(
        joint_xy=spec.joint_xy, v_given_x=spec.v_given_x,
        u_given_v=spec.u_given_v, distortion=spec.distortion,
        reconstructions=constant)
    assert np.all(override.reconstruction_for({1}) == 0)
    assert override.expected_distortion({1}) == pytest.approx(0.5)


def test_rate_region_v_independent_of_x():
    spec = binary_symmetric_spec(num_users=2, y_flip=0.2, v_flip=0.5,
                                 u_equals_v=False)
    bounds = rate_region_discrete(spec, threshold_structure(2, 2))
    assert bounds.rate_bound == pytest.approx(0.0, abs=1e-9)
    assert bounds.leakage_bound == pytest.approx(1 - h2(0.2), abs=1e-9)


def test_rate_region_u_equals_v_identity():
    spec = binary_symmetric_spec(num_users=2, y_flip=0.1, v_flip=0.25,
                                 u_equals_v=True)
    structure = threshold_structure(2, 2)
    bounds = rate_region_discrete(spec, structure)
    joint = spec.full_joint()
    ax, av = spec.axis_x(), spec.axis_v()
    i_vx = mutual_information_bits(joint, (av,), (ax,))
    i_xy_given_v = mutual_information_bits(joint, (ax,), (1,), (av,))
    assert bounds.leakage_bound == pytest.approx(i_vx + i_xy_given_v, abs=1e-9)
    assert bounds.min_i_v_ya_given_u == pytest.approx(0.0, abs=1e-12)
    assert bounds.i_v_x_given_u == pytest.approx(0.0, abs=1e-12)


def test_rate_region_u_constant_matches_conditional_form():
    spec = binary_symmetric_spec(num_users=2, y_flip=0.15, v_flip=0.2,
                                 u_equals_v=False)
    structure = threshold_structure(2, 2)
    bounds = rate_region_discrete(spec, structure)
    joint = spec.full_joint()
    ax, av = spec.axis_x(), spec.axis_v()
    expected = max(
        mutual_information_bits(joint, (av,), (ax,), spec.axes_y({1, 2}))
        + mutual_information_bits(joint, (ax,), spec.axes_y({b}))
        for b in (1, 2))
    assert bounds.leakage_bound == pytest.approx(expected, abs=1e-9)
    assert bounds.rate_bound == pytest.approx(
        mutual_information_bits(joint, (av,), (ax,), spec.axes_y({1, 2})),
        abs=1e-9)


def test_reduced_bounds_equal_pre_reduction_system():
    rng = np.random.default_rng(5)
    for _ in range(40):
        num_users = int(rng.integers(1, 4))
        joint = rng.random((2,) + (2,) * num_users)
        joint /= joint.sum()
        v_given_x = rng.random((2, 2)) + 0.05
        v_given_x /= v_given_x.sum(axis=1, keepdims=True)
        u_given_v = rng.random((2, 2)) + 0.05
        u_given_v /= u_given_v.sum(axis=1, keepdims=True)
        spec = DiscreteSourceSpec(joint_xy=joint, v_given_x=v_given_x,
                                  u_given_v=u_given_v,
                                  distortion=1 - np.eye(2))
        t = int(rng.integers(1, num_users + 1))
        bounds = rate_region_discrete(spec, threshold_structure(num_users, t))
        assert bounds.rate_bound <= bounds.pre_reduction_rate + 1e-9
        assert bounds.leakage_bound <= bounds.pre_reduction_leakage + 1e-9
        assert bounds.rate_bound == pytest.approx(bounds.pre_reduction_rate,
                                                  abs=1e-9)
        assert bounds.leakage_bound == pytest.approx(
            bounds.pre_reduction_leakage, abs=1e-9)


def mi_direct(joint2d):
    # direct double-sum definition, independent of the entropy composition
    p = np.asarray(joint2d, dtype=float)
    pa = p.sum(axis=1, keepdims=True)
    pb = p.sum(axis=0, keepdims=True)
    mask = p > 0
    return float((p[mask] * np.log2(p[mask] / (pa * pb + 1e-300)[mask])).sum())


def test_mutual_information_matches_direct_definition():
    rng = np.random.default_rng(9)
    for _ in range(30):
        shape = (int(rng.integers(2, 5)), int(rng.integers(2, 5)),
                 int(rng.integers(2, 4)))
        joint = rng.random(shape)
        joint /= joint.sum()
        # I(axis0; axis1) marginalizing axis2
        two_d = joint.sum(axis=2)
        assert mutual_information_bits(joint, (0,), (1,)) == pytest.approx(
            mi_direct(two_d), abs=1e-10)
        # conditional: I(axis0; axis1 | axis2) as weighted slice-wise MI
        expected = sum(
            joint[:, :, c].sum() * mi_direct(joint[:, :, c] / joint[:, :, c].sum())
            for c in range(shape[2]))
        assert mutual_information_bits(joint, (0,), (1,), (2,)) == \
            pytest.approx(expected, abs=1e-10)


def test_spec_json_round_trip():
    spec = binary_symmetric_spec(num_users=2, y_flip=0.1, v_flip=0.25)
    spec.reconstruction_for({1, 2})
    data = spec.to_dict()
    back = DiscreteSourceSpec.from_dict(data)
    assert np.allclose(back.joint_xy, spec.joint_xy)
    assert np.allclose(back.v_given_x, spec.v_given_x)
    assert back.y_sizes == spec.y_sizes
    with pytest.raises(InvalidParameterError):
        DiscreteSourceSpec.from_dict({"x_size": 2})
