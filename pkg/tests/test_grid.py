import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimpol.errors import OutOfDomain
from dimpol.grid import Axis, Grid


def _grid():
    return Grid([(-1.0, 2.0, 7), (0.0, 5.0, 11)])


def test_axis_validation():
    with pytest.raises(ValueError, match="grid count must be ≥ 2"):
        Axis(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        Axis(1.0, 1.0, 3)


def test_axis_scaling_flips_on_negative_factor():
    ax, flipped = Axis(-1.0, 3.0, 5).scaled(-2.0)
    assert flipped and (ax.lo, ax.hi) == (-6.0, 2.0)
    ax, flipped = Axis(-1.0, 3.0, 5).scaled(0.5)
    assert not flipped and (ax.lo, ax.hi) == (-0.5, 1.5)


def test_nodes_row_major():
    g = Grid([(0.0, 1.0, 2), (0.0, 2.0, 3)])
    np.testing.assert_array_equal(
        g.nodes(), [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [1, 2]])


def test_node_query_returns_stored_value_exactly():
    g = _grid()
    field = np.random.default_rng(0).normal(size=(g.size, 2))
    out = g.interpolate(field, g.nodes())
    np.testing.assert_array_equal(out, field)


def test_multilinear_reproduces_linear_field():
    g = _grid()
    nodes = g.nodes()
    field = (3.0 * nodes[:, 0] - 0.5 * nodes[:, 1] + 2.0)[:, None]
    ax0, ax1 = g.axes
    centers = np.array([[ax0.lo + 2.5 * ax0.step, ax1.lo + 4.5 * ax1.step]])
    expect = 3.0 * centers[:, 0] - 0.5 * centers[:, 1] + 2.0
    np.testing.assert_allclose(g.interpolate(field, centers)[:, 0], expect, rtol=1e-14)


def test_clamp_projects_onto_box():
    g = _grid()
    nodes = g.nodes()
    field = (nodes[:, 0] * 10 + nodes[:, 1])[:, None]
    beyond = g.interpolate(field, [[5.0, 1.0]])
    edge = g.interpolate(field, [[2.0, 1.0]])
    np.testing.assert_array_equal(beyond, edge)


def test_error_mode_raises_outside():
    g = _grid()
    with pytest.raises(OutOfDomain):
        g.interpolate(np.zeros((g.size, 1)), [[2.5, 1.0]], oob="error")


def test_nearest_mode():
    g = Grid([(0.0, 1.0, 3)])
    field = np.array([[1.0], [2.0], [3.0]])
    out = g.interpolate(field, [[0.2], [0.3], [0.9]], mode="nearest")
    np.testing.assert_array_equal(out[:, 0], [1.0, 2.0, 3.0])


def test_inside_has_round_off_slack():
    g = _grid()
    assert g.inside([[2.0 + 1e-15, 5.0]])[0]
    assert not g.inside([[2.0 + 1e-6, 5.0]])[0]


@settings(max_examples=50, deadline=None)
@given(st.floats(-1.0, 2.0), st.floats(0.0, 5.0))
def test_weights_are_a_partition_of_unity(x, y):
    g = _grid()
    total = sum(w for _, w in g.corner_weights(np.array([[x, y]])))
    assert total[0] == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(-1.0, 2.0), st.floats(0.0, 5.0))
def test_interpolant_within_cell_bounds(x, y):
    g = _grid()
    field = np.random.default_rng(1).normal(size=(g.size, 1))
    v = g.interpolate(field, [[x, y]])[0, 0]
    assert field.min() - 1e-12 <= v <= field.max() + 1e-12
