import math
import pickle

import numpy as np
import pytest

from dimpol.analytic import lqr_law
from dimpol.dims import transforms_for
from dimpol.errors import NotSimilar, OutOfDomain
from dimpol.policy import (DimensionlessPolicy, TabularPolicy, evaluate, from_dimensionless,
                           resample, to_dimensionless, transfer, transfer_law)
from dimpol.systems import PENDULUM_CONTEXTS, PendulumModel, pendulum_signature

SQ10 = math.sqrt(10.0)


def _st(key):
    return PendulumModel(PENDULUM_CONTEXTS[key]).transforms


def _table(key, fn=None, count=(9, 13)):
    """A pendulum-domain table filled with a smooth function of the state."""
    model = PendulumModel(PENDULUM_CONTEXTS[key])
    axes = tuple((lo, hi, c) for (lo, hi), c in zip(model.domain(), count))
    fn = fn or (lambda th, thd: np.sin(th) + 0.3 * thd)
    mesh = np.meshgrid(*[np.linspace(*a) for a in axes], indexing="ij")
    return TabularPolicy(axes=axes, values=fn(*mesh),
                         meta={"system": "pendulum", "context": model.context,
                               "control_resolution": 0.2})


def test_table_validation():
    with pytest.raises(ValueError):
        TabularPolicy(axes=((0, 1, 3),), values=np.zeros(4))
    with pytest.raises(ValueError):
        TabularPolicy(axes=((0, 1, 2),), values=[0.0, np.nan])
    with pytest.raises(ValueError):
        TabularPolicy(axes=((0, 1, 2),), values=[0.0, 1.0], interp="cubic")


def test_table_is_immutable():
    f = _table("a")
    with pytest.raises(ValueError):
        f.values[0, 0, 0] = 1.0
    with pytest.raises(TypeError):
        f.meta["system"] = "car"


def test_evaluate_single_and_batch():
    f = _table("a")
    x = np.array([0.3, -1.0])
    assert evaluate(f, x).shape == (1,)
    assert evaluate(f, x[None, :]).shape == (1, 1)
    with pytest.raises(ValueError):
        evaluate(f, [1.0, 2.0, 3.0])


def test_error_mode():
    f = TabularPolicy(axes=((0, 1, 2),), values=[0.0, 1.0], oob="error")
    with pytest.raises(OutOfDomain):
        f([2.0])


def test_to_dimensionless_context_a():
    f = _table("a")
    fs = to_dimensionless(f, _st("a"))
    assert isinstance(fs, DimensionlessPolicy)
    ax = fs.axes[1]
    assert (ax.lo, ax.hi) == pytest.approx((-math.pi, math.pi), rel=1e-15)
    np.testing.assert_allclose(fs.values, f.values / 10.0, rtol=1e-15)
    assert fs.c_star == pytest.approx((0.1, 0.5))
    assert fs.meta["control_resolution"] == pytest.approx(0.02)


def test_identity_transforms_leave_table_unchanged():
    st = transforms_for(pendulum_signature(), (1.0, 1.0, 0.1, 0.5))
    f = _table("a")
    fs = to_dimensionless(f, st)
    np.testing.assert_array_equal(fs.values, f.values)
    assert fs.axes == f.axes


def test_constant_policy_scales_to_constant():
    f = _table("a", fn=lambda th, thd: np.full_like(th, 5.0))
    fs = to_dimensionless(f, _st("a"))
    np.testing.assert_allclose(fs.values, 0.5, rtol=1e-15)


def test_round_trip_through_dimensionless():
    f = _table("b")
    back = from_dimensionless(to_dimensionless(f, _st("b")), _st("b"))
    np.testing.assert_allclose(back.values, f.values, rtol=1e-12)
    for a, b in zip(back.axes, f.axes):
        assert (a.lo, a.hi, a.count) == pytest.approx((b.lo, b.hi, b.count), rel=1e-12)
    assert back.meta["approximate"] is False


def test_redimensionalize_at_b():
    f = _table("a")
    fb = from_dimensionless(to_dimensionless(f, _st("a")), _st("b"))
    omega_b = math.sqrt(5.0)
    assert fb.axes[1].hi == pytest.approx(math.pi * omega_b, rel=1e-14)
    np.testing.assert_allclose(fb.values, f.values / 10.0 * 20.0, rtol=1e-14)


def test_from_dimensionless_refuses_dissimilar():
    fs = to_dimensionless(_table("a"), _st("a"))
    with pytest.raises(NotSimilar) as err:
        from_dimensionless(fs, _st("g"))
    assert err.value.c_star_a == pytest.approx((0.1, 0.5))
    forced = from_dimensionless(fs, _st("g"), force=True)
    assert forced.meta["approximate"] is True


def test_transfer_a_to_b_scales():
    f = _table("a")
    fb = transfer(f, _st("a"), _st("b"))
    np.testing.assert_allclose(fb.values, 2.0 * f.values, rtol=1e-15)
    # f_b(theta, theta_dot) = 2 f_a(theta, sqrt(2) theta_dot)
    pts = np.array([[0.3, -1.1], [-2.0, 4.0], [1.0, 0.0]])
    scaled = pts * [1.0, math.sqrt(2.0)]
    np.testing.assert_allclose(fb(pts), 2.0 * f(scaled), rtol=1e-12)
    assert fb.meta["transferred_from"] == PendulumModel(PENDULUM_CONTEXTS["a"]).context


def test_transfer_to_self_is_bit_identical():
    f = _table("a")
    ff = transfer(f, _st("a"), _st("a"))
    np.testing.assert_array_equal(ff.values, f.values)
    assert ff.axes == f.axes


def test_transfer_dissimilar_raises():
    with pytest.raises(NotSimilar):
        transfer(_table("a"), _st("a"), _st("g"))


def test_transfer_of_lqr_law_matches_direct_substitution():
    f_a, f_b = lqr_law(PENDULUM_CONTEXTS["a"]), lqr_law(PENDULUM_CONTEXTS["b"])
    g = transfer_law(f_a, f_b.transforms)
    x = np.array([[0.1, 0.2], [-1.0, 3.0], [2.5, -4.0]])
    np.testing.assert_allclose(g(x), f_b(x), rtol=1e-12)


def test_table_transfer_agrees_with_analytic_transfer():
    """Tabulate the LQR law of c_a, transfer the table, compare with c_b's law."""
    law_a, law_b = lqr_law(PENDULUM_CONTEXTS["a"]), lqr_law(PENDULUM_CONTEXTS["b"])
    f = _table("a", count=(21, 21))
    f = TabularPolicy(axes=f.axes, values=law_a(f.grid.nodes()).reshape(21, 21, 1))
    fb = transfer(f, _st("a"), _st("b"))
    nodes = fb.grid.nodes()
    np.testing.assert_allclose(fb(nodes), law_b(nodes), rtol=1e-12, atol=1e-12)


def test_resample_onto_same_grid_is_identity():
    f = _table("a")
    r = resample(f, f.axes)
    np.testing.assert_array_equal(r.values, f.values)


def test_pickle_round_trip():
    f = to_dimensionless(_table("a"), _st("a"))
    g = pickle.loads(pickle.dumps(f))
    assert isinstance(g, DimensionlessPolicy) and g.c_star == f.c_star
    np.testing.assert_array_equal(g.values, f.values)
    assert dict(g.meta) == dict(f.meta)
