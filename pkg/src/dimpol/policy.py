"""Feedback-law containers and exact transfer between similar contexts.

A feedback law maps states to control inputs for one fixed context.  The
tabular form stores it on a regular state grid.  Because all scalings are
diagonal, nondimensionalizing or transferring a table only rescales its
axis bounds and its stored values; nothing is resampled.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .dims import ScalingTransforms, _close, is_similar
from .errors import NotSimilar
from .grid import Axis, Grid, as_axes

INTERP_MODES = ("nearest", "multilinear")
OOB_MODES = ("clamp", "error")

# Relative tolerance on c* for exact transfer; floats cannot match exactly.
SIMILARITY_RTOL = 1e-9


def _rebuild(cls, fields):
    return cls(**fields)


@dataclass(frozen=True, eq=False)
class TabularPolicy:
    """Look-up table of control vectors on a uniform state grid.

    ``values`` has shape ``(*counts, k)``.  ``meta`` carries context
    information (system name, context values, c*, ...) and is read-only.
    """

    axes: tuple[Axis, ...]
    values: np.ndarray
    interp: str = "multilinear"
    oob: str = "clamp"
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        axes = as_axes(self.axes)
        object.__setattr__(self, "axes", axes)
        vals = np.array(self.values, dtype=float)
        shape = tuple(a.count for a in axes)
        if vals.shape == shape:
            vals = vals[..., None]
        if vals.shape[:-1] != shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("policy values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.interp not in INTERP_MODES:
            raise ValueError(f"interp must be one of {INTERP_MODES}")
        if self.oob not in OOB_MODES:
            raise ValueError(f"oob must be one of {OOB_MODES}")
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))
        object.__setattr__(self, "_grid", Grid(axes))

    @property
    def grid(self) -> Grid:
        return self._grid

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def k(self) -> int:
        return self.values.shape[-1]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    @property
    def dimensionless(self) -> bool:
        return False

    def flat_values(self) -> np.ndarray:
        return self.values.reshape(-1, self.k)

    def __call__(self, x):
        return evaluate(self, x)

    def __reduce__(self):
        fields = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        fields["meta"] = dict(self.meta)
        return _rebuild, (type(self), fields)

    def with_meta(self, **updates) -> "TabularPolicy":
        meta = dict(self.meta)
        meta.update(updates)
        return replace(self, meta=meta)


@dataclass(frozen=True, eq=False)
class DimensionlessPolicy(TabularPolicy):
    """Tabular law whose axes and values are Pi-group quantities."""

    c_star: tuple[float, ...] = ()

    @property
    def dimensionless(self) -> bool:
        return True


@dataclass(frozen=True)
class FunctionLaw:
    """Analytic feedback law ``func(x) -> u`` with its home-context transforms.

    ``func`` takes an array of shape (N, n) and returns shape (N, k).
    """

    func: Callable[[np.ndarray], np.ndarray]
    transforms: ScalingTransforms

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        out = np.asarray(self.func(np.atleast_2d(x)), dtype=float)
        if out.ndim == 1:
            out = out[:, None]
        return out[0] if single else out


def evaluate(f: TabularPolicy, x) -> np.ndarray:
    """Interpolated control for one state (shape (n,)) or many (N, n)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.shape[-1] != f.n:
        raise ValueError(f"expected {f.n} state components, got {pts.shape[-1]}")
    out = f.grid.interpolate(f.flat_values(), pts, mode=f.interp, oob=f.oob)
    return out[0] if single else out


def _scale_table(f: TabularPolicy, axis_scale, value_scale):
    axes = []
    vals = np.array(f.values)
    for i, (ax, s) in enumerate(zip(f.axes, axis_scale)):
        new_ax, flipped = ax.scaled(float(s))
        axes.append(new_ax)
        if flipped:
            vals = np.flip(vals, axis=i)
    vals = vals * np.asarray(value_scale, dtype=float)
    return tuple(axes), vals


def _check_transforms(f: TabularPolicy, st: ScalingTransforms):
    if len(st.t_x) != f.n or len(st.t_u) != f.k:
        raise ValueError(
            f"transforms for {len(st.t_x)} states/{len(st.t_u)} inputs do not fit a "
            f"{f.n}-state/{f.k}-input table")


def to_dimensionless(f: TabularPolicy, st: ScalingTransforms) -> DimensionlessPolicy:
    """Restate a law from its home context in Pi-group coordinates."""
    _check_transforms(f, st)
    axes, vals = _scale_table(f, st.t_x, st.t_u)
    meta = dict(f.meta)
    meta.update(dimensionless=True, c_star=st.c_star, source_context=st.context,
                signature=st.signature.name)
    if "control_resolution" in meta:
        meta["control_resolution"] = float(meta["control_resolution"]) * abs(st.t_u[0])
    return DimensionlessPolicy(axes=axes, values=vals, interp=f.interp, oob=f.oob,
                               meta=meta, c_star=st.c_star)


def _c_star_matches(a, b, rel_tol) -> bool:
    return len(a) == len(b) and all(_close(x, y, rel_tol) for x, y in zip(a, b))


def from_dimensionless(fstar: DimensionlessPolicy, st: ScalingTransforms, force: bool = False,
                       rel_tol: float = SIMILARITY_RTOL) -> TabularPolicy:
    """Scale a dimensionless law back to the context described by ``st``.

    Refuses (NotSimilar) when ``st``'s c* differs from the table's, unless
    ``force`` is set, in which case the result is tagged approximate.
    """
    _check_transforms(fstar, st)
    target = st.c_star
    similar = _c_star_matches(fstar.c_star, target, rel_tol)
    if not similar and not force:
        raise NotSimilar(f"dimensionless contexts differ: {fstar.c_star} vs {target}",
                         fstar.c_star, target)
    axes, vals = _scale_table(fstar, [1.0 / t for t in st.t_x], [1.0 / t for t in st.t_u])
    meta = dict(fstar.meta)
    meta.update(dimensionless=False, context=st.context, c_star=target,
                approximate=bool(meta.get("approximate", False)) or not similar)
    meta.pop("source_context", None)
    if "control_resolution" in meta:
        meta["control_resolution"] = float(meta["control_resolution"]) / abs(st.t_u[0])
    return TabularPolicy(axes=axes, values=vals, interp=fstar.interp, oob=fstar.oob, meta=meta)


def transfer(f_a: TabularPolicy, st_a: ScalingTransforms, st_b: ScalingTransforms,
             rel_tol: float = SIMILARITY_RTOL) -> TabularPolicy:
    """Exact transfer of a table from context a to a similar context b.

    ``f_b(x) = (t_u,a / t_u,b) f_a((t_x,b / t_x,a) x)``; the returned grid is
    f_a's grid mapped by ``t_x,a / t_x,b`` so no resampling happens.
    """
    _check_transforms(f_a, st_a)
    if not is_similar(st_a, st_b, rel_tol):
        raise NotSimilar(f"contexts are not similar: c*_a={st_a.c_star}, c*_b={st_b.c_star}",
                         st_a.c_star, st_b.c_star)
    axis_scale = [ta / tb for ta, tb in zip(st_a.t_x, st_b.t_x)]
    value_scale = [ta / tb for ta, tb in zip(st_a.t_u, st_b.t_u)]
    axes, vals = _scale_table(f_a, axis_scale, value_scale)
    meta = dict(f_a.meta)
    meta.update(context=st_b.context, c_star=st_b.c_star, transferred_from=st_a.context)
    if "control_resolution" in meta:
        meta["control_resolution"] = float(meta["control_resolution"]) * abs(value_scale[0])
    return TabularPolicy(axes=axes, values=vals, interp=f_a.interp, oob=f_a.oob, meta=meta)


def law_to_dimensionless(f: FunctionLaw) -> Callable[[np.ndarray], np.ndarray]:
    """``f*(x*) = T_u f(T_x^-1 x*)`` for an analytic law."""
    st = f.transforms
    t_u, t_x = np.asarray(st.t_u), np.asarray(st.t_x)
    return lambda x_star: t_u * f(np.asarray(x_star, dtype=float) / t_x)


def transfer_law(f_a: FunctionLaw, st_b: ScalingTransforms,
                 rel_tol: float = SIMILARITY_RTOL) -> FunctionLaw:
    """Scale an analytic (or any black-box) law to a similar context b."""
    st_a = f_a.transforms
    if not is_similar(st_a, st_b, rel_tol):
        raise NotSimilar(f"contexts are not similar: c*_a={st_a.c_star}, c*_b={st_b.c_star}",
                         st_a.c_star, st_b.c_star)
    out_scale = np.asarray(st_a.t_u) / np.asarray(st_b.t_u)
    in_scale = np.asarray(st_b.t_x) / np.asarray(st_a.t_x)

    def f_b(x):
        return out_scale * f_a(np.asarray(x, dtype=float) * in_scale)

    return FunctionLaw(f_b, st_b)


def resample(f: TabularPolicy, axes, interp: str = "multilinear") -> TabularPolicy:
    """Evaluate ``f`` on the nodes of another grid (clamping outside its box)."""
    grid = Grid(axes)
    src = replace(f, interp=interp, oob="clamp")
    vals = evaluate(src, grid.nodes()).reshape(grid.shape + (f.k,))
    return replace(f, axes=grid.axes, values=vals)
