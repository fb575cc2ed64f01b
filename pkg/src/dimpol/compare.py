"""Node-wise comparison of two tabular policies.

B is resampled (multilinear) onto A's grid and the absolute control
difference is measured away from the grid boundary, where absorbing-edge
discretization effects dominate.  Deviations are also expressed in units of
A's control resolution (the spacing of its discrete control set).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dims import transforms_for
from .errors import SignatureMismatch
from .policy import TabularPolicy, resample, to_dimensionless

DEFAULT_MARGIN = 0.05
DEFAULT_STEPS = 2.0
MIN_FRACTION = 0.95
MAX_MEAN_STEPS = 0.5


@dataclass(frozen=True)
class Comparison:
    max_abs: float
    mean_abs: float
    resolution: float
    steps: float
    fraction_within: float
    interior_nodes: int
    dimensionless: bool

    @property
    def mean_steps(self) -> float:
        return self.mean_abs / self.resolution

    @property
    def max_steps(self) -> float:
        return self.max_abs / self.resolution

    def passes(self, min_fraction: float = MIN_FRACTION,
               max_mean_steps: float = MAX_MEAN_STEPS) -> bool:
        return self.fraction_within >= min_fraction and self.mean_steps <= max_mean_steps

    def rows(self) -> list[tuple[str, float]]:
        return [("max_abs", self.max_abs), ("mean_abs", self.mean_abs),
                ("resolution", self.resolution), ("max_steps", self.max_steps),
                ("mean_steps", self.mean_steps), ("steps", self.steps),
                ("fraction_within", self.fraction_within),
                ("interior_nodes", float(self.interior_nodes))]

    def summary(self) -> str:
        verdict = "PASS" if self.passes() else "FAIL"
        space = "dimensionless" if self.dimensionless else "dimensional"
        return (f"{space}: max_abs={self.max_abs:.6g} mean_abs={self.mean_abs:.6g} "
                f"mean_steps={self.mean_steps:.4f} "
                f"within_{self.steps:g}_steps={self.fraction_within:.4f} "
                f"nodes={self.interior_nodes} {verdict}")


def nondimensionalize_stored(f: TabularPolicy) -> TabularPolicy:
    """Dimensionless form of a table using the context recorded in its metadata."""
    if f.dimensionless:
        return f
    from .systems import SIGNATURES

    meta = f.meta
    try:
        sig = SIGNATURES[meta["system"]]()
        context = meta["context"]
    except KeyError as exc:
        raise SignatureMismatch(f"policy metadata lacks {exc} needed to nondimensionalize") from None
    return to_dimensionless(f, transforms_for(sig, context))


def interior_mask(f: TabularPolicy, margin: float) -> np.ndarray:
    """Nodes farther than ``margin * span`` from every edge of the box."""
    if not 0 <= margin < 0.5:
        raise ValueError("boundary margin must be in [0, 0.5)")
    masks = []
    for ax in f.axes:
        nodes = ax.nodes()
        pad = margin * ax.span
        masks.append((nodes >= ax.lo + pad - 1e-12 * ax.span)
                     & (nodes <= ax.hi - pad + 1e-12 * ax.span))
    mesh = np.meshgrid(*masks, indexing="ij")
    return np.logical_and.reduce(mesh).ravel()


def compare_policies(a: TabularPolicy, b: TabularPolicy, dimensionless: bool = True,
                     margin: float = DEFAULT_MARGIN, steps: float = DEFAULT_STEPS,
                     resolution: float | None = None) -> Comparison:
    """Compare B against A on A's grid.  Raises SignatureMismatch when the
    tables describe different systems or shapes."""
    sys_a, sys_b = a.meta.get("system"), b.meta.get("system")
    if sys_a != sys_b:
        raise SignatureMismatch(f"cannot compare {sys_a!r} with {sys_b!r} policies")
    if a.n != b.n or a.k != b.k:
        raise SignatureMismatch(f"table shapes differ: {a.n}->{a.k} vs {b.n}->{b.k}")
    if dimensionless:
        a, b = nondimensionalize_stored(a), nondimensionalize_stored(b)
    elif a.dimensionless != b.dimensionless:
        raise SignatureMismatch("one table is dimensionless and the other is not")
    if resolution is None:
        resolution = float(a.meta.get("control_resolution", 0.0))
    if not resolution > 0:
        raise ValueError("control resolution unknown; pass resolution explicitly")
    b_on_a = resample(b, a.axes)
    mask = interior_mask(a, margin)
    diff = np.abs(a.flat_values() - b_on_a.flat_values())[mask]
    diff = diff.max(axis=1) if diff.size else diff.reshape(-1)
    if diff.size == 0:
        raise ValueError("boundary margin leaves no interior nodes")
    tol = steps * resolution * (1 + 1e-9)
    return Comparison(max_abs=float(diff.max()), mean_abs=float(diff.mean()),
                      resolution=resolution, steps=steps,
                      fraction_within=float(np.mean(diff <= tol)),
                      interior_nodes=int(diff.size), dimensionless=dimensionless)
