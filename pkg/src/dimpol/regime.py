"""Regimes of the pendulum swing-up solution.

``R* = τ*_max / q*`` separates a bang-bang regime (small R*), where only
τ*_max matters, from an unconstrained regime (large R*), where only q*
matters.  Inside either regime the similarity condition needs only the one
relevant dimensionless context variable to match.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dims import ScalingTransforms, _close, is_similar
from .errors import OutOfDomain, SignatureMismatch
from .policy import DimensionlessPolicy, evaluate, to_dimensionless

BANG_BANG = "bang_bang"
TRANSITION = "transition"
UNCONSTRAINED = "unconstrained"

BANG_BANG_MAX_R = 0.1
UNCONSTRAINED_MIN_R = 10.0
SATURATION_TOL = 1e-3

# fraction of a slice that must sit on (or off) the torque limit for the
# observed-behaviour label
OBSERVED_SATURATED = 0.9
OBSERVED_FREE = 0.1

DEFAULT_TAU_MAX_STARS = (0.1, 0.2, 0.3, 0.5, 1.0, 2.5, 5.0)   # at q* = 0.5
DEFAULT_Q_STARS = (0.05, 0.1, 0.5, 1.0, 2.0)                  # at tau_max* = 0.5


@dataclass(frozen=True)
class RegimeReport:
    q_star: float
    tau_max_star: float
    r_star: float
    saturation_fraction: float
    classification: str
    observed: str


def slice_policy(fstar: DimensionlessPolicy, theta_dot_star: float = 0.0,
                 theta_range: tuple[float, float] = (-math.pi, math.pi)):
    """Profile τ*(θ) along ``θ'* = theta_dot_star`` at the table's θ nodes."""
    ax_theta, ax_rate = fstar.axes[0], fstar.axes[1]
    slack = 1e-12 * ax_rate.span
    if not ax_rate.lo - slack <= theta_dot_star <= ax_rate.hi + slack:
        raise OutOfDomain(f"θ'* = {theta_dot_star} outside [{ax_rate.lo}, {ax_rate.hi}]")
    theta = ax_theta.nodes()
    lo, hi = theta_range
    theta = theta[(theta >= lo - 1e-9) & (theta <= hi + 1e-9)]
    pts = np.stack([theta, np.full_like(theta, theta_dot_star)], axis=-1)
    return theta, evaluate(fstar, pts)[:, 0]


def saturation_fraction(profile, tau_max_star: float, tol: float = SATURATION_TOL) -> float:
    if not tau_max_star > 0:
        raise ValueError("tau_max* must be > 0")
    prof = np.abs(np.asarray(profile, dtype=float))
    if prof.size == 0:
        return 0.0
    return float(np.mean(prof >= tau_max_star * (1.0 - tol)))


def classify(r_star: float, bang_bang_max: float = BANG_BANG_MAX_R,
             unconstrained_min: float = UNCONSTRAINED_MIN_R) -> str:
    if not r_star > 0:
        raise ValueError("R* must be > 0")
    if r_star <= bang_bang_max:
        return BANG_BANG
    if r_star >= unconstrained_min:
        return UNCONSTRAINED
    return TRANSITION


def observed_regime(fraction: float) -> str:
    """Regime label read off a measured slice saturation fraction."""
    if fraction >= OBSERVED_SATURATED:
        return BANG_BANG
    if fraction <= OBSERVED_FREE:
        return UNCONSTRAINED
    return TRANSITION


def _pendulum_c_star(st: ScalingTransforms) -> tuple[float, float]:
    if st.signature.name != "pendulum":
        raise SignatureMismatch(f"regimes are defined for the pendulum, not {st.signature.name!r}")
    q_star, tau_star = st.c_star
    return q_star, tau_star


def regime_relaxed_similarity(st_a: ScalingTransforms, st_b: ScalingTransforms,
                              rel_tol: float = 1e-9) -> bool:
    """Similarity, relaxed inside a shared extreme regime."""
    qa, ta = _pendulum_c_star(st_a)
    qb, tb = _pendulum_c_star(st_b)
    if is_similar(st_a, st_b, rel_tol):
        return True
    ra, rb = classify(ta / qa), classify(tb / qb)
    if ra == rb == UNCONSTRAINED and _close(qa, qb, rel_tol):
        return True
    if ra == rb == BANG_BANG and _close(ta, tb, rel_tol):
        return True
    return False


def report_for(fstar: DimensionlessPolicy, theta_dot_star: float = 0.0) -> RegimeReport:
    """Regime figures for one solved, nondimensionalized pendulum table."""
    q_star, tau_star = fstar.c_star
    _, prof = slice_policy(fstar, theta_dot_star)
    frac = saturation_fraction(prof, tau_star)
    r = tau_star / q_star
    return RegimeReport(q_star=q_star, tau_max_star=tau_star, r_star=r,
                        saturation_fraction=frac, classification=classify(r),
                        observed=observed_regime(frac))


def sweep_contexts(q_stars: Iterable[float] = (), tau_max_stars: Iterable[float] = (),
                   q_fixed: float = 0.5, tau_fixed: float = 0.5) -> list[tuple[float, float]]:
    """(q*, tau_max*) pairs: tau_max* varied at q_fixed, then q* varied at tau_fixed."""
    pairs = [(q_fixed, t) for t in tau_max_stars] + [(q, tau_fixed) for q in q_stars]
    seen, out = set(), []
    for p in pairs:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def run_sweep(pairs: Sequence[tuple[float, float]], grid: int = 251, controls: int = 51,
              progress=None) -> list[RegimeReport]:
    """Solve each (q*, tau_max*) pendulum context and report its regime."""
    from .solver import solve
    from .systems import PendulumContext, PendulumModel

    reports = []
    for q_star, tau_star in pairs:
        model = PendulumModel(PendulumContext.from_star(q_star, tau_star))
        res = solve(model.dp_config(grid=grid, controls=controls), model)
        rep = report_for(to_dimensionless(res.policy, model.transforms))
        reports.append(rep)
        if progress is not None:
            progress(rep)
    return reports
