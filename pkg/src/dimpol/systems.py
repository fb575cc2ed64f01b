"""Benchmark motion-control problems.

* torque-limited pendulum swing-up: ``m l^2 θ'' - m g l sin θ = τ`` with
  running cost ``q^2 θ^2 + τ^2`` and ``|τ| <= τ_max``; θ = 0 is upright.
* longitudinal car on a slippery surface, controlled through front-wheel
  slip ``s`` with traction ratio ``μ(s) = 2 / (1 + exp(-70 s)) - 1``, running
  cost ``x^2 / q^2 + s^2`` and nonnegative wheel normal forces.

Models evaluate on batches: states are (N, n) arrays and inputs (N, k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dims import DIMENSIONLESS, DimVec, ProblemSignature, QuantitySpec, transforms_for
from .solver import DPConfig

TORQUE = DimVec.of(M=1, L=2, T=-2)
FREQUENCY = DimVec.of(T=-1)
LENGTH = DimVec.of(L=1)
VELOCITY = DimVec.of(L=1, T=-1)
ACCELERATION = DimVec.of(L=1, T=-2)

# Dimensionless methodology constants.  Time steps are fixed in
# dimensionless time so that similar contexts see identical discretizations;
# the reference values reproduce dt = 0.025 s for pendulum c_a and car c_b.
PENDULUM_DT_STAR = 0.025 * math.sqrt(10.0)
PENDULUM_HORIZON_STAR = 20 * 2 * math.pi
PENDULUM_THETA_MAX = 2 * math.pi
PENDULUM_THETA_DOT_MAX_STAR = math.pi

CAR_DT_STAR = 0.025 * math.sqrt(9.8)
CAR_X_MAX_STAR = 10.0
CAR_V_MAX_STAR = 2.0
CAR_HORIZON_STAR = 10 * CAR_X_MAX_STAR / CAR_V_MAX_STAR
CAR_SLIP_MAX = 0.2

TARGET_TOL_STAR = 0.05
OOB_COST_STAR = 1e4


def pendulum_signature() -> ProblemSignature:
    return ProblemSignature(
        name="pendulum",
        inputs=(QuantitySpec("tau", TORQUE, "input"),),
        states=(QuantitySpec("theta", DIMENSIONLESS, "state"),
                QuantitySpec("theta_dot", FREQUENCY, "state")),
        context=(QuantitySpec("mgl", TORQUE, "context"),
                 QuantitySpec("omega", FREQUENCY, "context"),
                 QuantitySpec("q", TORQUE, "context"),
                 QuantitySpec("tau_max", TORQUE, "context")),
        repeated=("mgl", "omega"),
    )


def car_signature() -> ProblemSignature:
    return ProblemSignature(
        name="car",
        inputs=(QuantitySpec("s", DIMENSIONLESS, "input"),),
        states=(QuantitySpec("x", LENGTH, "state"),
                QuantitySpec("x_dot", VELOCITY, "state")),
        context=(QuantitySpec("g", ACCELERATION, "context"),
                 QuantitySpec("l", LENGTH, "context"),
                 QuantitySpec("x_c", LENGTH, "context"),
                 QuantitySpec("y_c", LENGTH, "context"),
                 QuantitySpec("q", LENGTH, "context")),
        repeated=("g", "l"),
    )


@dataclass(frozen=True)
class PendulumContext:
    m: float
    g: float
    l: float
    q: float
    tau_max: float

    def __post_init__(self):
        for name in ("m", "g", "l", "tau_max", "q"):
            if not getattr(self, name) > 0:
                raise ValueError(f"pendulum {name} must be > 0")

    @classmethod
    def from_reduced(cls, mgl, omega, q, tau_max) -> "PendulumContext":
        """Any (m, g, l) with the given m g l and sqrt(g / l); uses l = 1."""
        g = omega ** 2
        return cls(m=mgl / g, g=g, l=1.0, q=q, tau_max=tau_max)

    @classmethod
    def from_star(cls, q_star, tau_max_star, m=1.0, g=10.0, l=1.0) -> "PendulumContext":
        mgl = m * g * l
        return cls(m=m, g=g, l=l, q=q_star * mgl, tau_max=tau_max_star * mgl)

    @property
    def mgl(self) -> float:
        return self.m * self.g * self.l

    @property
    def omega(self) -> float:
        return math.sqrt(self.g / self.l)

    @property
    def inertia(self) -> float:
        return self.m * self.l ** 2

    def vector(self) -> tuple[float, ...]:
        """Context in signature order (mgl, omega, q, tau_max)."""
        return (self.mgl, self.omega, self.q, self.tau_max)


@dataclass(frozen=True)
class CarContext:
    g: float
    l: float
    x_c: float
    y_c: float
    q: float

    def __post_init__(self):
        if not (self.g > 0 and self.l > 0 and self.q > 0):
            raise ValueError("car g, l and q must be > 0")
        if not 0 < self.x_c < self.l:
            raise ValueError("car CG position must satisfy 0 < x_c < l")
        if not self.y_c > 0:
            raise ValueError("car CG height must be > 0")

    def vector(self) -> tuple[float, ...]:
        """Context in signature order (g, l, x_c, y_c, q)."""
        return (self.g, self.l, self.x_c, self.y_c, self.q)


@dataclass(frozen=True)
class CtTask:
    omega_d: float
    zeta: float

    def __post_init__(self):
        if not (self.omega_d > 0 and self.zeta > 0):
            raise ValueError("computed-torque omega_d and zeta must be > 0")


def pendulum_derivative(ctx: PendulumContext, x, u) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    tau = np.atleast_2d(np.asarray(u, dtype=float))[:, 0]
    theta, theta_dot = x[:, 0], x[:, 1]
    theta_ddot = (tau + ctx.mgl * np.sin(theta)) / ctx.inertia
    return np.stack([theta_dot, theta_ddot], axis=-1)


def pendulum_cost_rate(ctx: PendulumContext, x, u) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    tau = np.atleast_2d(np.asarray(u, dtype=float))[:, 0]
    return ctx.q ** 2 * x[:, 0] ** 2 + tau ** 2


def pendulum_feasible(ctx: PendulumContext, x, u) -> np.ndarray:
    tau = np.atleast_2d(np.asarray(u, dtype=float))[:, 0]
    return np.abs(tau) <= ctx.tau_max * (1 + 1e-12)


def car_mu(s):
    """Traction ratio; identical to 2 / (1 + exp(-70 s)) - 1, written as tanh."""
    return np.tanh(35.0 * np.asarray(s, dtype=float))


def _car_accel(ctx: CarContext, s):
    mu = car_mu(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        return mu * ctx.g * ctx.x_c / (ctx.l + mu * ctx.y_c)


def car_normal_forces(ctx: CarContext, x_ddot):
    """Front and rear normal forces per unit mass."""
    front = ctx.g * ctx.x_c - x_ddot * ctx.y_c
    rear = ctx.g * (ctx.l - ctx.x_c) + x_ddot * ctx.y_c
    return front, rear


def car_derivative(ctx: CarContext, x, u) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s = np.atleast_2d(np.asarray(u, dtype=float))[:, 0]
    return np.stack([x[:, 1], _car_accel(ctx, s)], axis=-1)


def car_cost_rate(ctx: CarContext, x, u) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s = np.atleast_2d(np.asarray(u, dtype=float))[:, 0]
    return x[:, 0] ** 2 / ctx.q ** 2 + s ** 2


def car_feasible(ctx: CarContext, x, u) -> np.ndarray:
    s = np.atleast_2d(np.asarray(u, dtype=float))[:, 0]
    acc = _car_accel(ctx, s)
    front, rear = car_normal_forces(ctx, acc)
    with np.errstate(invalid="ignore"):
        return np.isfinite(acc) & (front >= 0) & (rear >= 0)


class PendulumModel:
    """Pendulum swing-up problem bound to one context."""

    name = "pendulum"

    def __init__(self, ctx: PendulumContext):
        self.ctx = ctx
        self.signature = pendulum_signature()
        self.context = ctx.vector()

    @cached_property
    def transforms(self):
        return transforms_for(self.signature, self.context)

    def derivative(self, x, u):
        return pendulum_derivative(self.ctx, x, u)

    def cost_rate(self, x, u):
        return pendulum_cost_rate(self.ctx, x, u)

    def feasible(self, x, u):
        return pendulum_feasible(self.ctx, x, u)

    @property
    def time_scale(self) -> float:
        """Seconds per unit of dimensionless time."""
        return 1.0 / self.ctx.omega

    @property
    def cost_scale(self) -> float:
        """Cost units per unit of dimensionless cost."""
        return self.ctx.mgl ** 2 / self.ctx.omega

    def domain(self):
        w = self.ctx.omega
        return ((-PENDULUM_THETA_MAX, PENDULUM_THETA_MAX),
                (-PENDULUM_THETA_DOT_MAX_STAR * w, PENDULUM_THETA_DOT_MAX_STAR * w))

    def target(self):
        return (0.0, 0.0), (TARGET_TOL_STAR, TARGET_TOL_STAR * self.ctx.omega)

    def control_set(self, count: int) -> np.ndarray:
        return np.linspace(-self.ctx.tau_max, self.ctx.tau_max, count)[:, None]

    def dp_config(self, grid=251, controls=51, dt=None, horizon=None,
                  oob_cost=None) -> DPConfig:
        return _dp_config(self, grid, controls, dt, horizon, oob_cost,
                          PENDULUM_DT_STAR, PENDULUM_HORIZON_STAR)


class CarModel:
    """Longitudinal car positioning problem bound to one context."""

    name = "car"

    def __init__(self, ctx: CarContext):
        self.ctx = ctx
        self.signature = car_signature()
        self.context = ctx.vector()

    @cached_property
    def transforms(self):
        return transforms_for(self.signature, self.context)

    def derivative(self, x, u):
        return car_derivative(self.ctx, x, u)

    def cost_rate(self, x, u):
        return car_cost_rate(self.ctx, x, u)

    def feasible(self, x, u):
        return car_feasible(self.ctx, x, u)

    @property
    def time_scale(self) -> float:
        return math.sqrt(self.ctx.l / self.ctx.g)

    @property
    def cost_scale(self) -> float:
        return self.time_scale

    def domain(self):
        l, v = self.ctx.l, math.sqrt(self.ctx.g * self.ctx.l)
        return ((-CAR_X_MAX_STAR * l, CAR_X_MAX_STAR * l),
                (-CAR_V_MAX_STAR * v, CAR_V_MAX_STAR * v))

    def target(self):
        v = math.sqrt(self.ctx.g * self.ctx.l)
        return (0.0, 0.0), (TARGET_TOL_STAR * self.ctx.l, TARGET_TOL_STAR * v)

    def control_set(self, count: int) -> np.ndarray:
        return np.linspace(-CAR_SLIP_MAX, CAR_SLIP_MAX, count)[:, None]

    def dp_config(self, grid=251, controls=51, dt=None, horizon=None,
                  oob_cost=None) -> DPConfig:
        return _dp_config(self, grid, controls, dt, horizon, oob_cost,
                          CAR_DT_STAR, CAR_HORIZON_STAR)


def _dp_config(model, grid, controls, dt, horizon, oob_cost, dt_star, horizon_star):
    counts = (grid, grid) if np.isscalar(grid) else tuple(grid)
    dt = dt_star * model.time_scale if dt is None else float(dt)
    horizon = horizon_star * model.time_scale if horizon is None else float(horizon)
    steps = max(1, int(round(horizon / dt)))
    center, tol = model.target()
    return DPConfig(
        dt=dt,
        steps=steps,
        state_grid=tuple((lo, hi, c) for (lo, hi), c in zip(model.domain(), counts)),
        control_set=model.control_set(controls),
        target=center,
        target_tol=tol,
        oob_cost=(OOB_COST_STAR if oob_cost is None else oob_cost) * model.cost_scale,
        target_cost=0.0,
    )


def make_model(system: str, context):
    """Model from a system name and a context object, mapping or vector."""
    if system == "pendulum":
        if isinstance(context, PendulumContext):
            return PendulumModel(context)
        if isinstance(context, dict):
            if {"m", "g", "l"} <= context.keys():
                return PendulumModel(PendulumContext(
                    context["m"], context["g"], context["l"], context["q"], context["tau_max"]))
            return PendulumModel(PendulumContext.from_reduced(
                context["mgl"], context["omega"], context["q"], context["tau_max"]))
        return PendulumModel(PendulumContext.from_reduced(*context))
    if system == "car":
        if isinstance(context, CarContext):
            return CarModel(context)
        if isinstance(context, dict):
            return CarModel(CarContext(**{k: context[k] for k in ("g", "l", "x_c", "y_c", "q")}))
        return CarModel(CarContext(*context))
    raise ValueError(f"unknown system {system!r}")


SIGNATURES = {"pendulum": pendulum_signature, "car": car_signature}

PENDULUM_CONTEXTS = {
    "a": PendulumContext(m=1.0, g=10.0, l=1.0, q=1.0, tau_max=5.0),
    "b": PendulumContext(m=1.0, g=10.0, l=2.0, q=2.0, tau_max=10.0),
    "c": PendulumContext(m=2.0, g=10.0, l=1.0, q=2.0, tau_max=10.0),
    "d": PendulumContext(m=1.0, g=10.0, l=1.0, q=0.5, tau_max=10.0),
    "e": PendulumContext(m=1.0, g=10.0, l=2.0, q=1.0, tau_max=20.0),
    "f": PendulumContext(m=2.0, g=10.0, l=1.0, q=1.0, tau_max=20.0),
    "g": PendulumContext(m=1.0, g=10.0, l=1.0, q=100.0, tau_max=10.0),
    "h": PendulumContext(m=1.0, g=10.0, l=2.0, q=200.0, tau_max=20.0),
    "i": PendulumContext(m=2.0, g=10.0, l=1.0, q=200.0, tau_max=20.0),
}

CAR_CONTEXTS = {
    "a": CarContext(l=2.0, g=9.8, x_c=1.0, y_c=1.0, q=40.0),
    "b": CarContext(l=1.0, g=9.8, x_c=0.5, y_c=0.5, q=20.0),
    "c": CarContext(l=3.0, g=9.8, x_c=1.5, y_c=1.5, q=60.0),
    "d": CarContext(l=2.0, g=9.8, x_c=1.0, y_c=3.0, q=20.0),
    "e": CarContext(l=1.0, g=9.8, x_c=0.5, y_c=1.5, q=10.0),
    "f": CarContext(l=3.0, g=9.8, x_c=1.5, y_c=4.5, q=30.0),
    "g": CarContext(l=2.0, g=9.8, x_c=1.0, y_c=0.2, q=4.0),
    "h": CarContext(l=1.0, g=9.8, x_c=0.5, y_c=0.1, q=2.0),
    "i": CarContext(l=3.0, g=9.8, x_c=1.5, y_c=0.3, q=6.0),
}

# block headings of the two context tables: (q*, tau_max*) and (x_c*, y_c*, q*)
PENDULUM_BLOCKS = {"abc": (0.1, 0.5), "def": (0.05, 1.0), "ghi": (10.0, 1.0)}
CAR_BLOCKS = {"abc": (0.5, 0.5, 20.0), "def": (0.5, 1.5, 10.0), "ghi": (0.5, 0.1, 2.0)}


def context_tables() -> dict[str, dict]:
    return {"pendulum": dict(PENDULUM_CONTEXTS), "car": dict(CAR_CONTEXTS)}
