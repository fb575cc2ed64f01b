"""Closed-form pendulum policies used as exact oracles for transfer.

* LQR for the linearized pendulum ``H θ'' - G θ = τ`` with cost
  ``q^2 θ^2 + τ^2``: gains ``a = G + sqrt(G^2 + q^2)``, ``b = sqrt(2 a H)``.
* Computed torque toward the upright position with task (ω_d, ζ).

Here ``G = m g l`` and ``H = m l^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import SimpleNamespace

import numpy as np

from .dims import DIMENSIONLESS, ProblemSignature, QuantitySpec, transforms_for
from .errors import DomainError
from .policy import FunctionLaw, law_to_dimensionless, transfer_law
from .systems import FREQUENCY, TORQUE, CtTask, pendulum_signature


def lqr_signature() -> ProblemSignature:
    base = pendulum_signature()
    return ProblemSignature(
        name="pendulum_lqr",
        inputs=base.inputs,
        states=base.states,
        context=tuple(q for q in base.context if q.name != "tau_max"),
        repeated=("mgl", "omega"),
    )


def ct_signature() -> ProblemSignature:
    base = pendulum_signature()
    return ProblemSignature(
        name="pendulum_ct",
        inputs=base.inputs,
        states=base.states,
        context=(QuantitySpec("mgl", TORQUE, "context"),
                 QuantitySpec("omega", FREQUENCY, "context"),
                 QuantitySpec("omega_d", FREQUENCY, "context"),
                 QuantitySpec("zeta", DIMENSIONLESS, "context")),
        repeated=("mgl", "omega"),
    )


@dataclass(frozen=True)
class LqrSolution:
    G: float
    H: float
    q: float
    a: float
    b: float

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.a, self.b]])

    @property
    def S(self) -> np.ndarray:
        a, b, G, H = self.a, self.b, self.G, self.H
        return np.array([[b * (a - G), a * H], [a * H, b * H]])

    @property
    def A(self) -> np.ndarray:
        return np.array([[0.0, 1.0], [self.G / self.H, 0.0]])

    @property
    def B(self) -> np.ndarray:
        return np.array([[0.0], [1.0 / self.H]])

    @property
    def Q(self) -> np.ndarray:
        return np.diag([self.q ** 2, 0.0])

    def torque(self, theta, theta_dot, printed_sign: bool = False):
        """Feedback torque ``-(aθ + bθ')``, which stabilizes the upright state.

        ``printed_sign`` returns ``+(aθ + bθ')`` instead (the sign convention
        where τ is the torque applied against the joint).
        """
        u = self.a * np.asarray(theta) + self.b * np.asarray(theta_dot)
        return u if printed_sign else -u


def lqr_gains(G: float, H: float, q: float) -> LqrSolution:
    if not (G > 0 and H > 0):
        raise DomainError(f"G and H must be > 0 (got G={G}, H={H})")
    if not q >= 0:
        raise DomainError(f"q must be >= 0 (got {q})")
    a = G + math.sqrt(G * G + q * q)
    b = math.sqrt(2.0 * a * H)
    return LqrSolution(G=float(G), H=float(H), q=float(q), a=a, b=b)


def riccati_residual(sol: LqrSolution) -> float:
    """Max-abs entry of ``SA + A'S - S B R^-1 B'S + Q`` with R = 1."""
    S, A, B = sol.S, sol.A, sol.B
    res = S @ A + A.T @ S - S @ B @ B.T @ S + sol.Q
    return float(np.max(np.abs(res)))


def riccati_relative_residual(sol: LqrSolution) -> float:
    """Residual normalized by the largest term of the Riccati equation."""
    S, A, B = sol.S, sol.A, sol.B
    terms = [S @ A, A.T @ S, S @ B @ B.T @ S, sol.Q]
    scale = max(float(np.max(np.abs(t))) for t in terms)
    return riccati_residual(sol) / scale


def log_sampled_triples(per_axis: int = 10, lo: float = 1e-3, hi: float = 1e3) -> np.ndarray:
    """Deterministic (G, H, q) triples on a log-spaced per_axis**3 lattice."""
    v = np.geomspace(lo, hi, per_axis)
    mesh = np.meshgrid(v, v, v, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def lqr_dimensionless_gains(q_star: float) -> tuple[float, float]:
    if q_star < 0:
        raise DomainError("q* must be >= 0")
    k_theta = 1.0 + math.sqrt(1.0 + q_star * q_star)
    return k_theta, math.sqrt(2.0 * k_theta)


def _lqr_context(ctx) -> tuple[float, float, float]:
    """(mgl, omega, q) from anything with m, g, l, q attributes."""
    return (ctx.m * ctx.g * ctx.l, math.sqrt(ctx.g / ctx.l), ctx.q)


def lqr_law(ctx, printed_sign: bool = False) -> FunctionLaw:
    """LQR feedback law for a pendulum context (uses m, g, l, q)."""
    sol = lqr_gains(ctx.m * ctx.g * ctx.l, ctx.m * ctx.l ** 2, ctx.q)
    st = transforms_for(lqr_signature(), _lqr_context(ctx))
    return FunctionLaw(lambda x: sol.torque(x[:, 0], x[:, 1], printed_sign)[:, None], st)


@dataclass(frozen=True)
class CtPolicy:
    m: float
    g: float
    l: float
    task: CtTask

    @property
    def mgl(self) -> float:
        return self.m * self.g * self.l

    @property
    def inertia(self) -> float:
        return self.m * self.l ** 2

    @property
    def omega(self) -> float:
        return math.sqrt(self.g / self.l)

    def context(self) -> tuple[float, float, float, float]:
        return (self.mgl, self.omega, self.task.omega_d, self.task.zeta)


def ct_policy_eval(p: CtPolicy, theta, theta_dot, literal: bool = True):
    """Computed-torque law toward θ = 0.

    The literal form adds ``+mgl sin θ``.  Under the dynamics
    ``ml²θ'' - mgl sin θ = τ`` only ``-mgl sin θ`` cancels gravity, which is
    what ``literal=False`` returns.
    """
    theta = np.asarray(theta, dtype=float)
    theta_dot = np.asarray(theta_dot, dtype=float)
    wd, z, H = p.task.omega_d, p.task.zeta, p.inertia
    gravity = p.mgl * np.sin(theta)
    if not literal:
        gravity = -gravity
    return gravity - 2.0 * H * wd * z * theta_dot - H * wd ** 2 * theta


def ct_dimensionless_eval(omega_d_star, zeta, theta, theta_dot_star, literal=True):
    """``τ* = ±sin θ - 2 ω_d* ζ θ'* - ω_d*² θ``."""
    theta = np.asarray(theta, dtype=float)
    gravity = np.sin(theta) if literal else -np.sin(theta)
    return gravity - 2.0 * omega_d_star * zeta * np.asarray(theta_dot_star) \
        - omega_d_star ** 2 * theta


def ct_law(p: CtPolicy, literal: bool = True) -> FunctionLaw:
    st = transforms_for(ct_signature(), p.context())
    return FunctionLaw(lambda x: ct_policy_eval(p, x[:, 0], x[:, 1], literal)[:, None], st)


def probe_states(omega: float, count: int = 50) -> np.ndarray:
    """count x count grid over θ in [-π, π], θ' in [-π ω, π ω]."""
    th = np.linspace(-math.pi, math.pi, count)
    thd = np.linspace(-math.pi * omega, math.pi * omega, count)
    mesh = np.meshgrid(th, thd, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def max_relative_deviation(u, v) -> float:
    """max |u - v| normalized by max |v| over the sample."""
    u, v = np.asarray(u, float), np.asarray(v, float)
    scale = np.max(np.abs(v))
    return float(np.max(np.abs(u - v)) / scale) if scale > 0 else float(np.max(np.abs(u - v)))


def verify_transfer_analytic(kind: str, ctx_a, ctx_b, count: int = 50) -> float:
    """Deviation between the scaled law of context a and direct substitution in b.

    ``kind`` is ``"lqr"`` (contexts with m, g, l, q) or ``"ct"`` (CtPolicy).
    Raises NotSimilar if the dimensionless contexts differ.
    """
    if kind == "lqr":
        f_a, f_b = lqr_law(ctx_a), lqr_law(ctx_b)
    elif kind == "ct":
        f_a, f_b = ct_law(ctx_a), ct_law(ctx_b)
    else:
        raise ValueError(f"unknown analytic policy kind {kind!r}")
    scaled = transfer_law(f_a, f_b.transforms)
    omega_b = f_b.transforms.context_dict()["omega"]
    x = probe_states(omega_b, count)
    return max_relative_deviation(scaled(x), f_b(x))


def lqr_dimensionless_from_law(ctx) -> tuple[float, float]:
    """Recover (k_θ, k_θ') of the nondimensionalized LQR law by probing it."""
    f = lqr_law(ctx)
    fstar = law_to_dimensionless(f)
    k_theta = -float(fstar(np.array([[1.0, 0.0]]))[0, 0])
    k_rate = -float(fstar(np.array([[0.0, 1.0]]))[0, 0])
    return k_theta, k_rate


@dataclass(frozen=True)
class Check:
    label: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.value <= self.threshold

    def line(self) -> str:
        return (f"{self.label} < {self.threshold:g}: {'PASS' if self.passed else 'FAIL'}"
                f" ({self.value:.3g})")


DEFAULT_CT_TASK_STAR = (2.0, 0.7)        # (omega_d*, zeta)
DIMENSIONLESS_GAIN_Q_STARS = (0.01, 0.1, 1.0, 10.0)


def check_suite(per_axis: int = 10, count: int = 50) -> list[Check]:
    """Exactness checks of the closed-form laws, their transfer and Riccati solution."""
    from .systems import PENDULUM_CONTEXTS

    trio = [PENDULUM_CONTEXTS[k] for k in "abc"]
    lqr_dev = max(verify_transfer_analytic("lqr", a, b, count)
                  for a in trio for b in trio if a is not b)
    wd_star, zeta = DEFAULT_CT_TASK_STAR
    cts = [CtPolicy(c.m, c.g, c.l, CtTask(wd_star * math.sqrt(c.g / c.l), zeta)) for c in trio]
    ct_dev = max(verify_transfer_analytic("ct", a, b, count)
                 for a in cts for b in cts if a is not b)
    ric = max(riccati_relative_residual(lqr_gains(*t)) for t in log_sampled_triples(per_axis))
    gain_dev = 0.0
    for q_star in (0.0,) + DIMENSIONLESS_GAIN_Q_STARS:
        # lqr_law only reads m, g, l, q; q = 0 is outside the swing-up context domain
        got = lqr_dimensionless_from_law(SimpleNamespace(m=1.0, g=10.0, l=1.0, q=10.0 * q_star))
        want = (2.0, 2.0) if q_star == 0 else lqr_dimensionless_gains(q_star)
        gain_dev = max(gain_dev, *(abs(g - w) / abs(w) for g, w in zip(got, want)))
    return [
        Check("LQR transfer max dev", lqr_dev, 1e-12),
        Check("CT transfer max dev", ct_dev, 1e-12),
        Check("Riccati relative residual", ric, 1e-9),
        Check("dimensionless LQR gain dev", gain_dev, 1e-12),
    ]
