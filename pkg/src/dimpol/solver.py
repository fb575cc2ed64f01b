"""Fixed-horizon value iteration on a regular state grid.

The continuous dynamics are discretized with one forward-Euler step per
backup.  Successor states are classified once up front:

* leaving the grid box      -> terminal, ``oob_cost``
* landing in the target box -> terminal, ``target_cost``
* infeasible control        -> +inf (never chosen if anything is feasible)
* otherwise                 -> multilinear interpolation of the cost-to-go

Because the dynamics are time invariant, the interpolation weights form a
fixed sparse matrix, and each backup is one sparse mat-vec followed by a
row-wise minimum.  Every backup reads only the previous field (Jacobi).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np
import scipy.sparse as sp

from .dims import ProblemSignature, ScalingTransforms
from .errors import NonFiniteDynamics, PolicyUndefined
from .grid import Grid, as_axes
from .policy import TabularPolicy

log = logging.getLogger(__name__)


class DynamicsModel(Protocol):
    name: str
    signature: ProblemSignature
    context: tuple[float, ...]
    transforms: ScalingTransforms

    def derivative(self, x: np.ndarray, u: np.ndarray) -> np.ndarray: ...

    def cost_rate(self, x: np.ndarray, u: np.ndarray) -> np.ndarray: ...

    def feasible(self, x: np.ndarray, u: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class DPConfig:
    dt: float
    steps: int
    state_grid: tuple
    control_set: np.ndarray
    target: tuple[float, ...]
    target_tol: tuple[float, ...]
    oob_cost: float = 1e4
    target_cost: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "state_grid", as_axes(self.state_grid))
        controls = np.array(self.control_set, dtype=float)
        if controls.ndim == 1:
            controls = controls[:, None]
        controls.setflags(write=False)
        object.__setattr__(self, "control_set", controls)
        object.__setattr__(self, "target", tuple(float(v) for v in self.target))
        object.__setattr__(self, "target_tol", tuple(float(v) for v in self.target_tol))
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ValueError("steps must be a nonnegative integer")
        if len(controls) == 0:
            raise ValueError("control_set must not be empty")
        n = len(self.state_grid)
        if len(self.target) != n or len(self.target_tol) != n:
            raise ValueError("target and tolerance must have one entry per state axis")

    @property
    def grid(self) -> Grid:
        return Grid(self.state_grid)

    def in_target(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        return np.all(np.abs(x - np.asarray(self.target)) <= np.asarray(self.target_tol), axis=-1)


@dataclass(eq=False)
class ValueIterationResult:
    cost_to_go: np.ndarray
    policy: TabularPolicy
    policy_index: np.ndarray
    residual_history: list[float]
    config: DPConfig
    elapsed: float = 0.0


@dataclass(eq=False)
class Transitions:
    """Precomputed one-step structure of the discretized problem."""

    grid: Grid
    n_controls: int
    interp: sp.csr_matrix          # (N * U, N) interpolation weights
    const: np.ndarray              # (N * U,) running cost + terminal costs
    target_nodes: np.ndarray       # (N,) bool, absorbing nodes
    target_cost: float
    oob_cost: float

    def candidates(self, J: np.ndarray) -> np.ndarray:
        return (self.const + self.interp @ J).reshape(self.grid.size, self.n_controls)

    def hold_terminal(self, J_new: np.ndarray) -> np.ndarray:
        J_new[self.target_nodes] = self.target_cost
        # nodes where no control is feasible behave like leaving the domain
        J_new[~np.isfinite(J_new)] = self.oob_cost
        return J_new


def build_transitions(cfg: DPConfig, model: DynamicsModel) -> Transitions:
    grid = cfg.grid
    nodes = grid.nodes()
    N, U = grid.size, len(cfg.control_set)
    rows, cols, vals = [], [], []
    const = np.empty((N, U))
    node_ids = np.arange(N, dtype=np.int64)
    for j, u in enumerate(cfg.control_set):
        uu = np.broadcast_to(u, (N, len(u)))
        ok = np.asarray(model.feasible(nodes, uu), dtype=bool)
        with np.errstate(all="ignore"):
            xdot = np.asarray(model.derivative(nodes, uu), dtype=float)
            cost = np.asarray(model.cost_rate(nodes, uu), dtype=float) * cfg.dt
            nxt = nodes + xdot * cfg.dt
        bad = ok & ~(np.all(np.isfinite(nxt), axis=-1) & np.isfinite(cost))
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise NonFiniteDynamics(f"non-finite transition at x={nodes[i]}, u={u}")
        oob = ok & ~grid.inside(nxt)
        hit = ok & ~oob & cfg.in_target(nxt)
        live = ok & ~oob & ~hit
        c = np.where(ok, cost, np.inf)
        c = np.where(oob, c + cfg.oob_cost, c)
        c = np.where(hit, c + cfg.target_cost, c)
        const[:, j] = c
        if np.any(live):
            src = node_ids[live]
            for idx, w in grid.corner_weights(nxt[live]):
                keep = w != 0.0
                rows.append(src[keep] * U + j)
                cols.append(idx[keep])
                vals.append(w[keep])
    interp = sp.csr_matrix(
        (np.concatenate(vals) if vals else np.zeros(0),
         (np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64),
          np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64))),
        shape=(N * U, N))
    interp.sum_duplicates()
    return Transitions(grid=grid, n_controls=U, interp=interp, const=const.ravel(),
                       target_nodes=cfg.in_target(nodes), target_cost=cfg.target_cost,
                       oob_cost=cfg.oob_cost)


def initial_cost(cfg: DPConfig) -> np.ndarray:
    """Terminal field J0: target_cost on target nodes, zero elsewhere."""
    grid = cfg.grid
    J = np.zeros(grid.size)
    J[cfg.in_target(grid.nodes())] = cfg.target_cost
    return J


def bellman_backup(J: np.ndarray, cfg: DPConfig, model: DynamicsModel,
                   transitions: Transitions | None = None):
    """One Jacobi backup; returns (new cost-to-go, argmin control index)."""
    J = np.asarray(J, dtype=float).ravel()
    if not np.all(np.isfinite(J)):
        raise ValueError("cost-to-go must be finite everywhere")
    tr = transitions if transitions is not None else build_transitions(cfg, model)
    cand = tr.candidates(J)
    idx = np.argmin(cand, axis=1)
    J_new = np.take_along_axis(cand, idx[:, None], axis=1)[:, 0]
    return tr.hold_terminal(J_new), idx


def policy_meta(model: DynamicsModel, cfg: DPConfig) -> dict:
    u = cfg.control_set[:, 0]
    sig = model.signature
    st = model.transforms
    return {
        "system": model.name,
        "signature": sig.name,
        "context_names": sig.context_names,
        "context": tuple(model.context),
        "c_star_names": tuple(q.name for q in sig.free_context),
        "c_star": st.c_star,
        "state_names": sig.state_names,
        "input_names": sig.input_names,
        "control_resolution": float((u.max() - u.min()) / max(len(u) - 1, 1)),
        "dimensionless": False,
        "approximate": False,
    }


def solve(cfg: DPConfig, model: DynamicsModel,
          progress: Callable[[int, float], None] | None = None,
          interp: str = "multilinear") -> ValueIterationResult:
    """Run ``cfg.steps`` backups from the terminal field.

    Stops early when a backup reproduces the field bit for bit, since the
    remaining backups (and the policy) would then be identical.
    """
    J = initial_cost(cfg)
    if cfg.steps == 0:
        err = PolicyUndefined("zero iterations requested: no policy is defined")
        err.cost_to_go = J
        raise err
    t0 = time.perf_counter()
    tr = build_transitions(cfg, model)
    log.info("transitions built: %d nodes x %d controls, %d nonzeros (%.1fs)",
             tr.grid.size, tr.n_controls, tr.interp.nnz, time.perf_counter() - t0)
    residuals = []
    for it in range(cfg.steps):
        cand = tr.candidates(J)
        J_new = tr.hold_terminal(cand.min(axis=1))
        residuals.append(float(np.max(np.abs(J_new - J))))
        J = J_new
        if progress is not None:
            progress(it, residuals[-1])
        if residuals[-1] == 0.0:
            # bit-exact fixed point: every remaining backup would repeat this one
            log.info("fixed point reached after %d of %d steps", it + 1, cfg.steps)
            break
    # policy of the final backup (ties -> lowest control index)
    idx = np.argmin(cand, axis=1)
    grid = tr.grid
    values = cfg.control_set[idx].reshape(grid.shape + (cfg.control_set.shape[1],))
    policy = TabularPolicy(axes=grid.axes, values=values, interp=interp, oob="clamp",
                           meta=policy_meta(model, cfg))
    elapsed = time.perf_counter() - t0
    log.info("value iteration: %d steps in %.1fs, final residual %.3g",
             len(residuals), elapsed, residuals[-1])
    return ValueIterationResult(cost_to_go=J.reshape(grid.shape), policy=policy,
                                policy_index=idx.reshape(grid.shape),
                                residual_history=residuals, config=cfg, elapsed=elapsed)


@dataclass(eq=False)
class Rollout:
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    cost: np.ndarray             # accumulated running cost at each time
    reason: str                  # "target", "domain_exit" or "time"

    @property
    def captured(self) -> bool:
        return self.reason == "target"


def rollout(f: Callable, model: DynamicsModel, x0: Sequence[float], dt: float, t_end: float,
            target: tuple | None = None, domain: Sequence | None = None) -> Rollout:
    """Forward-Euler closed-loop simulation under feedback law ``f``.

    Stops on entering the target box (``target = (center, tol)``, default
    the model's) or on leaving ``domain`` (default the model's grid box).
    """
    if not t_end > 0:
        raise ValueError("t_end must be > 0")
    center, tol = target if target is not None else model.target()
    center, tol = np.asarray(center, float), np.asarray(tol, float)
    box = np.asarray(domain if domain is not None else model.domain(), dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    times, states, controls, costs = [0.0], [x.copy()], [], [0.0]
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    reason = "time"
    for k in range(n_steps):
        if np.all(np.abs(x - center) <= tol):
            reason = "target"
            break
        if np.any(x < box[:, 0]) or np.any(x > box[:, 1]):
            reason = "domain_exit"
            break
        u = np.atleast_1d(np.asarray(f(x), dtype=float))
        xdot = model.derivative(x[None, :], u[None, :])[0]
        rate = float(model.cost_rate(x[None, :], u[None, :])[0])
        if not (np.all(np.isfinite(xdot)) and np.isfinite(rate)):
            raise NonFiniteDynamics(f"non-finite dynamics at x={x}, u={u}")
        x = x + xdot * dt
        controls.append(u)
        times.append((k + 1) * dt)
        states.append(x.copy())
        costs.append(costs[-1] + rate * dt)
    else:
        if np.all(np.abs(x - center) <= tol):
            reason = "target"
    k_in = len(controls[0]) if controls else 1
    return Rollout(times=np.array(times), states=np.array(states),
                   controls=np.array(controls).reshape(-1, k_in),
                   cost=np.array(costs), reason=reason)
