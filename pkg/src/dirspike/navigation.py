"""Closed-loop navigation: a damped point robot driven by the excitable
controller's thresholded output, tracking a moving reference while being
pushed off obstacle points.

The controller state u obeys the same potential dynamics as the core model
(with unit input gain); its output only reaches the plant when |u| clears
the activation threshold, so actuation comes in bursts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import IntegrationBlowup, ObstacleSingularity
from .model import ModelParams
from .simulate import fmt_float

__all__ = [
    "NavParams",
    "ReferencePath",
    "RobotState",
    "NavScenario",
    "NavTrajectory",
    "NavMetrics",
    "act",
    "tracking_input",
    "obstacle_input",
    "step_nav",
    "run_scenario",
    "write_nav_csv",
    "write_metrics_json",
]

_NAV_GUARD = 1e3


@dataclass(frozen=True)
class NavParams:
    """Plant and controller constants of the navigation loop.

    gamma is the plant damping, alpha_act the actuation gain, S the output
    activation threshold, k1/eps the tracking-field gain and softening,
    k2 the obstacle repulsion gain.  ctrl carries the controller's
    potential parameters; its alpha slot is unused (the loop injects the
    command field directly).
    """

    ctrl: ModelParams
    gamma: float = 1.0
    alpha_act: float = 3.0
    S: float = 0.9
    k1: float = 0.4
    k2: float = 0.0
    eps: float = 0.1
    obstacles: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        for name in ("gamma", "alpha_act", "S", "eps"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and positive, got {v!r}")
        for name in ("k1", "k2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        obs = tuple((float(a), float(b)) for a, b in self.obstacles)
        if not all(math.isfinite(a) and math.isfinite(b) for a, b in obs):
            raise ValueError("obstacle coordinates must be finite")
        object.__setattr__(self, "obstacles", obs)


@dataclass(frozen=True)
class ReferencePath:
    """Slowly outward-drifting circular reference: radius grows linearly
    while the angle advances at a constant rate."""

    radius0: float = 20.0
    radius_rate: float = 0.04
    angle0: float = math.pi / 4.0
    angle_rate: float = 0.01

    def at(self, t: float) -> np.ndarray:
        ang = self.angle0 + self.angle_rate * t
        rad = self.radius0 + self.radius_rate * t
        return np.array([rad * math.cos(ang), rad * math.sin(ang)])


@dataclass(frozen=True)
class RobotState:
    """Plant position/velocity plus controller state."""

    z: np.ndarray
    zdot: np.ndarray
    u: np.ndarray
    u_s: float

    def __post_init__(self):
        for name in ("z", "zdot", "u"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.shape != (2,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite 2-vector")
            object.__setattr__(self, name, v)
        if not (math.isfinite(self.u_s) and self.u_s >= 0.0):
            raise ValueError(f"u_s must be finite and >= 0, got {self.u_s!r}")


@dataclass(frozen=True)
class NavScenario:
    """A complete navigation run: parameters, reference, horizon, sampling."""

    params: NavParams
    path: ReferencePath = ReferencePath()
    t_end: float = 600.0
    dt: float = 2e-4
    output_dt: float = 1e-2
    transient: float = 10.0
    state0: RobotState | None = None

    def initial_state(self) -> RobotState:
        if self.state0 is not None:
            return self.state0
        z0 = self.path.at(0.0)
        return RobotState(z=z0, zdot=np.zeros(2), u=np.zeros(2), u_s=0.0)


def act(u, S: float) -> np.ndarray:
    """Thresholded unit-vector output: u/|u| when |u| >= S, else zero."""
    u = np.asarray(u, dtype=np.float64)
    n = float(np.linalg.norm(u))
    if n >= S:
        return u / n
    return np.zeros_like(u)


def tracking_input(z, z_star, k1: float, eps: float) -> np.ndarray:
    """Softly normalised pull toward the reference point."""
    z = np.asarray(z, dtype=np.float64)
    z_star = np.asarray(z_star, dtype=np.float64)
    e = z_star - z
    return k1 * e / (eps + float(np.linalg.norm(e)))


def obstacle_input(z, obstacles, k2: float) -> np.ndarray:
    """Inverse-distance repulsion summed over obstacle points."""
    z = np.asarray(z, dtype=np.float64)
    out = np.zeros_like(z)
    for j, zo in enumerate(obstacles):
        d = z - np.asarray(zo, dtype=np.float64)
        d2 = float(np.dot(d, d))
        if d2 < 1e-18:
            raise ObstacleSingularity(float("nan"), j)
        out += k2 * d / d2
    return out


def _deriv(y: np.ndarray, z_star: np.ndarray, p: NavParams) -> np.ndarray:
    v = tracking_input(y[0:2], z_star, p.k1, p.eps) + obstacle_input(
        y[0:2], p.obstacles, p.k2
    )
    u = y[4:6]
    un2 = float(np.dot(u, u))
    a = act(u, p.S)
    c = (1.0 + y[6]) - p.ctrl.beta1 * un2 + p.ctrl.beta2 * un2 * un2
    out = np.empty(7)
    out[0:2] = y[2:4]
    out[2:4] = -p.gamma * y[2:4] + p.alpha_act * a
    out[4:6] = (-c * u + v) / p.ctrl.tau
    out[6] = (-y[6] + p.ctrl.beta3 * un2 * un2) / p.ctrl.tau_s
    return out


def step_nav(s: RobotState, z_star, p: NavParams, dt: float) -> RobotState:
    """One RK4 step of the loop with the reference point held constant.

    The activation and the command field are re-evaluated at every stage
    state, matching run_scenario's integrator exactly.
    """
    if not (math.isfinite(dt) and 0 < dt <= p.ctrl.tau / 20.0 * (1 + 1e-12)):
        raise ValueError(f"dt must be in (0, tau/20], got {dt!r}")
    z_star = np.asarray(z_star, dtype=np.float64)
    y = np.concatenate([s.z, s.zdot, s.u, [s.u_s]])
    k1 = _deriv(y, z_star, p)
    k2 = _deriv(y + 0.5 * dt * k1, z_star, p)
    k3 = _deriv(y + 0.5 * dt * k2, z_star, p)
    k4 = _deriv(y + dt * k3, z_star, p)
    y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return RobotState(z=y[0:2], zdot=y[2:4], u=y[4:6], u_s=float(y[6]))


@dataclass
class NavTrajectory:
    """Subsampled record of a navigation run (one row per output_dt)."""

    t: np.ndarray
    z: np.ndarray
    zdot: np.ndarray
    u: np.ndarray
    u_s: np.ndarray
    act: np.ndarray
    z_star: np.ndarray


@dataclass
class NavMetrics:
    """Run summary: actuation duty cycle, worst tracking error after the
    transient, and the closest approach to each obstacle."""

    duty_cycle: float
    max_tracking_error_after_transient: float
    min_clearance_per_obstacle: list[float] = field(default_factory=list)
    transient: float = 10.0

    def to_dict(self) -> dict:
        return {
            "duty_cycle": self.duty_cycle,
            "max_tracking_error_after_transient": self.max_tracking_error_after_transient,
            "min_clearance_per_obstacle": self.min_clearance_per_obstacle,
            "transient": self.transient,
        }


def run_scenario(sc: NavScenario) -> tuple[NavTrajectory, NavMetrics]:
    """Integrate a scenario and collect its metrics.

    The reference is sampled at the start of each step and held (so the run
    is a pure function of the scenario).  Clearances and the duty cycle are
    accumulated at every integration step, not just recorded samples.
    """
    p = sc.params
    if not (0 < sc.dt <= p.ctrl.tau / 20.0 * (1 + 1e-12)):
        raise ValueError(f"dt = {sc.dt!r} must be in (0, tau/20]")
    stride_f = sc.output_dt / sc.dt
    stride = int(round(stride_f))
    if stride < 1 or abs(stride_f - stride) > 1e-9 * stride:
        raise ValueError(
            f"output_dt ({sc.output_dt}) must be an integer multiple of dt ({sc.dt})"
        )
    n_steps = int(round(sc.t_end / sc.dt))
    if n_steps % stride != 0:
        raise ValueError("t_end must be an integer multiple of output_dt")

    s0 = sc.initial_state()
    y0 = np.concatenate([s0.z, s0.zdot, s0.u, [s0.u_s]])
    obst = np.asarray(p.obstacles, dtype=np.float64).reshape(-1, 2)

    out, min_clear, active, counted, max_err, status = _kernels.nav_run(
        y0, obst, p.gamma, p.alpha_act, p.S, p.k1, p.k2, p.eps,
        p.ctrl.tau, p.ctrl.tau_s, p.ctrl.beta1, p.ctrl.beta2, p.ctrl.beta3,
        sc.path.radius0, sc.path.radius_rate, sc.path.angle0, sc.path.angle_rate,
        0.0, sc.dt, n_steps, stride, sc.transient, _NAV_GUARD,
    )
    if status <= -10:
        j = -(status + 10)
        raise ObstacleSingularity(float("nan"), j)
    if status >= 0:
        raise IntegrationBlowup(status * sc.dt, float(np.max(np.abs(out[-1, 1:8]))), _NAV_GUARD)

    traj = NavTrajectory(
        t=out[:, 0].copy(),
        z=out[:, 1:3].copy(),
        zdot=out[:, 3:5].copy(),
        u=out[:, 5:7].copy(),
        u_s=out[:, 7].copy(),
        act=out[:, 8:10].copy(),
        z_star=out[:, 10:12].copy(),
    )
    metrics = NavMetrics(
        duty_cycle=active / counted if counted else 0.0,
        max_tracking_error_after_transient=float(max_err),
        min_clearance_per_obstacle=[float(v) for v in min_clear],
        transient=sc.transient,
    )
    return traj, metrics


_NAV_COLUMNS = "t,z_x,z_y,zdot_x,zdot_y,u_x,u_y,u_s,act_x,act_y,zstar_x,zstar_y"


def write_nav_csv(traj: NavTrajectory, path, meta: dict | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if meta:
            for key in sorted(meta):
                fh.write(f"# {key}={meta[key]}\n")
        fh.write(_NAV_COLUMNS + "\n")
        for k in range(traj.t.shape[0]):
            row = [
                traj.t[k],
                traj.z[k, 0], traj.z[k, 1],
                traj.zdot[k, 0], traj.zdot[k, 1],
                traj.u[k, 0], traj.u[k, 1],
                traj.u_s[k],
                traj.act[k, 0], traj.act[k, 1],
                traj.z_star[k, 0], traj.z_star[k, 1],
            ]
            fh.write(",".join(fmt_float(v) for v in row) + "\n")


def write_metrics_json(metrics: NavMetrics, path, meta: dict | None = None) -> None:
    doc = metrics.to_dict()
    if meta:
        doc["config"] = {k: meta[k] for k in sorted(meta)}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
