"""Fixed-step integration of the full and radial systems, spike detection,
and the frequency-input sweep.

Inputs are zero-order held over each RK4 step, so every run is a pure
function of (initial state, input samples, params, dt) and repeated runs
are bit-identical.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .errors import IntegrationBlowup
from .model import ModelParams, envelope_constants

__all__ = [
    "FullState",
    "ReducedState",
    "Trajectory",
    "SpikeTrain",
    "DetectorConfig",
    "step_full",
    "step_reduced",
    "simulate_full",
    "simulate_reduced",
    "detect_spikes",
    "fi_curve",
    "write_trajectory_csv",
    "write_spikes_json",
    "fmt_float",
]

DEFAULT_R_UP = 0.8
DEFAULT_R_DOWN = 0.4
DEFAULT_STEADY_FRAC = 0.6

# Margin on the eventual-norm bound used as a divergence guard.  RK4 with
# dt <= tau/20 keeps trajectories far below this unless the step is unstable.
_GUARD_FACTOR = 10.0


@dataclass(frozen=True)
class FullState:
    """State of the n-dimensional system: fast vector x and slow scalar x_s."""

    x: np.ndarray
    x_s: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        if x.ndim != 1 or x.size == 0 or not np.all(np.isfinite(x)):
            raise ValueError("x must be a finite non-empty 1-D array")
        if not (np.isfinite(self.x_s) and self.x_s >= 0.0):
            raise ValueError(f"x_s must be finite and >= 0, got {self.x_s!r}")
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class ReducedState:
    """State of the radial system: radius r >= 0 and slow scalar x_s."""

    r: float
    x_s: float

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r >= 0.0):
            raise ValueError(f"r must be finite and >= 0, got {self.r!r}")
        if not (np.isfinite(self.x_s) and self.x_s >= 0.0):
            raise ValueError(f"x_s must be finite and >= 0, got {self.x_s!r}")


@dataclass(frozen=True)
class DetectorConfig:
    """Hysteresis thresholds and steady-window fraction for spike detection."""

    r_up: float = DEFAULT_R_UP
    r_down: float = DEFAULT_R_DOWN
    steady_frac: float = DEFAULT_STEADY_FRAC

    def __post_init__(self):
        if not 0.0 < self.r_down < self.r_up:
            raise ValueError("need 0 < r_down < r_up")
        if not 0.0 < self.steady_frac <= 1.0:
            raise ValueError("steady_frac must be in (0, 1]")


@dataclass
class Trajectory:
    """Uniformly sampled run.  r holds |x| for full runs, the radius for
    reduced runs; x/u are None for reduced runs, u_tilde for full runs."""

    kind: str
    t0: float
    dt: float
    r: np.ndarray
    x_s: np.ndarray
    x: np.ndarray | None = None
    u: np.ndarray | None = None
    u_tilde: np.ndarray | None = None

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.r.shape[0])

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.r.shape[0] - 1)


@dataclass
class SpikeTrain:
    """Spikes of a run: up-crossing times, widths above the upper threshold,
    inter-spike intervals, and the steady-state rate over the tail window."""

    spike_times: list[float] = field(default_factory=list)
    widths: list[float] = field(default_factory=list)
    isis: list[float] = field(default_factory=list)
    steady_spike_times: list[float] = field(default_factory=list)
    steady_frequency: float = 0.0

    @property
    def n_spikes(self) -> int:
        return len(self.spike_times)

    @property
    def n_steady(self) -> int:
        return len(self.steady_spike_times)

    def to_dict(self) -> dict:
        return {
            "spike_times": self.spike_times,
            "widths": self.widths,
            "isis": self.isis,
            "steady_spike_times": self.steady_spike_times,
            "steady_frequency": self.steady_frequency,
            "n_spikes": self.n_spikes,
            "n_steady": self.n_steady,
        }


def _check_dt(dt: float, p: ModelParams) -> None:
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be finite and positive, got {dt!r}")
    if dt > p.tau / 20.0 * (1.0 + 1e-12):
        raise ValueError(
            f"dt = {dt:.6g} exceeds tau/20 = {p.tau / 20.0:.6g}; the fast "
            "subsystem would be under-resolved"
        )


def _n_steps(t0: float, t_end: float, dt: float) -> int:
    if not t_end > t0:
        raise ValueError(f"t_end ({t_end}) must exceed t0 ({t0})")
    n = int(round((t_end - t0) / dt))
    return max(n, 1)


def _sample_vector_input(input_u, n_steps: int, n: int | None, t0: float, dt: float) -> np.ndarray:
    """Build the (n_steps, n) per-step input table from a callable, a
    constant vector, or a pre-tabulated array (n_steps or n_steps+1 rows)."""
    if callable(input_u):
        first = np.asarray(input_u(t0), dtype=np.float64)
        if first.ndim != 1:
            raise ValueError("input callable must return a 1-D vector")
        dim = first.shape[0] if n is None else n
        out = np.empty((n_steps, dim))
        out[0] = first
        for k in range(1, n_steps):
            out[k] = np.asarray(input_u(t0 + k * dt), dtype=np.float64)
    else:
        arr = np.asarray(input_u, dtype=np.float64)
        if arr.ndim == 1:
            out = np.broadcast_to(arr, (n_steps, arr.shape[0])).copy()
        elif arr.ndim == 2 and arr.shape[0] in (n_steps, n_steps + 1):
            out = np.ascontiguousarray(arr[:n_steps])
        else:
            raise ValueError(
                f"input array must have shape (n,) or ({n_steps}, n) or "
                f"({n_steps + 1}, n), got {arr.shape}"
            )
    if n is not None and out.shape[1] != n:
        raise ValueError(f"input dimension {out.shape[1]} does not match state dimension {n}")
    if not np.all(np.isfinite(out)):
        raise ValueError("input samples contain non-finite values")
    return out


def _sample_scalar_input(input_u, n_steps: int, t0: float, dt: float) -> np.ndarray:
    if callable(input_u):
        out = np.fromiter(
            (float(input_u(t0 + k * dt)) for k in range(n_steps)), dtype=np.float64, count=n_steps
        )
    else:
        arr = np.asarray(input_u, dtype=np.float64)
        if arr.ndim == 0:
            out = np.full(n_steps, float(arr))
        elif arr.ndim == 1 and arr.shape[0] in (n_steps, n_steps + 1):
            out = np.ascontiguousarray(arr[:n_steps])
        else:
            raise ValueError(
                f"scalar input must be a number or have length {n_steps} or "
                f"{n_steps + 1}, got shape {arr.shape}"
            )
    if not np.all(np.isfinite(out)):
        raise ValueError("input samples contain non-finite values")
    return out


def _guard(p: ModelParams, u_max: float) -> float:
    a, b = envelope_constants(p)
    return _GUARD_FACTOR * (b + p.alpha * u_max) / a


def step_full(s: FullState, u, p: ModelParams, dt: float) -> FullState:
    """One RK4 step of the full system with input held constant."""
    _check_dt(dt, p)
    u_arr = np.asarray(u, dtype=np.float64).reshape(1, -1)
    if u_arr.shape[1] != s.x.shape[0]:
        raise ValueError("input dimension does not match state dimension")
    X, XS, blow = _kernels.full_run(
        s.x, s.x_s, u_arr, p.tau, p.tau_s, p.alpha, p.beta1, p.beta2, p.beta3,
        dt, np.inf,
    )
    return FullState(x=X[1], x_s=float(XS[1]))


def step_reduced(s: ReducedState, u_tilde: float, p: ModelParams, dt: float) -> ReducedState:
    """One RK4 step of the radial system with scalar input held constant."""
    _check_dt(dt, p)
    R, XS, blow = _kernels.reduced_run_const(
        s.r, s.x_s, float(u_tilde), 1, p.tau, p.tau_s, p.alpha,
        p.beta1, p.beta2, p.beta3, dt, np.inf,
    )
    return ReducedState(r=float(R[1]), x_s=float(XS[1]))


def simulate_full(
    s0: FullState,
    input_u,
    p: ModelParams,
    dt: float | None = None,
    t_end: float = 10.0,
    t0: float = 0.0,
) -> Trajectory:
    """Integrate the full system from s0 to t_end.

    input_u may be a callable t -> vector, a constant vector, or an array of
    per-step samples.  Raises IntegrationBlowup if |x| exceeds the eventual
    bound by a wide margin, which indicates an unstable step size or input.
    """
    if dt is None:
        dt = p.tau / 50.0
    _check_dt(dt, p)
    n_steps = _n_steps(t0, t_end, dt)
    n = s0.x.shape[0]
    u = _sample_vector_input(input_u, n_steps, n, t0, dt)
    u_max = float(np.max(np.sqrt(np.sum(u * u, axis=1))))
    guard = _guard(p, u_max)

    X, XS, blow = _kernels.full_run(
        s0.x, s0.x_s, u, p.tau, p.tau_s, p.alpha, p.beta1, p.beta2, p.beta3,
        dt, guard,
    )
    if blow >= 0:
        r_blow = float(np.linalg.norm(X[blow]))
        raise IntegrationBlowup(t0 + blow * dt, r_blow, guard)

    u_rows = np.vstack([u, u[-1:]])
    r = np.sqrt(np.sum(X * X, axis=1))
    return Trajectory(kind="full", t0=t0, dt=dt, r=r, x_s=XS, x=X, u=u_rows)


def simulate_reduced(
    s0: ReducedState,
    u_tilde,
    p: ModelParams,
    dt: float | None = None,
    t_end: float = 10.0,
    t0: float = 0.0,
) -> Trajectory:
    """Integrate the radial system from s0 to t_end.

    u_tilde may be a callable t -> float, a number, or an array of per-step
    samples.  It is the signed projection of the vector input on the state
    direction, so it may be negative.
    """
    if dt is None:
        dt = p.tau / 50.0
    _check_dt(dt, p)
    n_steps = _n_steps(t0, t_end, dt)
    ut = _sample_scalar_input(u_tilde, n_steps, t0, dt)
    guard = _guard(p, float(np.max(np.abs(ut))))

    R, XS, blow = _kernels.reduced_run(
        s0.r, s0.x_s, ut, p.tau, p.tau_s, p.alpha, p.beta1, p.beta2, p.beta3,
        dt, guard,
    )
    if blow >= 0:
        raise IntegrationBlowup(t0 + blow * dt, float(R[blow]), guard)

    ut_rows = np.concatenate([ut, ut[-1:]])
    return Trajectory(kind="reduced", t0=t0, dt=dt, r=R, x_s=XS, u_tilde=ut_rows)


def _crossing_time(t_lo: float, t_hi: float, v_lo: float, v_hi: float, level: float) -> float:
    if v_hi == v_lo:
        return t_hi
    frac = (level - v_lo) / (v_hi - v_lo)
    return t_lo + frac * (t_hi - t_lo)


def detect_spikes(
    traj: Trajectory,
    r_up: float = DEFAULT_R_UP,
    r_down: float = DEFAULT_R_DOWN,
    steady_window: float | None = None,
) -> SpikeTrain:
    """Hysteresis spike detection on the norm/radius series of a run.

    A spike starts when r crosses r_up from below (time found by linear
    interpolation) and ends at the next down-crossing of r_down; dips below
    r_up that stay above r_down do not split a spike.  Width is the time
    spent at or above r_up within the spike.  steady_window is the length
    of the tail window (defaults to the final 60% of the run) over which
    the steady rate is 1/mean(ISI); fewer than 3 spikes there give rate 0.
    """
    if not 0.0 < r_down < r_up:
        raise ValueError("need 0 < r_down < r_up")
    r = traj.r
    t = traj.times
    duration = traj.t_end - traj.t0
    if steady_window is None:
        steady_window = DEFAULT_STEADY_FRAC * duration
    if not 0.0 < steady_window <= duration + 1e-12:
        raise ValueError("steady_window must lie in (0, run duration]")

    spike_times: list[float] = []
    widths: list[float] = []
    in_spike = r[0] >= r_up
    above_up = in_spike
    t_above = t[0] if above_up else 0.0
    width_acc = 0.0
    if in_spike:
        spike_times.append(float(t[0]))

    for k in range(1, r.shape[0]):
        prev, cur = r[k - 1], r[k]
        if not in_spike:
            if prev < r_up <= cur:
                t_up = _crossing_time(t[k - 1], t[k], prev, cur, r_up)
                spike_times.append(float(t_up))
                in_spike = True
                above_up = True
                t_above = t_up
                width_acc = 0.0
        else:
            if above_up and cur < r_up:
                t_dn = _crossing_time(t[k - 1], t[k], prev, cur, r_up)
                width_acc += t_dn - t_above
                above_up = False
            elif not above_up and prev < r_up <= cur:
                t_above = _crossing_time(t[k - 1], t[k], prev, cur, r_up)
                above_up = True
            if cur < r_down:
                if above_up:
                    # ended without re-crossing r_up downward in this sample
                    width_acc += t[k] - t_above
                    above_up = False
                widths.append(float(width_acc))
                in_spike = False
    if in_spike:
        if above_up:
            width_acc += t[-1] - t_above
        widths.append(float(width_acc))

    isis = [b - a for a, b in zip(spike_times, spike_times[1:])]
    t_steady = traj.t_end - steady_window
    steady = [ts for ts in spike_times if ts >= t_steady]
    if len(steady) >= 3:
        mean_isi = (steady[-1] - steady[0]) / (len(steady) - 1)
        freq = 1.0 / mean_isi
    else:
        freq = 0.0
    return SpikeTrain(
        spike_times=spike_times,
        widths=widths,
        isis=isis,
        steady_spike_times=steady,
        steady_frequency=freq,
    )


def _fi_point(args) -> tuple[float, float]:
    u, p, dt, t_end, det = args
    traj = simulate_reduced(ReducedState(0.0, 0.0), u, p, dt=dt, t_end=t_end)
    train = detect_spikes(
        traj, r_up=det.r_up, r_down=det.r_down,
        steady_window=det.steady_frac * (traj.t_end - traj.t0),
    )
    return u, train.steady_frequency


def fi_curve(
    p: ModelParams,
    u_grid: Sequence[float],
    dt: float | None = None,
    t_end: float = 300.0,
    detector: DetectorConfig | None = None,
    threads: int = 1,
) -> list[tuple[float, float]]:
    """Steady firing rate of the radial system, from rest, per input level.

    Returns (u_tilde, frequency) pairs in grid order.  Runs are independent
    so they parallelise over threads (the integrator releases the GIL).
    """
    det = detector or DetectorConfig()
    if dt is None:
        dt = p.tau / 50.0
    jobs = [(float(u), p, dt, t_end, det) for u in u_grid]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_fi_point, jobs))
    return [_fi_point(j) for j in jobs]


def fmt_float(v: float) -> str:
    """Shortest round-trip decimal form used in all text outputs."""
    return f"{v:.17g}"


def _write_header(fh, meta: dict | None) -> None:
    if not meta:
        return
    for key in sorted(meta):
        fh.write(f"# {key}={meta[key]}\n")


def write_trajectory_csv(traj: Trajectory, path, meta: dict | None = None) -> None:
    """Write a run as CSV with `# key=value` header comments.

    Reduced runs have columns t,r,x_s,u_tilde; full runs have
    t,x_1..x_n,x_s,u_1..u_n.  The input columns hold the sample applied on
    the step starting at that row's time; the final row repeats the last.
    """
    t = traj.times
    with open(path, "w", newline="") as fh:
        _write_header(fh, meta)
        if traj.kind == "reduced":
            fh.write("t,r,x_s,u_tilde\n")
            for k in range(t.shape[0]):
                fh.write(
                    f"{fmt_float(t[k])},{fmt_float(traj.r[k])},"
                    f"{fmt_float(traj.x_s[k])},{fmt_float(traj.u_tilde[k])}\n"
                )
        else:
            n = traj.x.shape[1]
            cols = ["t"] + [f"x_{i + 1}" for i in range(n)] + ["x_s"] + [
                f"u_{i + 1}" for i in range(n)
            ]
            fh.write(",".join(cols) + "\n")
            for k in range(t.shape[0]):
                parts = [fmt_float(t[k])]
                parts += [fmt_float(v) for v in traj.x[k]]
                parts.append(fmt_float(traj.x_s[k]))
                parts += [fmt_float(v) for v in traj.u[k]]
                fh.write(",".join(parts) + "\n")


def write_spikes_json(train: SpikeTrain, path, meta: dict | None = None) -> None:
    doc = dict(train.to_dict())
    if meta:
        doc["config"] = {k: meta[k] for k in sorted(meta)}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
