"""Phase-plane analysis of the radial system: nullclines, equilibria with
stability, spiking-threshold location and excitability classification, plus
the closed-form alignment check for the full system under constant input.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NormVanished, ThresholdBracketError
from .model import ModelParams, adaptation, envelope_constants
from .simulate import (
    DetectorConfig,
    ReducedState,
    Trajectory,
    detect_spikes,
    fi_curve,
    simulate_reduced,
)
from .vectors import as_vector

__all__ = [
    "EquilibriumKind",
    "EquilibriumPoint",
    "NullclineCurve",
    "reduced_rhs",
    "nullcline_r",
    "nullcline_xs",
    "jacobian",
    "classify_point",
    "find_equilibria",
    "ThresholdReport",
    "threshold_scan",
    "FICurveReport",
    "classify_type",
    "AlignmentReport",
    "alignment_check",
    "write_report_txt",
    "write_jsonl",
]


class EquilibriumKind(str, Enum):
    STABLE_NODE = "stable_node"
    STABLE_FOCUS = "stable_focus"
    UNSTABLE_NODE = "unstable_node"
    UNSTABLE_FOCUS = "unstable_focus"
    SADDLE = "saddle"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class EquilibriumPoint:
    """Fixed point of the radial system with its linearisation."""

    r: float
    x_s: float
    eigenvalues: tuple[complex, complex]
    kind: EquilibriumKind

    @property
    def is_stable(self) -> bool:
        return max(ev.real for ev in self.eigenvalues) < 0.0

    @property
    def max_real_part(self) -> float:
        return max(ev.real for ev in self.eigenvalues)

    def to_record(self, u_tilde: float) -> dict:
        return {
            "u_tilde": u_tilde,
            "r": self.r,
            "x_s": self.x_s,
            "kind": self.kind.value,
            "re_lambda": [ev.real for ev in self.eigenvalues],
            "im_lambda": [ev.imag for ev in self.eigenvalues],
        }


@dataclass
class NullclineCurve:
    """Sampled curve x_s(r) along which one component of the flow vanishes."""

    name: str
    r: np.ndarray
    x_s: np.ndarray


def reduced_rhs(r, x_s, u_tilde: float, p: ModelParams):
    """Right-hand side (dr/dt, dx_s/dt) of the radial system.  Array-safe."""
    r = np.asarray(r, dtype=np.float64)
    x_s = np.asarray(x_s, dtype=np.float64)
    r2 = r * r
    f1 = (-((1.0 + x_s) - p.beta1 * r2 + p.beta2 * r2 * r2) * r + p.alpha * u_tilde) / p.tau
    f2 = (-x_s + p.beta3 * r2 * r2) / p.tau_s
    return f1, f2


def nullcline_r(u_tilde: float, p: ModelParams, r_grid) -> NullclineCurve:
    """x_s values where dr/dt = 0, as a function of r.

    Solving the radial balance for x_s requires r > 0 when u_tilde > 0, so
    grid entries at r = 0 are dropped in that case.
    """
    r = np.asarray(r_grid, dtype=np.float64)
    if u_tilde != 0.0:
        r = r[r > 0.0]
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = r * r
        xs = p.alpha * u_tilde / np.where(r == 0.0, np.nan, r) - 1.0 + p.beta1 * r2 - p.beta2 * r2 * r2
        xs = np.where(r == 0.0, 0.0, xs)
    return NullclineCurve(name="dr_dt=0", r=r, x_s=xs)


def nullcline_xs(p: ModelParams, r_grid) -> NullclineCurve:
    """x_s values where dx_s/dt = 0: the adaptation target curve."""
    r = np.asarray(r_grid, dtype=np.float64)
    return NullclineCurve(name="dx_s_dt=0", r=r, x_s=np.asarray(adaptation(r, p)))


def jacobian(r: float, x_s: float, p: ModelParams) -> np.ndarray:
    """Linearisation of the radial system at (r, x_s)."""
    r2 = r * r
    j11 = (-(1.0 + x_s) + 3.0 * p.beta1 * r2 - 5.0 * p.beta2 * r2 * r2) / p.tau
    j12 = -r / p.tau
    j21 = 4.0 * p.beta3 * r2 * r / p.tau_s
    j22 = -1.0 / p.tau_s
    return np.array([[j11, j12], [j21, j22]])


def _eig2(J: np.ndarray) -> tuple[complex, complex]:
    tr = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    disc = tr * tr / 4.0 - det
    if disc >= 0.0:
        s = math.sqrt(disc)
        return complex(tr / 2.0 - s, 0.0), complex(tr / 2.0 + s, 0.0)
    s = math.sqrt(-disc)
    return complex(tr / 2.0, -s), complex(tr / 2.0, s)


def classify_point(r: float, x_s: float, p: ModelParams) -> EquilibriumPoint:
    """Eigenvalues and local type of a fixed point of the radial system."""
    J = jacobian(r, x_s, p)
    ev = _eig2(J)
    scale = max(abs(J[0, 0]), abs(J[1, 1]), 1.0)
    max_re = max(e.real for e in ev)
    if abs(max_re) < 1e-9 * scale:
        kind = EquilibriumKind.DEGENERATE
    elif ev[0].imag != 0.0:
        kind = EquilibriumKind.STABLE_FOCUS if max_re < 0 else EquilibriumKind.UNSTABLE_FOCUS
    else:
        det = ev[0].real * ev[1].real
        if det < 0:
            kind = EquilibriumKind.SADDLE
        elif max_re < 0:
            kind = EquilibriumKind.STABLE_NODE
        else:
            kind = EquilibriumKind.UNSTABLE_NODE
    return EquilibriumPoint(r=r, x_s=x_s, eigenvalues=ev, kind=kind)


def _balance(r: np.ndarray, u_tilde: float, p: ModelParams) -> np.ndarray:
    """Scalar equilibrium condition along the slow manifold x_s = g(r):
    value is alpha*u_tilde - [(1 + g(r)) r - beta1 r^3 + beta2 r^5]."""
    r2 = r * r
    g = p.beta3 * r2 * r2
    return p.alpha * u_tilde - ((1.0 + g) - p.beta1 * r2 + p.beta2 * r2 * r2) * r


def find_equilibria(u_tilde: float, p: ModelParams, n_scan: int = 10_000) -> list[EquilibriumPoint]:
    """All fixed points of the radial system for a constant input, sorted by r.

    Substituting the slow nullcline into the radial balance leaves a scalar
    root problem on r >= 0; roots are bracketed by a sign scan over
    [0, 1 + (b + alpha*u_tilde)/a] and polished by bisection.
    """
    if not (np.isfinite(u_tilde) and u_tilde >= 0.0):
        raise ValueError(f"u_tilde must be finite and >= 0, got {u_tilde!r}")
    a, b = envelope_constants(p)
    r_max = 1.0 + (b + p.alpha * u_tilde) / a
    grid = np.linspace(0.0, r_max, n_scan)
    vals = _balance(grid, u_tilde, p)

    roots: list[float] = []
    if vals[0] == 0.0:
        roots.append(0.0)
    for i in range(len(grid) - 1):
        lo, hi = vals[i], vals[i + 1]
        if hi == 0.0:
            if i + 1 < len(grid) - 1:
                roots.append(float(grid[i + 1]))
            continue
        if lo * hi < 0.0:
            r_lo, r_hi = float(grid[i]), float(grid[i + 1])
            f_lo = lo
            for _ in range(60):
                mid = 0.5 * (r_lo + r_hi)
                f_mid = float(_balance(np.asarray([mid]), u_tilde, p)[0])
                if f_mid == 0.0:
                    r_lo = r_hi = mid
                    break
                if f_lo * f_mid < 0.0:
                    r_hi = mid
                else:
                    r_lo, f_lo = mid, f_mid
                if r_hi - r_lo < 1e-13:
                    break
            roots.append(0.5 * (r_lo + r_hi))

    out = []
    for r in roots:
        x_s = float(adaptation(r, p))
        out.append(classify_point(r, x_s, p))
    return sorted(out, key=lambda e: e.r)


@dataclass
class ThresholdReport:
    """Input window of sustained spiking for one parameter set.

    u_lower / u_upper are in input units (multiply by alpha for effective
    drive).  lower_mechanism records whether the resting branch ended in a
    fold or lost stability in place.  The trace-Hopf entries give the input
    at which the full linearisation's complex pair crosses the axis, kept
    alongside the reported thresholds for reference.
    """

    params: ModelParams
    u_range: tuple[float, float]
    tol: float
    u_lower: float
    u_upper: float
    lower_mechanism: str
    u_lower_trace_hopf: float | None
    u_upper_trace_hopf: float | None
    confirmed_quiescent_above: bool
    confirmed_spiking_inside: bool

    def to_dict(self) -> dict:
        return {
            "u_lower": self.u_lower,
            "u_upper": self.u_upper,
            "alpha_u_lower": self.params.alpha * self.u_lower,
            "alpha_u_upper": self.params.alpha * self.u_upper,
            "lower_mechanism": self.lower_mechanism,
            "u_lower_trace_hopf": self.u_lower_trace_hopf,
            "u_upper_trace_hopf": self.u_upper_trace_hopf,
            "confirmed_quiescent_above": self.confirmed_quiescent_above,
            "confirmed_spiking_inside": self.confirmed_spiking_inside,
            "u_range": list(self.u_range),
            "tol": self.tol,
        }


def _bisect_flip(pred, u_false: float, u_true: float, tol: float) -> float:
    """Bisect the flip point of a boolean predicate between two inputs."""
    lo, hi = u_false, u_true
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _rest_gate(scans: list[list[EquilibriumPoint]]) -> float | None:
    """Radius separating the resting branch from the outer branch, derived
    from the scans where three equilibria coexist.  None when the branch
    structure never folds (single-branch families)."""
    low_max = None
    high_min = None
    for eqs in scans:
        if len(eqs) >= 3:
            low_max = eqs[0].r if low_max is None else max(low_max, eqs[0].r)
            high_min = eqs[-1].r if high_min is None else min(high_min, eqs[-1].r)
    if low_max is None or high_min is None or high_min <= low_max:
        return None
    return 0.5 * (low_max + high_min)


def _fast_eig(e: EquilibriumPoint, p: ModelParams) -> float:
    """Fast-subsystem eigenvalue of a fixed point (the radial slope at
    frozen x_s), which controls stability in the slow-fast limit."""
    r2 = e.r * e.r
    return -(1.0 + e.x_s) + 3.0 * p.beta1 * r2 - 5.0 * p.beta2 * r2 * r2


def _trace(e: EquilibriumPoint, p: ModelParams) -> float:
    return _fast_eig(e, p) / p.tau - 1.0 / p.tau_s


def threshold_scan(
    p: ModelParams,
    u_range: tuple[float, float],
    tol: float = 1e-3,
    n_scan: int = 257,
    confirm: bool = True,
    dt: float | None = None,
    t_end: float = 240.0,
    detector: DetectorConfig | None = None,
) -> ThresholdReport:
    """Locate the input window (u_lower, u_upper) of sustained spiking.

    u_lower is where the resting branch stops being an attractor: the fold
    at which it collides with the separatrix branch when the equilibrium
    curve is S-shaped, otherwise the Hopf point of the single branch.
    u_upper is where the outer branch regains fast-subsystem stability (the
    knee of the radial nullcline, which is the Hopf point in the slow-fast
    limit); above it adaptation can no longer push the state off the branch
    and spiking stops.  Both are refined by bisection to tol and the upper
    threshold is confirmed by a from-rest run just above it.
    """
    u_lo, u_hi = float(u_range[0]), float(u_range[1])
    if not (0.0 <= u_lo < u_hi):
        raise ValueError(f"u_range must satisfy 0 <= lo < hi, got {u_range!r}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    grid = np.linspace(u_lo, u_hi, n_scan)
    scans = [find_equilibria(float(u), p) for u in grid]
    gate = _rest_gate(scans)

    def rest_exists(u: float) -> bool:
        eqs = find_equilibria(u, p)
        return any(e.r <= gate for e in eqs)

    def low_branch_stable(u: float) -> bool:
        eqs = find_equilibria(u, p)
        return eqs[0].max_real_part < 0.0

    def top_fast_stable(u: float) -> bool:
        eqs = find_equilibria(u, p)
        return _fast_eig(eqs[-1], p) < 0.0

    def top_trace_negative(u: float) -> bool:
        eqs = find_equilibria(u, p)
        return _trace(eqs[-1], p) < 0.0

    # Lower threshold: fold takes priority; otherwise stability of the branch.
    u_lower = None
    mechanism = None
    if gate is not None:
        flags = [any(e.r <= gate for e in eqs) for eqs in scans]
        if not flags[0]:
            raise ThresholdBracketError(
                f"no resting equilibrium at u_range start u={u_lo:.6g}; "
                f"equilibria radii: {[round(e.r, 4) for e in scans[0]]}"
            )
        for i in range(len(grid) - 1):
            if flags[i] and not flags[i + 1]:
                u_lower = _bisect_flip(
                    lambda u: not rest_exists(u), float(grid[i]), float(grid[i + 1]), tol
                )
                mechanism = "fold"
                break
    if u_lower is None:
        flags = [eqs[0].max_real_part < 0.0 for eqs in scans]
        if not flags[0]:
            raise ThresholdBracketError(
                f"resting branch already unstable at u={u_lo:.6g}; "
                "extend u_range downward"
            )
        for i in range(len(grid) - 1):
            if flags[i] and not flags[i + 1]:
                u_lower = _bisect_flip(
                    lambda u: not low_branch_stable(u), float(grid[i]), float(grid[i + 1]), tol
                )
                mechanism = "hopf"
                break
    if u_lower is None:
        raise ThresholdBracketError(
            f"resting branch keeps its attractor over u_range {u_range!r}: "
            "the range is entirely below the spiking window"
        )

    # Upper threshold: last point where the outer branch regains fast
    # stability while sweeping up.
    fast_flags = [_fast_eig(eqs[-1], p) < 0.0 for eqs in scans]
    if not fast_flags[-1]:
        raise ThresholdBracketError(
            f"outer branch still unstable at u_range end u={u_hi:.6g}; "
            "extend u_range upward past the spiking window"
        )
    u_upper = None
    for i in range(len(grid) - 1, 0, -1):
        if fast_flags[i] and not fast_flags[i - 1]:
            u_upper = _bisect_flip(top_fast_stable, float(grid[i - 1]), float(grid[i]), tol)
            break
    if u_upper is None or u_upper <= u_lower:
        raise ThresholdBracketError(
            f"no spiking window found in u_range {u_range!r}"
        )

    # Reference trace-Hopf locations (exact linearisation) near each end.
    low_stab_flags = [eqs[0].max_real_part < 0.0 for eqs in scans]
    u_lower_trace = None
    for i in range(len(grid) - 1):
        if low_stab_flags[i] and not low_stab_flags[i + 1]:
            u_lower_trace = _bisect_flip(
                lambda u: not low_branch_stable(u), float(grid[i]), float(grid[i + 1]), tol
            )
            break
    trace_flags = [_trace(eqs[-1], p) < 0.0 for eqs in scans]
    u_upper_trace = None
    for i in range(len(grid) - 1, 0, -1):
        if trace_flags[i] and not trace_flags[i - 1]:
            u_upper_trace = _bisect_flip(
                top_trace_negative, float(grid[i - 1]), float(grid[i]), tol
            )
            break

    confirmed_above = True
    confirmed_inside = True
    if confirm:
        det = detector or DetectorConfig()
        if dt is None:
            dt = p.tau / 50.0
        margin = max(2.0 * tol, 0.01 * (u_upper - u_lower))

        def steady_count(u: float) -> int:
            traj = simulate_reduced(ReducedState(0.0, 0.0), u, p, dt=dt, t_end=t_end)
            train = detect_spikes(
                traj, r_up=det.r_up, r_down=det.r_down,
                steady_window=det.steady_frac * (traj.t_end - traj.t0),
            )
            return train.n_steady

        confirmed_above = steady_count(u_upper + margin) == 0
        confirmed_inside = steady_count(0.5 * (u_lower + u_upper)) >= 3

    return ThresholdReport(
        params=p,
        u_range=(u_lo, u_hi),
        tol=tol,
        u_lower=u_lower,
        u_upper=u_upper,
        lower_mechanism=mechanism,
        u_lower_trace_hopf=u_lower_trace,
        u_upper_trace_hopf=u_upper_trace,
        confirmed_quiescent_above=confirmed_above,
        confirmed_spiking_inside=confirmed_inside,
    )


@dataclass
class FICurveReport:
    """Firing-rate picture of one parameter set: thresholds, sampled
    (input, rate) points and the excitability label with its evidence."""

    params: ModelParams
    thresholds: ThresholdReport
    points: list[tuple[float, float]] = field(default_factory=list)
    excitability_type: str = "Unclassified"
    f_onset: float = 0.0
    f_mid: float = 0.0
    freq_ratio_mid: float = 0.0
    onset_persistence: float = 0.0
    min_spiking_frequency: float = 0.0

    def to_dict(self) -> dict:
        d = self.thresholds.to_dict()
        d.update(
            {
                "points": [[u, f] for u, f in self.points],
                "excitability_type": self.excitability_type,
                "f_onset": self.f_onset,
                "f_mid": self.f_mid,
                "freq_ratio_mid": self.freq_ratio_mid,
                "onset_persistence": self.onset_persistence,
                "min_spiking_frequency": self.min_spiking_frequency,
            }
        )
        return d


# Classification cutoffs, calibrated on the two reference parameter sets.
# The onset mechanism carries the distinction: a resting branch that ends
# in a fold gives continuous onset (the rate still creeps toward zero, if
# only logarithmically, so near threshold it is a small fraction of the
# mid-window rate), while a branch that loses stability in place gives a
# finite rate floor the moment spiking starts.
_RATIO_MID_CONTINUOUS_MAX = 0.3
_MIN_RATE_FLOOR = 0.02


def classify_type(
    p: ModelParams,
    u_range: tuple[float, float],
    tol: float = 1e-3,
    dt: float | None = None,
    t_end: float = 400.0,
    detector: DetectorConfig | None = None,
    threads: int = 1,
) -> FICurveReport:
    """Label a parameter set TypeI or TypeII from its onset behaviour.

    The onset mechanism found by threshold_scan (fold versus in-place Hopf)
    decides the candidate label; the steady rates probed just above the
    lower threshold (1%, 2%, 5% above) and at mid-window must then back it
    up: a fold onset must show a near-threshold rate well below the
    mid-window rate, a Hopf onset must show a finite rate floor right at
    threshold.  Evidence that contradicts the mechanism yields
    Unclassified rather than a guess.
    """
    scan = threshold_scan(
        p, u_range, tol=tol, confirm=True, dt=dt, detector=detector
    )
    u_lo, u_hi = scan.u_lower, scan.u_upper
    probes = [u_lo * (1.0 + eps) for eps in (0.01, 0.02, 0.05)]
    probes.append(0.5 * (u_lo + u_hi))
    pts = fi_curve(p, probes, dt=dt, t_end=t_end, detector=detector, threads=threads)
    f01, f02, f05, f_mid = (f for _, f in pts)

    ratio_mid = f01 / f_mid if f_mid > 0 else 0.0
    onset = f01 / f05 if f05 > 0 else 0.0
    positive = [f for _, f in pts if f > 0]
    label = "Unclassified"
    if f01 > 0.0 and f_mid > 0.0:
        if scan.lower_mechanism == "fold" and ratio_mid < _RATIO_MID_CONTINUOUS_MAX:
            label = "TypeI"
        elif scan.lower_mechanism == "hopf" and f01 >= _MIN_RATE_FLOOR:
            label = "TypeII"

    return FICurveReport(
        params=p,
        thresholds=scan,
        points=pts,
        excitability_type=label,
        f_onset=f01,
        f_mid=f_mid,
        freq_ratio_mid=ratio_mid,
        onset_persistence=onset,
        min_spiking_frequency=min(positive) if positive else 0.0,
    )


@dataclass
class AlignmentReport:
    """Agreement between the measured alignment cos(x(t), u) and its
    closed-form solution for constant input."""

    max_abs_residual: float
    final_cos: float
    initial_cos: float
    monotone: bool
    n_samples: int


def alignment_check(traj: Trajectory, u, p: ModelParams) -> AlignmentReport:
    """Compare cos(x(t), u) against tanh(atanh(cos0) + (alpha|u|/tau) I(t))
    where I(t) is the running integral of 1/|x|.

    Requires a full-system trajectory under the constant input u, a nonzero
    initial state not anti-parallel to u, and |x(t)| > 0 throughout (raises
    NormVanished otherwise).  The running integral is trapezoidal, so the
    residual floor scales with dt**2.
    """
    if traj.kind != "full" or traj.x is None:
        raise ValueError("alignment_check needs a full-system trajectory")
    u_vec = as_vector(u, "u")
    u_norm = float(np.linalg.norm(u_vec))
    if u_norm == 0.0:
        raise ValueError("alignment_check needs a nonzero input vector")

    r = traj.r
    zero = np.where(r == 0.0)[0]
    if zero.size:
        raise NormVanished(float(traj.times[zero[0]]))

    cos = (traj.x @ u_vec) / (r * u_norm)
    np.clip(cos, -1.0, 1.0, out=cos)
    cos0 = float(cos[0])
    if cos0 <= -1.0 + 1e-12:
        raise ValueError("initial state anti-parallel to input: alignment undefined")

    inv_r = 1.0 / r
    dt = traj.dt
    integral = np.concatenate(
        [[0.0], np.cumsum(0.5 * dt * (inv_r[1:] + inv_r[:-1]))]
    )
    c0 = math.atanh(min(cos0, 1.0 - 1e-16)) if cos0 < 1.0 else math.inf
    predicted = np.tanh(c0 + (p.alpha * u_norm / p.tau) * integral)
    residual = float(np.max(np.abs(cos - predicted)))
    monotone = bool(np.all(np.diff(cos) >= -1e-10))
    return AlignmentReport(
        max_abs_residual=residual,
        final_cos=float(cos[-1]),
        initial_cos=cos0,
        monotone=monotone,
        n_samples=int(r.shape[0]),
    )


def write_report_txt(path, mapping: dict) -> None:
    """Flat key=value report, keys sorted, one per line."""
    from .simulate import fmt_float

    with open(path, "w") as fh:
        for key in sorted(mapping):
            v = mapping[key]
            if isinstance(v, float):
                v = fmt_float(v)
            fh.write(f"{key}={v}\n")


def write_jsonl(path, records: list[dict]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True))
            fh.write("\n")
