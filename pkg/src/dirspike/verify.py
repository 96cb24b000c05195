"""Randomised property suites for the dynamical guarantees: dimension
reduction of the norm, the closed-form alignment law, and the eventual
norm window under strong input.  Used by `dirspike verify` and the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch  # noqa: F401  (re-exported for callers)
from .model import ModelParams, envelope_constants
from .simulate import FullState, ReducedState, simulate_full, simulate_reduced
from .analysis import alignment_check

__all__ = [
    "CheckResult",
    "norm_reduction_suite",
    "riccati_suite",
    "norm_bounds_suite",
    "run_suite",
    "SUITES",
]

_P_DEFAULT = ModelParams(tau=0.1, tau_s=1.0, alpha=0.1, beta1=3.0, beta2=1.5, beta3=1.5)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n)
    nv = np.linalg.norm(v)
    while nv < 1e-12:
        v = rng.normal(size=n)
        nv = np.linalg.norm(v)
    return v / nv


def _orthogonal_unit(rng: np.random.Generator, q: np.ndarray) -> np.ndarray:
    w = rng.normal(size=q.shape[0])
    w -= np.dot(w, q) * q
    nw = np.linalg.norm(w)
    while nw < 1e-9:
        w = rng.normal(size=q.shape[0])
        w -= np.dot(w, q) * q
        nw = np.linalg.norm(w)
    return w / nw


def _piecewise_levels(rng: np.random.Generator, n_steps: int, dt: float, scale: float) -> np.ndarray:
    """Piecewise-constant nonnegative input samples with 0.5-2 s segments."""
    out = np.empty(n_steps)
    k = 0
    while k < n_steps:
        seg = max(1, int(rng.uniform(0.5, 2.0) / dt))
        out[k : k + seg] = abs(rng.normal()) * scale
        k += seg
    return out


def norm_reduction_suite(
    seed: int = 0,
    dims: tuple[int, ...] = (2, 3, 5, 10),
    runs_per_dim: int = 5,
    p: ModelParams = _P_DEFAULT,
    t_end: float = 20.0,
    tol: float = 1e-9,
) -> list[CheckResult]:
    """When the state starts on the input ray, the full-system norm must
    match the radial system driven by the same scalar samples."""
    results = []
    dt = p.tau / 50.0
    n_steps = int(round(t_end / dt))
    a, b = envelope_constants(p)
    scale = b / p.alpha
    for n in dims:
        worst = 0.0
        for i in range(runs_per_dim):
            rng = np.random.default_rng(seed * 100_003 + n * 1009 + i)
            q = _unit(rng, n)
            r0 = abs(rng.normal()) * 0.5
            xs0 = abs(rng.normal()) * 0.5
            ut = _piecewise_levels(rng, n_steps, dt, scale)
            full = simulate_full(
                FullState(x=r0 * q, x_s=xs0), ut[:, None] * q[None, :], p,
                dt=dt, t_end=t_end,
            )
            red = simulate_reduced(ReducedState(r=r0, x_s=xs0), ut, p, dt=dt, t_end=t_end)
            worst = max(worst, float(np.max(np.abs(full.r - red.r))))
        results.append(
            CheckResult(
                name=f"norm-reduction n={n}",
                passed=worst <= tol,
                detail=f"max |norm - radius| = {worst:.3e} (tol {tol:.1e})",
            )
        )
    return results


def riccati_suite(
    seed: int = 0,
    dims: tuple[int, ...] = (2, 3),
    runs_per_dim: int = 4,
    p: ModelParams = _P_DEFAULT,
    t_end: float = 10.0,
    residual_tol: float = 1e-3,
    final_cos_min: float = 0.999,
) -> list[CheckResult]:
    """Under constant strong input the alignment cos(x(t), u) must follow
    its closed-form tanh solution, grow monotonically and saturate at 1."""
    results = []
    # The residual floor is the trapezoidal error of the running 1/|x|
    # integral, so this suite runs at a finer step than the default.
    dt = p.tau / 200.0
    a, b = envelope_constants(p)
    u_norm = 2.0 * b / p.alpha
    for n in dims:
        worst_res = 0.0
        worst_final = 1.0
        all_monotone = True
        for i in range(runs_per_dim):
            rng = np.random.default_rng(seed * 55_001 + n * 211 + i)
            u_hat = _unit(rng, n)
            w_hat = _orthogonal_unit(rng, u_hat)
            cos0 = rng.uniform(-0.8, 0.95)
            x0 = 0.5 * (cos0 * u_hat + np.sqrt(1.0 - cos0 * cos0) * w_hat)
            u = u_norm * u_hat
            traj = simulate_full(FullState(x=x0, x_s=0.0), u, p, dt=dt, t_end=t_end)
            rep = alignment_check(traj, u, p)
            worst_res = max(worst_res, rep.max_abs_residual)
            worst_final = min(worst_final, rep.final_cos)
            all_monotone = all_monotone and rep.monotone
        results.append(
            CheckResult(
                name=f"riccati n={n}",
                passed=(worst_res <= residual_tol and worst_final >= final_cos_min and all_monotone),
                detail=(
                    f"max residual {worst_res:.3e} (tol {residual_tol:.1e}), "
                    f"min final cos {worst_final:.6f}, monotone={all_monotone}"
                ),
            )
        )
    return results


def norm_bounds_suite(
    seed: int = 0,
    dims: tuple[int, ...] = (2, 5),
    factors: tuple[float, ...] = (1.1, 1.5, 2.0),
    p: ModelParams = _P_DEFAULT,
    t_end: float = 60.0,
    tol: float = 1e-9,
) -> list[CheckResult]:
    """For |u| above b/alpha the norm must eventually enter and stay in
    [(alpha|u| - b)/h, (alpha|u| + b)/a]; h is the local slope bound at the
    largest radius the window allows."""
    results = []
    dt = p.tau / 50.0
    a, b = envelope_constants(p)
    for n in dims:
        for fac in factors:
            rng = np.random.default_rng(seed * 77_003 + n * 37 + int(fac * 100))
            u_hat = _unit(rng, n)
            u_norm = fac * b / p.alpha
            x0 = 0.3 * _unit(rng, n)
            traj = simulate_full(
                FullState(x=x0, x_s=0.0), u_norm * u_hat, p, dt=dt, t_end=t_end
            )
            upper = (b + p.alpha * u_norm) / a
            r_bar = upper
            h = (1.0 + p.beta3 * r_bar**4) + p.beta2 * r_bar**4
            lower = (p.alpha * u_norm - b) / h
            tail = traj.r[traj.r.shape[0] // 2 :]
            lo, hi = float(np.min(tail)), float(np.max(tail))
            ok = lo >= lower - tol and hi <= upper + tol
            results.append(
                CheckResult(
                    name=f"norm-bounds n={n} |u|={fac:.1f}b/alpha",
                    passed=ok,
                    detail=(
                        f"tail range [{lo:.4f}, {hi:.4f}] within "
                        f"[{lower:.4f}, {upper:.4f}]"
                    ),
                )
            )
    return results


SUITES = {
    "norm-reduction": norm_reduction_suite,
    "riccati": riccati_suite,
    "norm-bounds": norm_bounds_suite,
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name == "all":
        out = []
        for fn in SUITES.values():
            out.extend(fn(seed=seed))
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite '{name}'; choose from {sorted(SUITES)} or 'all'")
    return SUITES[name](seed=seed)
