"""Radially symmetric double-well potential with slow adaptation.

The fast state x lives in R^n and relaxes down a potential V(|x|, x_s)
whose shape is controlled by a slow scalar x_s.  For x_s between the two
pitchfork thresholds the radial section of V has wells at r = 0 and at an
outer radius, which is what makes the system excitable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NoSubcriticalWindow

__all__ = [
    "ModelParams",
    "potential",
    "radial_grad",
    "full_grad",
    "adaptation",
    "pitchfork_thresholds",
    "envelope_constants",
    "frozen_radial_equilibria",
    "GradientEnvelopeReport",
    "check_gradient_envelope",
    "BistableStructureReport",
    "check_bistable_structure",
]

# tau_s/tau ratios below this still integrate fine but the slow/fast
# separation arguments degrade, so we warn rather than reject.
_TIMESCALE_WARN_RATIO = 5.0


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the potential, the adaptation law and the input gain.

    tau and tau_s are the fast and slow time constants, alpha the input
    gain, beta1/beta2 the quartic/sextic well coefficients and beta3 the
    adaptation gain.
    """

    tau: float
    tau_s: float
    alpha: float
    beta1: float
    beta2: float
    beta3: float

    def __post_init__(self):
        for name in ("tau", "tau_s", "alpha", "beta1", "beta2"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite positive number, got {value!r}")
        if not (isinstance(self.beta3, (int, float)) and math.isfinite(self.beta3) and self.beta3 >= 0):
            raise ValueError(f"beta3 must be finite and >= 0, got {self.beta3!r}")
        if self.tau_s <= self.tau:
            raise ValueError(
                f"tau_s ({self.tau_s}) must exceed tau ({self.tau}): "
                "adaptation must be the slow variable"
            )
        if self.tau_s / self.tau < _TIMESCALE_WARN_RATIO:
            warnings.warn(
                f"tau_s/tau = {self.tau_s / self.tau:.3g} < {_TIMESCALE_WARN_RATIO}; "
                "slow/fast separation is weak and threshold estimates may drift",
                stacklevel=2,
            )


def potential(r, x_s, p: ModelParams):
    """Radial section of the potential, V(r, x_s).  Accepts array r."""
    r = np.asarray(r, dtype=np.float64)
    r2 = r * r
    return 0.5 * (1.0 + x_s) * r2 - 0.25 * p.beta1 * r2 * r2 + (p.beta2 / 6.0) * r2 * r2 * r2


def radial_grad(r, x_s, p: ModelParams):
    """dV/dr along the radial direction.  Accepts array r."""
    r = np.asarray(r, dtype=np.float64)
    r2 = r * r
    return ((1.0 + x_s) - p.beta1 * r2 + p.beta2 * r2 * r2) * r


def full_grad(x, x_s: float, p: ModelParams) -> np.ndarray:
    """Gradient of V(|x|, x_s) with respect to the full state x.

    Uses the factored form c(|x|^2, x_s) * x, which is smooth at x = 0
    where |x| itself is not differentiable.
    """
    x = np.asarray(x, dtype=np.float64)
    r2 = float(np.dot(x, x))
    c = (1.0 + x_s) - p.beta1 * r2 + p.beta2 * r2 * r2
    return c * x


def adaptation(r, p: ModelParams):
    """Target of the slow variable as a function of radius.  Accepts array r."""
    r = np.asarray(r, dtype=np.float64)
    r2 = r * r
    return p.beta3 * r2 * r2


def pitchfork_thresholds(p: ModelParams) -> tuple[float, float]:
    """x_s values bounding the bistable window of the frozen radial flow.

    Below the lower threshold the origin is unstable; above the upper one
    only the origin remains.  Requires beta1**2 > 4*beta2, otherwise the
    outer well never exists and there is no window.
    """
    if p.beta1 * p.beta1 <= 4.0 * p.beta2:
        raise NoSubcriticalWindow(
            f"beta1**2 = {p.beta1**2:.6g} must exceed 4*beta2 = {4 * p.beta2:.6g}"
        )
    return -1.0, p.beta1 * p.beta1 / (4.0 * p.beta2) - 1.0


def envelope_constants(p: ModelParams) -> tuple[float, float]:
    """Constants (a, b) of the linear envelope -dV/dr <= -a*r + b for x_s >= 0.

    a = 1 comes from the confining quadratic term; b is the maximum of the
    destabilising cubic-minus-quintic part, attained at r^2 = 3*beta1/(5*beta2).
    """
    a = 1.0
    b = (2.0 * p.beta1 / 5.0) * (3.0 * p.beta1 / (5.0 * p.beta2)) ** 1.5
    return a, b


def frozen_radial_equilibria(x_s: float, p: ModelParams) -> tuple[list[float], list[float]]:
    """Equilibrium radii of the frozen radial flow at fixed x_s.

    Returns (stable, unstable) radii sorted ascending.  Closed form: the
    nonzero equilibria solve beta2*rho**2 - beta1*rho + (1 + x_s) = 0 in
    rho = r**2.
    """
    stable: list[float] = []
    unstable: list[float] = []
    if 1.0 + x_s > 0:
        stable.append(0.0)
    else:
        unstable.append(0.0)
    disc = p.beta1 * p.beta1 - 4.0 * p.beta2 * (1.0 + x_s)
    if disc >= 0.0:
        sq = math.sqrt(disc)
        rho_minus = (p.beta1 - sq) / (2.0 * p.beta2)
        rho_plus = (p.beta1 + sq) / (2.0 * p.beta2)
        if rho_plus > 0:
            stable.append(math.sqrt(rho_plus))
        if rho_minus > 0 and rho_minus != rho_plus:
            unstable.append(math.sqrt(rho_minus))
    return sorted(stable), sorted(unstable)


@dataclass(frozen=True)
class GradientEnvelopeReport:
    """Result of the numerical envelope check on the radial gradient."""

    a: float
    b: float
    r_peak: float
    h_bound: float
    envelope_margin: float
    local_bound_margin: float
    holds: bool


def check_gradient_envelope(
    p: ModelParams,
    r_max: float = 4.0,
    x_s_max: float = 2.0,
    n_r: int = 2001,
    n_xs: int = 41,
) -> GradientEnvelopeReport:
    """Verify the two growth bounds the boundedness results rely on.

    On a grid over r in [0, r_max], x_s in [0, x_s_max] checks that
    -dV/dr <= -a*r + b, and that |dV/dr| <= h * r for r <= r_max with
    h = (1 + x_s_max) + beta2 * r_max**4.  Margins are the minimum slack
    observed; both must be >= 0 (up to rounding) for the report to hold.
    """
    a, b = envelope_constants(p)
    r = np.linspace(0.0, r_max, n_r)
    xs = np.linspace(0.0, x_s_max, n_xs)
    grad = radial_grad(r[None, :], xs[:, None], p)

    envelope_margin = float(np.min((-a * r + b)[None, :] + grad))
    h = (1.0 + x_s_max) + p.beta2 * r_max**4
    local_bound_margin = float(np.min(h * r[None, :] - np.abs(grad)))

    tol = 1e-12
    return GradientEnvelopeReport(
        a=a,
        b=b,
        r_peak=math.sqrt(3.0 * p.beta1 / (5.0 * p.beta2)),
        h_bound=h,
        envelope_margin=envelope_margin,
        local_bound_margin=local_bound_margin,
        holds=(envelope_margin >= -tol and local_bound_margin >= -tol),
    )


@dataclass(frozen=True)
class BistableStructureReport:
    """Well counts of the frozen radial flow across the adaptation range."""

    x_s_lower: float
    x_s_upper: float
    bistable_inside: bool
    monostable_above: bool
    origin_unstable_below: bool
    outer_radius_decreasing: bool
    holds: bool


def check_bistable_structure(p: ModelParams, n_xs: int = 201) -> BistableStructureReport:
    """Check the well structure in each x_s regime of the frozen flow.

    Inside the window the flow must have exactly two stable radii (0 and an
    outer one); above it only 0; below it the origin must be unstable with a
    single outer attractor.  Also checks the outer radius shrinks as x_s
    grows, which is what lets adaptation terminate a spike.
    """
    lo, hi = pitchfork_thresholds(p)
    margin = 1e-6 * max(1.0, abs(hi - lo))

    inside = np.linspace(lo + margin, hi - margin, n_xs)
    bistable = True
    outer = []
    for x_s in inside:
        stable, unstable = frozen_radial_equilibria(float(x_s), p)
        if len(stable) != 2 or stable[0] != 0.0 or len(unstable) != 1:
            bistable = False
            break
        outer.append(stable[1])
    outer_decreasing = bistable and all(b < a for a, b in zip(outer, outer[1:]))

    above = np.linspace(hi + margin, hi + 1.0, 17)
    monostable = all(
        frozen_radial_equilibria(float(x_s), p) == ([0.0], []) for x_s in above
    )

    below = np.linspace(lo - 1.0, lo - margin, 17)
    origin_unstable = True
    for x_s in below:
        stable, unstable = frozen_radial_equilibria(float(x_s), p)
        if len(stable) != 1 or stable[0] == 0.0 or 0.0 not in unstable:
            origin_unstable = False
            break

    return BistableStructureReport(
        x_s_lower=lo,
        x_s_upper=hi,
        bistable_inside=bistable,
        monostable_above=monostable,
        origin_unstable_below=origin_unstable,
        outer_radius_decreasing=outer_decreasing,
        holds=bistable and monostable and origin_unstable and outer_decreasing,
    )
