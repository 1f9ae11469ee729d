"""Boundary-distance weight families and a local-integrability surrogate check.

The diffusion coefficient w multiplies the flux of the operator
-div(w grad u).  It may degenerate (w -> 0) or become singular (w -> inf)
at the boundary.  Every admissible family here is a composition
w(x) = tau(d(x)) of a one-dimensional profile tau with the distance d to
the boundary.  The profiles:

    constant      tau(t) = 1
    power         tau(t) = t**alpha,                -1 < alpha < N-1
    power-log     tau(t) = t**alpha * log(2+1/t)**beta_log,  beta_log > 0
    log-negative  tau(t) = log(2+1/t)**(-alpha),    alpha > 0
    exp-deficit   tau(t) = 1 - exp(a_exp*t),        a_exp < 0, N > 2

The weighted Sobolev machinery needs 1/w to be locally integrable.  That
cannot be certified by finitely many integrals, so ``check_b2`` evaluates a
surrogate: composite quadrature of 1/w over one compact subset
{d >= margin}, accepted only when the estimate is stable under refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryEvaluationError, DomainError, ParameterError

_FAMILY_TAGS = ("constant", "power", "power-log", "log-negative", "exp-deficit")


@dataclass(frozen=True)
class WeightFamily:
    """One boundary-distance weight profile tau with its parameters."""

    tag: str
    alpha: float = 0.0
    beta_log: float = 0.0
    a_exp: float = 0.0

    def __post_init__(self):
        if self.tag not in _FAMILY_TAGS:
            raise ParameterError(f"unknown weight family tag {self.tag!r}")
        if self.tag in ("power", "power-log") and self.alpha <= -1.0:
            raise ParameterError(
                f"power-type profile needs alpha > -1; got alpha={self.alpha}"
            )
        if self.tag == "power-log" and self.beta_log <= 0.0:
            raise ParameterError(
                f"power-log profile needs beta_log > 0; got beta_log={self.beta_log}"
            )
        if self.tag == "log-negative" and self.alpha <= 0.0:
            raise ParameterError(
                f"log-negative profile needs alpha > 0; got alpha={self.alpha}"
            )
        if self.tag == "exp-deficit" and self.a_exp >= 0.0:
            raise ParameterError(
                f"exp-deficit profile needs a_exp < 0; got a_exp={self.a_exp}"
            )

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls) -> "WeightFamily":
        return cls("constant")

    @classmethod
    def power(cls, alpha: float) -> "WeightFamily":
        return cls("power", alpha=alpha)

    @classmethod
    def power_log(cls, alpha: float, beta_log: float) -> "WeightFamily":
        return cls("power-log", alpha=alpha, beta_log=beta_log)

    @classmethod
    def log_negative(cls, alpha: float) -> "WeightFamily":
        return cls("log-negative", alpha=alpha)

    @classmethod
    def exp_deficit(cls, a_exp: float) -> "WeightFamily":
        return cls("exp-deficit", a_exp=a_exp)

    # -- evaluation ---------------------------------------------------
    def validate_for_dimension(self, n_dim: int) -> None:
        """Check the dimension-dependent part of the admissible range."""
        if self.tag in ("power", "power-log") and not self.alpha < n_dim - 1:
            raise ParameterError(
                f"power-type profile needs alpha < N-1 = {n_dim - 1}; "
                f"got alpha={self.alpha}"
            )
        if self.tag == "exp-deficit" and n_dim <= 2:
            raise ParameterError("exp-deficit profile needs dimension N > 2")

    def tau(self, t):
        """Raw profile evaluation; callers guard the t=0 endpoint."""
        t = np.asarray(t, dtype=float)
        if self.tag == "constant":
            return np.ones_like(t)
        if self.tag == "power":
            return t**self.alpha
        if self.tag == "power-log":
            return t**self.alpha * np.log(2.0 + 1.0 / t) ** self.beta_log
        if self.tag == "log-negative":
            return np.log(2.0 + 1.0 / t) ** (-self.alpha)
        # exp-deficit
        return 1.0 - np.exp(self.a_exp * t)

    def finite_positive_at_zero(self) -> bool:
        """True when tau extends continuously to a positive value at t = 0."""
        if self.tag == "constant":
            return True
        return self.tag == "power" and self.alpha == 0.0


@dataclass(frozen=True)
class InteriorVanishingWeight:
    """Test weight |x - center|**power vanishing at an interior point.

    Not a boundary-distance composition: it exists to give the
    local-integrability check a genuine failing case (1/w is not locally
    integrable across the degeneracy point when power >= 1).  Only
    ``check_b2`` consumes it.
    """

    center: float
    power: float = 1.0

    def __post_init__(self):
        if self.power <= 0.0:
            raise ParameterError(f"vanishing order must be positive; got {self.power}")

    def value(self, x):
        return np.abs(np.asarray(x, dtype=float) - self.center) ** self.power


@dataclass(frozen=True)
class Domain:
    """Radial geometry: an interval (0, R) or a ball of radius R in R^N."""

    kind: str
    R: float
    N: int = 1
    center: float = 0.0

    def __post_init__(self):
        if self.kind not in ("interval", "ball"):
            raise ParameterError(f"unknown domain kind {self.kind!r}")
        if not self.R > 0.0:
            raise ParameterError(f"radius R must be positive; got R={self.R}")
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"dimension N must be a positive integer; got {self.N}")
        if self.kind == "interval" and self.N != 1:
            raise ParameterError("interval domains force N = 1")

    @classmethod
    def interval(cls, R: float) -> "Domain":
        return cls("interval", R=R, N=1)

    @classmethod
    def ball(cls, R: float, N: int, center: float = 0.0) -> "Domain":
        return cls("ball", R=R, N=N, center=center)


def distance_to_boundary(domain: Domain, x) -> float:
    """Distance from a point to the boundary, in the radial convention.

    Ball: R - |x - center| with x a point in R^N (scalars are broadcast).
    Interval: returns R - x, the gap to the blow-up end r = R.  The
    two-sided geometric distance would be min(x, R - x); the radial
    discretisation measures everything against the right endpoint, so the
    one-sided convention is used throughout.
    """
    if domain.kind == "ball":
        offset = np.atleast_1d(np.asarray(x, dtype=float)) - domain.center
        r = float(np.linalg.norm(offset))
        if r > domain.R:
            raise DomainError(f"point at radius {r} lies outside the ball of radius {domain.R}")
        return domain.R - r
    x = float(x)
    if x < 0.0 or x > domain.R:
        raise DomainError(f"point {x} lies outside the interval (0, {domain.R})")
    return domain.R - x


def eval_weight(family: WeightFamily, d) -> np.ndarray | float:
    """Evaluate w = tau(d) at boundary gaps d > 0.

    Evaluation at d = 0 is refused whenever the profile is singular or
    degenerates there; discrete schemes only ever evaluate w at interior
    half-nodes, so the endpoint is never needed.
    """
    arr = np.asarray(d, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < 0.0):
        raise BoundaryEvaluationError("boundary gap d must be nonnegative")
    if np.any(arr == 0.0) and not family.finite_positive_at_zero():
        raise BoundaryEvaluationError(
            f"{family.tag} weight cannot be evaluated at the boundary (d = 0)"
        )
    out = family.tau(arr)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class B2Report:
    """Outcome of the local-integrability surrogate."""

    passes: bool
    integral_estimate: float
    relative_change: float
    divergent: bool


def _midpoint(f, a: float, b: float, n: int) -> float:
    x = a + (b - a) * (np.arange(n) + 0.5) / n
    return float((b - a) / n * np.sum(f(x)))


def check_b2(weight, domain: Domain, margin: float, quad_nodes: int = 256) -> B2Report:
    """Integrate 1/w over the compact subset {d >= margin} with refinement.

    Composite midpoint quadrature at quad_nodes, 2*quad_nodes and
    4*quad_nodes points; the check passes when the finest estimate is
    finite and the last refinement moved it by less than 1e-3 relative.
    A monotone-growing sequence whose increments do not shrink is flagged
    divergent (the signature of a non-integrable 1/w).  This is a
    surrogate for local integrability, not a proof.
    """
    if not 0.0 < margin < domain.R:
        raise ParameterError(f"margin must lie in (0, R); got margin={margin}, R={domain.R}")
    if quad_nodes < 16:
        raise ParameterError(f"quad_nodes must be at least 16; got {quad_nodes}")

    if isinstance(weight, InteriorVanishingWeight):
        if domain.kind != "interval":
            raise ParameterError("interior-vanishing test weights live on intervals")

        def integrand(x):
            return 1.0 / weight.value(x)

        a, b = margin, domain.R - margin
    elif domain.kind == "ball":
        weight.validate_for_dimension(domain.N)

        def integrand(r):
            return r ** (domain.N - 1) / weight.tau(domain.R - r)

        a, b = 0.0, domain.R - margin
    else:
        weight.validate_for_dimension(domain.N)

        def integrand(x):
            return 1.0 / weight.tau(np.minimum(x, domain.R - x))

        a, b = margin, domain.R - margin

    with np.errstate(divide="ignore", over="ignore"):
        estimates = [_midpoint(integrand, a, b, quad_nodes * k) for k in (1, 2, 4)]

    if not all(np.isfinite(estimates)):
        return B2Report(False, estimates[-1], math.inf, True)

    rel = abs(estimates[2] - estimates[1]) / max(abs(estimates[2]), 1e-300)
    passes = rel < 1e-3
    increments = (estimates[1] - estimates[0], estimates[2] - estimates[1])
    divergent = (not passes) and increments[1] > 0.0 and increments[1] > 0.5 * increments[0]
    return B2Report(passes, estimates[2], rel, divergent)


@dataclass(frozen=True)
class A2Report:
    """Outcome of the two-sided (Muckenhoupt-style) average surrogate."""

    passes: bool
    a2_estimate: float
    divergent: bool


def _refined_integral(f, a: float, b: float, n: int):
    """Midpoint estimates at n, 2n, 4n, 8n cells with a divergence verdict.

    Convergent-but-singular integrands (t**(-s), s < 1) have increments
    shrinking by 2**(s-1) per doubling, a logarithmic divergence keeps them
    constant, and a power divergence grows them; the increment ratio
    separates the three without needing a rate-specific tolerance.
    """
    estimates = [_midpoint(f, a, b, n * k) for k in (1, 2, 4, 8)]
    if not all(math.isfinite(e) for e in estimates):
        return math.inf, True
    d = [estimates[i + 1] - estimates[i] for i in range(3)]
    drift = abs(d[-1]) / max(abs(estimates[-1]), 1e-300)
    same_sign = d[0] * d[1] > 0.0 and d[1] * d[2] > 0.0
    ratios = [abs(d[i + 1]) / max(abs(d[i]), 1e-300) for i in range(2)]
    divergent = same_sign and drift > 1e-10 and min(ratios) >= 0.97
    return estimates[-1], divergent


def check_a2(family: WeightFamily, R: float = 1.0, levels: int = 6, quad_nodes: int = 256) -> A2Report:
    """Two-sided average surrogate over boundary-touching gap intervals.

    For the one-dimensional profile tau on the boundary gap, estimates

        avg_I(tau) * avg_I(1/tau),   I = (0, R / 2**k),  k = 0..levels-1,

    and reports the largest product.  Divergence of either average on any
    interval fails the check: the two-sided class is strictly smaller than
    integrability of 1/w alone (tau(t) = t**1.9 passes the latter in three
    dimensions but fails here).  Nothing downstream gates on this check;
    it is recorded next to the local-integrability surrogate because the
    nested-domain limit argument assumes the stronger two-sided class.
    Near the endpoints of an admissible range the quadrature converges
    slowly and deeper refinement may be needed; this is a desk-scale
    surrogate, not a proof.
    """
    if R <= 0.0:
        raise ParameterError(f"R must be positive; got {R}")
    if quad_nodes < 16:
        raise ParameterError(f"quad_nodes must be at least 16; got {quad_nodes}")
    worst = 0.0
    with np.errstate(divide="ignore", over="ignore"):
        for k in range(levels):
            b = R / 2.0**k
            direct, div_direct = _refined_integral(family.tau, 0.0, b, quad_nodes)
            recip, div_recip = _refined_integral(lambda t: 1.0 / family.tau(t), 0.0, b, quad_nodes)
            if div_direct or div_recip:
                return A2Report(False, math.inf, True)
            worst = max(worst, (direct / b) * (recip / b))
    return A2Report(True, worst, False)


def catalogue_families(n_dim: int = 3) -> list[tuple[str, WeightFamily]]:
    """Representative admissible profiles for each family, for sweeps.

    Labels stay comma-free so they can sit in CSV cells unquoted.
    """
    upper = n_dim - 1
    return [
        ("constant", WeightFamily.constant()),
        ("power(-0.9)", WeightFamily.power(-0.9)),
        ("power(0.5)", WeightFamily.power(0.5)),
        (f"power({upper - 0.1:g})", WeightFamily.power(upper - 0.1)),
        ("power-log(0.5;1)", WeightFamily.power_log(0.5, 1.0)),
        ("power-log(-0.5;2)", WeightFamily.power_log(-0.5, 2.0)),
        ("log-negative(1)", WeightFamily.log_negative(1.0)),
        ("exp-deficit(-1)", WeightFamily.exp_deficit(-1.0)),
    ]
