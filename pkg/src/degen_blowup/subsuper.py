"""Explicit blow-up envelopes for the singular radial reaction problem.

The radial problem

    psi'' + ((N-1)/r - alpha/(R-r)) psi' = a(r) (R-r)**(gamma-alpha) psi**p

with psi'(0) = 0 and psi -> inf as r -> R admits solutions growing like
K * (R-r)**(-beta) at the boundary, where

    beta = (2 + gamma - alpha) / (p - 1)
    K    = (beta*(beta + 1 - alpha) / a(R)) ** (1/(p-1))

is the amplitude balancing the leading boundary terms.  This module builds
the two explicit one-parameter envelope families

    upper:  A + B_up  * (r/R)**2 * (R-r)**(-beta),   A > 0
    lower:  max(0, C + B_low * (r/R)**2 * (R-r)**(-beta)),   C < 0

whose amplitudes satisfy B_up**(p-1) * a(R) = (1+eps) * beta*(beta+1-alpha)
and B_low**(p-1) * a(R) = (1-eps) * beta*(beta+1-alpha), and verifies by
dense sampling the pointwise differential inequalities that make them an
upper and a lower barrier.  Multiplying the barrier condition through by
(R-r)**(beta+2) turns it into the polynomial comparison

    2N*B/R^2 * (R-r)^2 + ((3+N)*beta - 2*alpha)*B/R^2 * r*(R-r)
        + B*beta*(beta+1-alpha)*(r/R)^2   vs   a(r)*(c*(R-r)**beta + B*(r/R)^2)**p

(c = A for the upper barrier, c = C for the lower one), which is finite on
the closed interval [0, R] and is what the verifiers evaluate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ActivationRadiusError, DomainError, ParameterError

_BISECT_TOL = 1e-12


def blowup_exponent(p: float, alpha: float, gamma: float) -> float:
    """Boundary growth rate beta = (2 + gamma - alpha)/(p - 1)."""
    if p <= 1.0:
        raise ParameterError(f"superlinear power p > 1 required; got p={p}")
    if gamma - alpha < 0.0:
        raise ParameterError(f"gamma - alpha must be >= 0; got {gamma - alpha}")
    return (2.0 + gamma - alpha) / (p - 1.0)


def blowup_constant(p: float, alpha: float, a_R: float, beta: float) -> float:
    """Amplitude K = (beta*(beta+1-alpha)/a_R)**(1/(p-1)) of the boundary rate."""
    if p <= 1.0:
        raise ParameterError(f"superlinear power p > 1 required; got p={p}")
    if beta <= 0.0:
        raise ParameterError(f"growth rate beta must be positive; got beta={beta}")
    if beta + 1.0 - alpha <= 0.0:
        raise ParameterError(
            f"beta + 1 - alpha must be positive for the amplitude; got {beta + 1.0 - alpha}"
        )
    if a_R <= 0.0:
        raise ParameterError(f"reaction coefficient a(R) must be positive; got {a_R}")
    return (beta * (beta + 1.0 - alpha) / a_R) ** (1.0 / (p - 1.0))


def leading_balance_residual(p: float, alpha: float, gamma: float, B: float, a_R: float) -> float:
    """beta*(beta+1-alpha) - a_R * B**(p-1); zero exactly when B = K."""
    beta = blowup_exponent(p, alpha, gamma)
    return beta * (beta + 1.0 - alpha) - a_R * B ** (p - 1.0)


def _as_coefficient(a_coef) -> Callable[[np.ndarray], np.ndarray]:
    if callable(a_coef):
        return a_coef
    value = float(a_coef)
    return lambda r: np.full_like(np.asarray(r, dtype=float), value)


@dataclass(frozen=True)
class BlowupParams:
    """Data of the singular radial problem with power reaction."""

    p: float
    alpha: float
    gamma: float
    N: int
    R: float
    a_coef: object = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        if self.p <= 1.0:
            raise ParameterError(f"superlinear power p > 1 required; got p={self.p}")
        if self.gamma - self.alpha < 0.0:
            raise ParameterError(
                f"gamma - alpha must be >= 0; got {self.gamma - self.alpha}"
            )
        if not 0.0 < self.epsilon < 1.0:
            raise ParameterError(f"epsilon must lie in (0, 1); got {self.epsilon}")
        if self.R <= 0.0:
            raise ParameterError(f"radius R must be positive; got {self.R}")
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"dimension N must be a positive integer; got {self.N}")
        probe = self.a_at(np.linspace(0.0, self.R, 65))
        if not (np.all(np.isfinite(probe)) and np.all(probe > 0.0)):
            raise ParameterError("a(r) must be finite and positive on [0, R]")

    def a_at(self, r) -> np.ndarray:
        return np.asarray(_as_coefficient(self.a_coef)(np.asarray(r, dtype=float)), dtype=float)

    @property
    def a_R(self) -> float:
        return float(self.a_at(np.asarray(self.R)))

    @property
    def beta(self) -> float:
        return blowup_exponent(self.p, self.alpha, self.gamma)

    @property
    def K(self) -> float:
        return blowup_constant(self.p, self.alpha, self.a_R, self.beta)


def _envelope_amplitude(params: BlowupParams, factor: float) -> float:
    """Amplitude B with B**(p-1)*a(R) = factor * beta*(beta+1-alpha).

    factor = 1 + eps gives the upper envelope, 1 - eps the lower one; both
    collapse onto the balanced amplitude K as eps -> 0.
    """
    beta = params.beta
    if beta + 1.0 - params.alpha <= 0.0:
        raise ParameterError(
            f"beta + 1 - alpha must be positive; got {beta + 1.0 - params.alpha}"
        )
    return (factor * beta * (beta + 1.0 - params.alpha) / params.a_R) ** (
        1.0 / (params.p - 1.0)
    )


class _Envelope:
    """Shared evaluation of const + B*(r/R)^2*(R-r)^(-beta) profiles."""

    def _core(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if np.any(r >= self.R) or np.any(r < 0.0):
            raise DomainError("envelope evaluation needs 0 <= r < R (blow-up at r = R)")
        return self.shift + self.B * (r / self.R) ** 2 * (self.R - r) ** (-self.beta)

    def __call__(self, r):
        out = self.evaluate(np.asarray(r, dtype=float))
        return float(out) if np.ndim(r) == 0 else out


@dataclass(frozen=True)
class SuperSolution(_Envelope):
    """Upper barrier A + B*(r/R)^2*(R-r)^(-beta)."""

    A: float
    B: float
    beta: float
    R: float

    @property
    def shift(self) -> float:
        return self.A

    def evaluate(self, r) -> np.ndarray:
        return self._core(r)


@dataclass(frozen=True)
class SubSolution(_Envelope):
    """Lower barrier max(0, C + B*(r/R)^2*(R-r)^(-beta)).

    Vanishes identically on [0, activation_radius) and is positive,
    increasing beyond it.
    """

    C: float
    B: float
    beta: float
    R: float
    activation_radius: float

    @property
    def shift(self) -> float:
        return self.C

    def evaluate(self, r) -> np.ndarray:
        return np.maximum(0.0, self._core(r))


def build_supersolution(params: BlowupParams, A: float) -> SuperSolution:
    """Upper envelope with amplitude factor 1 + eps and vertical shift A > 0."""
    if A <= 0.0:
        raise ParameterError(f"shift A must be positive; got A={A}")
    B = _envelope_amplitude(params, 1.0 + params.epsilon)
    return SuperSolution(A=float(A), B=B, beta=params.beta, R=params.R)


def build_subsolution(params: BlowupParams, C: float) -> SubSolution:
    """Lower envelope with amplitude factor 1 - eps and shift C < 0.

    The activation radius is the unique root of C + B*(r/R)^2*(R-r)^(-beta)
    in (0, R); the profile is nondecreasing in r, so bisection converges
    unconditionally.  As C -> 0- the root slides to 0, as C -> -inf it
    approaches R.
    """
    if C >= 0.0:
        raise ParameterError(f"shift C must be negative; got C={C}")
    B = _envelope_amplitude(params, 1.0 - params.epsilon)
    beta, R = params.beta, params.R

    def profile(r: float) -> float:
        return C + B * (r / R) ** 2 * (R - r) ** (-beta)

    lo, hi = 0.0, R * (1.0 - 1e-13)
    if profile(hi) <= 0.0:
        raise ActivationRadiusError(
            f"activation radius not bracketed below r = {hi}: |C| = {abs(C)} too large"
        )
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if profile(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    c_bar = 0.5 * (lo + hi)
    return SubSolution(C=float(C), B=B, beta=beta, R=R, activation_radius=c_bar)


@dataclass(frozen=True)
class InequalityReport:
    ok: bool
    worst_margin: float
    worst_r: float


@dataclass(frozen=True)
class SubInequalityReport:
    """Both forms of the lower-barrier condition on [activation radius, R)."""

    ok: bool
    ok_full: bool
    worst_margin_full: float
    worst_r_full: float
    ok_sufficient: bool
    worst_margin_sufficient: float
    worst_r_sufficient: float


def _barrier_lhs(params: BlowupParams, B: float, r: np.ndarray) -> np.ndarray:
    """Polynomial form of the diffusion side of the barrier condition."""
    beta, N, R, alpha = params.beta, params.N, params.R, params.alpha
    return (
        2.0 * N * B / R**2 * (R - r) ** 2
        + (3.0 * beta + N * beta - 2.0 * alpha) * (B / R**2) * r * (R - r)
        + B * beta * (beta + 1.0 - alpha) * (r / R) ** 2
    )


def _barrier_rhs(params: BlowupParams, shift: float, B: float, r: np.ndarray) -> np.ndarray:
    """Reaction side a(r)*(shift*(R-r)^beta + B*(r/R)^2)^p, clamped at 0.

    The clamp only matters below the activation radius of a lower barrier,
    where the profile itself is cut off at zero.
    """
    base = shift * (params.R - r) ** params.beta + B * (r / params.R) ** 2
    return params.a_at(r) * np.maximum(base, 0.0) ** params.p


def super_inequality_margins(
    params: BlowupParams, A: float, samples: np.ndarray, B: float | None = None
) -> np.ndarray:
    """Margins rhs - lhs of the upper-barrier condition (>= 0 means barrier).

    B defaults to the 1+eps envelope amplitude; overriding it supports
    counterexample scans such as the balanced amplitude with A = 0.
    """
    samples = np.asarray(samples, dtype=float)
    if np.any(samples < 0.0) or np.any(samples > params.R):
        raise ParameterError("samples must lie in [0, R]")
    if B is None:
        B = _envelope_amplitude(params, 1.0 + params.epsilon)
    return _barrier_rhs(params, A, B, samples) - _barrier_lhs(params, B, samples)


def _refine_worst(margins_of, samples: np.ndarray, refine: int = 64):
    """Dense local re-scan around the coarsest worst margin."""
    margins = margins_of(samples)
    k = int(np.argmin(margins))
    lo = samples[max(k - 1, 0)]
    hi = samples[min(k + 1, samples.size - 1)]
    local = np.linspace(lo, hi, refine)
    local_margins = margins_of(local)
    j = int(np.argmin(local_margins))
    if local_margins[j] < margins[k]:
        return float(local_margins[j]), float(local[j])
    return float(margins[k]), float(samples[k])


def verify_super_inequality(
    params: BlowupParams, A: float, samples: np.ndarray, B: float | None = None
) -> InequalityReport:
    """Check the upper-barrier condition at all samples, refining the worst spot."""
    worst, worst_r = _refine_worst(
        lambda r: super_inequality_margins(params, A, r, B=B), np.asarray(samples, dtype=float)
    )
    return InequalityReport(ok=worst >= 0.0, worst_margin=worst, worst_r=worst_r)


def find_min_A(params: BlowupParams, samples: np.ndarray, A_grid=None) -> float | None:
    """Smallest shift in an increasing grid making the upper barrier hold.

    Near the boundary the 1+eps amplitude alone carries the condition; a
    large enough shift extends it to the whole interval.  Returns None when
    no grid entry passes.
    """
    if A_grid is None:
        A_grid = 2.0 ** np.arange(0, 16)
    A_grid = np.asarray(A_grid, dtype=float)
    if np.any(np.diff(A_grid) <= 0.0):
        raise ParameterError("A_grid must be strictly increasing")
    for A in A_grid:
        if verify_super_inequality(params, float(A), samples).ok:
            return float(A)
    return None


def sub_sufficient_margins(params: BlowupParams, r: np.ndarray) -> np.ndarray:
    """Margins of the sufficient lower-barrier form.

    beta*(beta+1-alpha) >= a(r) * B**(p-1) * (r/R)**(2(p-1)) implies the
    full condition once the negative shift is discarded; with the 1-eps
    amplitude it holds with strict margin at r = R.
    """
    beta = params.beta
    B = _envelope_amplitude(params, 1.0 - params.epsilon)
    r = np.asarray(r, dtype=float)
    return beta * (beta + 1.0 - params.alpha) - params.a_at(r) * B ** (params.p - 1.0) * (
        r / params.R
    ) ** (2.0 * (params.p - 1.0))


def verify_sub_inequality(
    params: BlowupParams, C: float, samples: np.ndarray
) -> SubInequalityReport:
    """Check the full and the sufficient lower-barrier conditions.

    Samples must not dip below the activation radius: there the profile is
    clamped to zero and the condition is vacuous.
    """
    sub = build_subsolution(params, C)
    samples = np.asarray(samples, dtype=float)
    if np.any(samples < sub.activation_radius - 1e-9):
        raise ParameterError("samples must lie at or beyond the activation radius")
    if np.any(samples >= params.R):
        raise ParameterError("samples must stay strictly below R")

    def full_margins(r):
        return _barrier_lhs(params, sub.B, r) - _barrier_rhs(params, C, sub.B, r)

    worst_full, r_full = _refine_worst(full_margins, samples)
    worst_suff, r_suff = _refine_worst(lambda r: sub_sufficient_margins(params, r), samples)
    ok_full = worst_full >= 0.0
    ok_suff = worst_suff >= 0.0
    return SubInequalityReport(
        ok=ok_full and ok_suff,
        ok_full=ok_full,
        worst_margin_full=worst_full,
        worst_r_full=r_full,
        ok_sufficient=ok_suff,
        worst_margin_sufficient=worst_suff,
        worst_r_sufficient=r_suff,
    )
