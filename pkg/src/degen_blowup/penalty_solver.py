"""Damped Newton solve of the penalized problem, with bound certification.

The solve augments the weighted reaction problem with the coercive term
penalty * ((u - lower)^- + (u - upper)^+) * w and clamps the nonlinearity
to the slab [lower, upper].  At a fixed point whose unconstrained solution
already lies inside the slab both modifications are inactive, so the
returned field solves the original discrete problem; the a-posteriori
certificate ``check_sandwich`` verifies the two-sided bound that the
continuum theory promises.  Convergence is declared on the max-norm of the
integrated residual, the quantity the weak formulation controls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import (
    DiscreteField,
    Problem,
    assemble_jacobian,
    assemble_residual,
    assemble_stiffness,
    cell_volumes,
    truncate_nonlinearity,
)
from .errors import OrderingError, ParameterError
from .grids import Grid
from .tridiag import thomas_solve

_MIN_STEP = 1e-12


@dataclass
class SolveOptions:
    """Knobs of the penalized Newton iteration.

    penalty = None picks 1 + sup|b/w| * (max slope of the clamped
    nonlinearity over the slab); the coercivity argument only needs a
    positive coefficient, and scaling with the reaction keeps the Newton
    system well conditioned.  The default initial guess is the slab
    midpoint (lower + upper)/2, which starts where the penalty is inactive.
    """

    penalty: float | None = None
    max_iters: int = 60
    abs_tol: float = 1e-10
    damping: float = 0.5
    initial_guess: DiscreteField | None = None

    def __post_init__(self):
        if self.abs_tol <= 0.0:
            raise ParameterError(f"abs_tol must be positive; got {self.abs_tol}")
        if not 0.0 < self.damping < 1.0:
            raise ParameterError(f"damping must lie in (0, 1); got {self.damping}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be at least 1; got {self.max_iters}")


@dataclass
class SandwichReport:
    ok: bool
    worst_node: int
    max_below: float
    max_above: float


@dataclass
class SolveReport:
    converged: bool
    iters: int
    residual_history: list = field(default_factory=list)
    sandwich_violation: SandwichReport | None = None
    penalty: float = 0.0


@dataclass
class VerificationReport:
    ok: bool
    worst_residual: float
    worst_node: int


def default_penalty(problem: Problem, grid: Grid, lower: DiscreteField, upper: DiscreteField) -> float:
    sup_ratio = problem.sup_b_over_w(grid)
    slopes = np.maximum(
        np.abs(problem.nonlin.slope(lower.values)), np.abs(problem.nonlin.slope(upper.values))
    )
    return 1.0 + sup_ratio * float(np.max(slopes))


def check_sandwich(u: DiscreteField, lower: DiscreteField, upper: DiscreteField, tol: float) -> SandwichReport:
    """Certify lower - tol <= u <= upper + tol nodewise."""
    below = np.maximum(lower.values - u.values, 0.0)
    above = np.maximum(u.values - upper.values, 0.0)
    worst = np.maximum(below, above)
    max_below = float(np.max(below))
    max_above = float(np.max(above))
    return SandwichReport(
        ok=max_below <= tol and max_above <= tol,
        worst_node=int(np.argmax(worst)),
        max_below=max_below,
        max_above=max_above,
    )


def _check_monotone(problem: Problem, lower: DiscreteField, upper: DiscreteField) -> None:
    lo = float(np.min(lower.values))
    hi = float(np.max(upper.values))
    if hi <= lo:
        return
    samples = np.linspace(lo, hi, 64)
    values = problem.nonlin.value(samples)
    if np.any(np.diff(values) < -1e-12 * max(1.0, float(np.max(np.abs(values))))):
        raise ParameterError("nonlinearity is not monotone nondecreasing on the slab")


def solve_penalized(
    problem: Problem,
    grid: Grid,
    lower: DiscreteField,
    upper: DiscreteField,
    opts: SolveOptions | None = None,
) -> tuple[DiscreteField, SolveReport]:
    """Newton iteration on the clamped, penalized residual.

    Each step solves Jacobian * delta = -residual by tridiagonal
    elimination and backtracks (step scaled by the damping factor) until
    the residual max-norm strictly decreases.  Exhausting max_iters or the
    backtracking budget returns the current field with converged = False.
    """
    opts = opts or SolveOptions()
    if np.any(lower.values > upper.values):
        j = int(np.argmax(lower.values - upper.values))
        raise OrderingError(f"lower bound exceeds upper bound at node {j}")
    problem.sup_b_over_w(grid)  # reaction/weight ratio must be finite
    _check_monotone(problem, lower, upper)
    # Square-integrability of the clamped reaction over the truncated grid
    # is automatic; evaluating it at the extremes guards against overflow.
    extremes = np.maximum(np.abs(problem.nonlin.value(lower.values)),
                          np.abs(problem.nonlin.value(upper.values)))
    if not np.all(np.isfinite(extremes)):
        raise ParameterError("nonlinearity overflows on the slab")

    trunc = truncate_nonlinearity(problem.nonlin, lower, upper)
    penalty = opts.penalty if opts.penalty is not None else default_penalty(problem, grid, lower, upper)
    if opts.initial_guess is not None:
        u = opts.initial_guess.copy()
    else:
        u = DiscreteField(grid, 0.5 * (lower.values + upper.values))

    def residual_norm(candidate: DiscreteField) -> tuple[float, DiscreteField]:
        res = assemble_residual(candidate, problem, trunc, penalty, lower, upper)
        return float(np.max(np.abs(res.values))), res

    norm, res = residual_norm(u)
    history = [norm]
    converged = norm <= opts.abs_tol
    iters = 0
    while not converged and iters < opts.max_iters:
        jac = assemble_jacobian(u, problem, trunc, penalty, lower, upper)
        delta = thomas_solve(jac, -res.values)
        step = 1.0
        accepted = False
        while step >= _MIN_STEP:
            trial = DiscreteField(grid, u.values + step * delta)
            trial_norm, trial_res = residual_norm(trial)
            if trial_norm < norm:
                u, norm, res = trial, trial_norm, trial_res
                accepted = True
                break
            step *= opts.damping
        if not accepted:
            break  # stalled: no step length reduces the residual
        iters += 1
        history.append(norm)
        converged = norm <= opts.abs_tol

    report = SolveReport(
        converged=converged,
        iters=iters,
        residual_history=history,
        sandwich_violation=check_sandwich(u, lower, upper, tol=0.0),
        penalty=penalty,
    )
    return u, report


def verify_subsupersolution(
    candidate: DiscreteField,
    problem: Problem,
    kind: str,
    tol: float = 1e-8,
) -> VerificationReport:
    """Check the one-sided sign of the raw discrete weak residual.

    Pairs the candidate against the nonnegative hat functions: midpoint
    fluxes plus reaction and source weighted by the exact radial cell
    volumes (not the solver's volume weights, whose center entry vanishes
    and would leave the center flux unbalanced against the reaction).
    Entries are normalized by the same cell volumes into pointwise
    quantities.  A supersolution needs every interior entry >= -tol, a
    subsolution <= +tol; Dirichlet rows are excluded.  The tolerance
    absorbs the O(h^2) discretization slack when certifying continuum
    barriers on a grid.
    """
    if kind not in ("sub", "super"):
        raise ParameterError(f"kind must be 'sub' or 'super'; got {kind!r}")
    grid = candidate.grid
    volumes = cell_volumes(grid, problem.domain.N)
    raw = assemble_stiffness(grid, problem).matvec(candidate.values)
    raw += problem.b_at(grid.nodes) * problem.nonlin.value(candidate.values) * volumes
    raw -= problem.h_at(grid.nodes) * volumes
    pointwise = raw / volumes
    interior = ~problem.dirichlet_mask(grid)
    vals = pointwise[interior]
    nodes = np.nonzero(interior)[0]
    if kind == "super":
        worst_idx = int(np.argmin(vals))
        worst = float(vals[worst_idx])
        ok = worst >= -tol
    else:
        worst_idx = int(np.argmax(vals))
        worst = float(vals[worst_idx])
        ok = worst <= tol
    return VerificationReport(ok=ok, worst_residual=worst, worst_node=int(nodes[worst_idx]))
