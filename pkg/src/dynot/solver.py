"""
Primal-dual iteration for the discrete dynamic transport problem.

Each iteration projects the primal pair ``(m, f)`` onto the continuity
constraint, applies the kinetic-energy prox to the averaged variables and
updates the (scaled) duals with over-relaxation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import grid as g
from .errors import InvalidParams, MassMismatch, ShapeMismatch
from .grid import BoundaryVectors, GridSpec
from .prox import cost_J, prox_J_field
from .spectral import SpectralPlan, apply_AAt_pinv, build_poisson_plan

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverParams:
    tau: float = 0.95
    sigma: float = 0.95
    theta: float = 1.0
    max_iter: int = 2000
    rel_change_tol: float = 0.0
    report_every: int = 10

    def __post_init__(self):
        if not (self.tau > 0 and self.sigma > 0):
            raise InvalidParams("tau and sigma must be positive")
        if not self.tau * self.sigma < 1:
            raise InvalidParams(f"tau*sigma must be < 1, got {self.tau * self.sigma}")
        if self.max_iter < 1:
            raise InvalidParams("max_iter must be positive")
        if self.rel_change_tol < 0:
            raise InvalidParams("rel_change_tol must be nonnegative")
        if self.report_every < 1:
            raise InvalidParams("report_every must be positive")


@dataclass(frozen=True)
class TransportProblem:
    f0: np.ndarray
    f1: np.ndarray
    grid: GridSpec

    @classmethod
    def create(cls, f0, f1, time_steps, bcs=None) -> "TransportProblem":
        f0 = np.asarray(f0, dtype=float)
        f1 = np.asarray(f1, dtype=float)
        if f0.shape != f1.shape:
            raise ShapeMismatch(f"f0 shape {f0.shape} differs from f1 shape {f1.shape}")
        return cls(f0, f1, GridSpec.create(f0.shape, time_steps, bcs))

    def boundary_vectors(self) -> BoundaryVectors:
        return g.build_boundary_vectors(self.f0, self.f1, self.grid)


@dataclass
class Diagnostics:
    iter: int
    objective: float
    constraint_residual: float
    primal_change: float
    coupling_residual: float


@dataclass
class SolverState:
    m: list
    f: np.ndarray
    u: np.ndarray
    v: np.ndarray
    b_m: np.ndarray
    b_f: np.ndarray
    b_bar_m: np.ndarray
    b_bar_f: np.ndarray
    iter: int = 0
    history: list = field(default_factory=list)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SolverState":
        return cls(
            m=grid.zeros_momentum(),
            f=grid.zeros_interior(),
            u=grid.zeros_centered_vector(),
            v=grid.zeros_full(),
            b_m=grid.zeros_centered_vector(),
            b_f=grid.zeros_full(),
            b_bar_m=grid.zeros_centered_vector(),
            b_bar_f=grid.zeros_full(),
        )


@dataclass
class SolveResult:
    m: list
    f: np.ndarray
    u: np.ndarray
    v: np.ndarray
    history: list
    problem: TransportProblem
    previous: tuple = None

    def frames(self) -> np.ndarray:
        """All ``p + 1`` density slices, boundary data included, time last."""
        return np.concatenate(
            [self.problem.f0[..., None], self.f, self.problem.f1[..., None]], axis=-1
        )


def project_Cd(a_m, a_f, plan: SpectralPlan, bv: BoundaryVectors):
    """Euclidean projection of ``(a_m, a_f)`` onto ``{A(m, f) = f_b^-}``."""
    grid = plan.grid
    resid = g.apply_A(a_m, a_f, grid) - bv.minus
    x = apply_AAt_pinv(plan, resid)
    dm, df = g.apply_A_adjoint(x, grid)
    return [a - d for a, d in zip(a_m, dm)], a_f - df


def _relative(num, den):
    return num / den if den > 0 else num


def evaluate_solution(m, f, problem: TransportProblem, u=None, v=None, previous=None,
                      iteration=0, bv=None) -> Diagnostics:
    """Recompute diagnostics for a primal pair.

    Without ``u, v`` the averaged primal variables are used, so the coupling
    residual is zero. ``previous`` is the preceding ``(m, f)`` iterate; when it
    is missing the primal change is reported as 0.
    """
    grid = problem.grid
    if bv is None:
        bv = problem.boundary_vectors()
    sm = g.apply_S_M(m, grid)
    sf = g.apply_S_F_plus_boundary(f, bv, grid)
    if u is None:
        u = sm
    if v is None:
        v = sf
    constraint = np.linalg.norm(g.apply_A(m, f, grid) - bv.minus)
    constraint = _relative(constraint, np.linalg.norm(bv.minus))
    coupling = np.linalg.norm(sm - u) + np.linalg.norm(sf - v)
    coupling = _relative(coupling, np.sqrt(np.vdot(u, u) + np.vdot(v, v)))
    if previous is None:
        change = 0.0
    else:
        pm, pf = previous
        diff = np.sqrt(sum(np.vdot(a - b, a - b) for a, b in zip(m, pm)) + np.vdot(f - pf, f - pf))
        change = _relative(diff, np.sqrt(g.momentum_norm(m) ** 2 + np.vdot(f, f)))
    return Diagnostics(
        iter=iteration,
        objective=cost_J(u, v),
        constraint_residual=float(constraint),
        primal_change=float(change),
        coupling_residual=float(coupling),
    )


def pdhg_solve(problem: TransportProblem, params: SolverParams = SolverParams(),
               callback=None) -> SolveResult:
    """Run the primal-dual iteration from the all-zero initial state.

    ``callback(state)`` is invoked after every iteration, if given.
    History rows are recorded for the initial state, every
    ``params.report_every`` iterations and the final iterate.
    """
    grid = problem.grid
    bv = problem.boundary_vectors()
    plan = build_poisson_plan(grid)
    ts = params.tau * params.sigma
    state = SolverState.zeros(grid)
    state.history.append(evaluate_solution(state.m, state.f, problem, state.u, state.v, bv=bv))

    prev = (state.m, state.f)
    for r in range(1, params.max_iter + 1):
        prev = (state.m, state.f)
        # step 1: projection onto the continuity constraint
        sm_adj = g.apply_S_M_adjoint(state.b_bar_m, grid)
        a_m = [mi - ts * bi for mi, bi in zip(state.m, sm_adj)]
        a_f = state.f - ts * g.apply_S_F_adjoint(state.b_bar_f, grid)
        state.m, state.f = project_Cd(a_m, a_f, plan, bv)

        # step 2: prox of the kinetic energy at the averaged variables
        sm = g.apply_S_M(state.m, grid)
        sf = g.apply_S_F_plus_boundary(state.f, bv, grid)
        state.u, state.v = prox_J_field(sm + state.b_m, sf + state.b_f, params.sigma)

        # steps 3-4: dual update and over-relaxation
        b_m = state.b_m + sm - state.u
        b_f = state.b_f + sf - state.v
        state.b_bar_m = b_m + params.theta * (b_m - state.b_m)
        state.b_bar_f = b_f + params.theta * (b_f - state.b_f)
        state.b_m, state.b_f = b_m, b_f
        state.iter = r

        if callback is not None:
            callback(state)

        stop = False
        if params.rel_change_tol > 0 or r % params.report_every == 0 or r == params.max_iter:
            diag = evaluate_solution(state.m, state.f, problem, state.u, state.v,
                                     previous=prev, iteration=r, bv=bv)
            stop = diag.primal_change < params.rel_change_tol
            if stop or r % params.report_every == 0 or r == params.max_iter:
                state.history.append(diag)
                log.debug("iter %d objective %.6g constraint %.3g coupling %.3g change %.3g",
                          r, diag.objective, diag.constraint_residual,
                          diag.coupling_residual, diag.primal_change)
        if stop:
            break

    return SolveResult(state.m, state.f, state.u, state.v, state.history, problem, prev)


def cdf_transport_oracle_1d(f0, f1, t_values=()):
    """Exact 1D quadratic transport between two cell-midpoint histograms.

    Mass sits at midpoints ``(j + 1/2) / n`` of ``[0, 1]``. The monotone
    (quantile) coupling is formed by merging the two cumulative
    distributions; each coupled piece moves at constant speed, and the moved
    mass is deposited linearly onto the two nearest midpoints.

    Returns
    -------
    w2_squared : float
        Squared Wasserstein-2 distance.
    frames : ndarray, shape (len(t_values), n)
        Displacement interpolants at the requested times.
    """
    f0 = np.asarray(f0, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    if f0.ndim != 1 or f0.shape != f1.shape:
        raise ShapeMismatch("oracle needs two 1D arrays of equal length")
    mass = f0.sum()
    if abs(mass - f1.sum()) > 1e-12 * max(mass, 1e-300):
        raise MassMismatch(f"masses differ: {mass!r} vs {f1.sum()!r}")
    n = f0.size
    x = (np.arange(n) + 0.5) / n
    c0 = np.cumsum(f0)
    c1 = np.cumsum(f1)
    levels = np.unique(np.concatenate([[0.0], c0, c1]))
    levels = levels[levels <= mass]
    levels[-1] = mass
    pieces = np.diff(levels)
    mids = 0.5 * (levels[:-1] + levels[1:])
    src = x[np.minimum(np.searchsorted(c0, mids), n - 1)]
    dst = x[np.minimum(np.searchsorted(c1, mids), n - 1)]
    w2 = float(np.sum(pieces * (dst - src) ** 2))

    frames = np.zeros((len(t_values), n))
    for k, t in enumerate(t_values):
        pos = (1 - t) * src + t * dst
        s = np.clip(pos * n - 0.5, 0, n - 1)
        left = np.minimum(np.floor(s).astype(int), n - 2)
        w_right = s - left
        np.add.at(frames[k], left, pieces * (1 - w_right))
        np.add.at(frames[k], left + 1, pieces * w_right)
    return w2, frames
