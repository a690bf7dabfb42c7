"""Optimal cash infusions on the block graphon and their finite-network lifts.

An optimal plan tops up, in each block, an interval of firms just left of the
shifted cutoff to a common endowment plateau. The direct-rescue measures y_k
equalize (beta / (slope_k y_k) + 1) * centrality_k across blocks, subject to
the budget (1/2) sum_k slope_k y_k^2 = K; the indirectly rescued measures
delta_k follow from the spillover matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonInteriorError, NumericError, ParameterError, StabilityError
from .graphon import (BlockGraphon, CutoffVector, SpilloverMatrix,
                      _cutoff_interior_flags, solve_extremal_cutoffs,
                      spillover_matrix)
from .model import BlockSpec, labels_for


@dataclass(frozen=True)
class InfusionPlan:
    """Per-block bailout geometry for the maximal equilibrium.

    Firms in [support_lo_k, support_hi_k] are raised to the endowment plateau
    e_hat_k = f_k(support_hi_k); y_k is the measure rescued directly and
    delta_k the measure rescued through repayment spillovers.
    """

    y: np.ndarray
    delta: np.ndarray
    e_hat: np.ndarray
    support_lo: np.ndarray
    support_hi: np.ndarray
    lambda_star: float
    budget_used: float
    cutoffs_pre: CutoffVector
    interior: bool


@dataclass(frozen=True)
class FiniteInfusion:
    iota: np.ndarray      # per-firm cash, >= 0
    total: float          # sum of iota, <= n * (K + epsilon)
    epsilon_used: float   # per-firm slack actually consumed


@dataclass(frozen=True)
class SingleBlockPlan:
    y: float
    delta: float


@dataclass(frozen=True)
class CorePeripheryAnalytics:
    B: np.ndarray
    ratio_rhs: float
    delta_ratio_if_equal_slopes: float | None


@dataclass(frozen=True)
class BruteForcePlan:
    y: np.ndarray
    cutoffs: np.ndarray
    solvent_measure: float


def katz_centrality(B) -> np.ndarray:
    """Column-summed resolvent weights 1^T (I - B)^{-1} E_k; all entries >= 1."""
    if isinstance(B, SpilloverMatrix):
        if not B.stable:
            raise StabilityError(f"spillover matrix is unstable (rho = {B.rho:.6g})", rho=B.rho)
        Bm = B.B
    else:
        Bm = np.asarray(B, dtype=float)
        rho = float(np.max(np.abs(np.linalg.eigvals(Bm)))) if Bm.size else 0.0
        if rho >= 1.0:
            raise StabilityError(f"spillover matrix is unstable (rho = {rho:.6g})", rho=rho)
    m = Bm.shape[0]
    return np.linalg.solve((np.eye(m) - Bm).T, np.ones(m))


def _stable_spillover(graphon: BlockGraphon, cutoffs: CutoffVector) -> SpilloverMatrix:
    sp = spillover_matrix(graphon, cutoffs)
    if not sp.stable:
        raise StabilityError(f"spillover matrix is unstable (rho = {sp.rho:.6g})", rho=sp.rho)
    return sp


def optimal_infusion(graphon: BlockGraphon, budget: float) -> InfusionPlan:
    """Best cash infusion of total budget `budget` for the maximal equilibrium.

    The common multiplier lambda = (beta / (slope_k y_k) + 1) * centrality_k
    makes the budget a strictly decreasing single-variable map, solved by
    bisection; lambda must exceed every block centrality for positive y.
    Raises NonInteriorError when a support endpoint leaves its block, since
    the closed forms presuppose interior supports.
    """
    if budget < 0:
        raise ParameterError("budget: must be non-negative")
    spec = graphon.spec
    cutoffs = solve_extremal_cutoffs(graphon, side="maximal")
    sp = _stable_spillover(graphon, cutoffs)
    if not bool(np.all(cutoffs.interior)):
        bad = int(np.where(~cutoffs.interior)[0][0])
        raise NonInteriorError(
            f"pre-infusion cutoff of block {bad} is not interior", block=bad)
    cent = katz_centrality(sp)
    slopes, beta = spec.slopes, spec.failure_cost

    if budget == 0.0:
        zero = np.zeros(graphon.m)
        return InfusionPlan(y=zero, delta=zero.copy(), e_hat=spec.endowment_at(cutoffs.x),
                            support_lo=cutoffs.x.copy(), support_hi=cutoffs.x.copy(),
                            lambda_star=math.inf, budget_used=0.0,
                            cutoffs_pre=cutoffs, interior=True)

    def y_of(lam):
        return beta * cent / (slopes * (lam - cent))

    def spend(lam):
        y = y_of(lam)
        return 0.5 * float(np.sum(slopes * y * y))

    lo = float(np.max(cent)) * (1.0 + 1e-12)
    hi = float(np.max(cent)) * 2.0
    for _ in range(200):
        if spend(hi) < budget:
            break
        hi *= 2.0
    else:
        raise NumericError("could not bracket the budget multiplier")
    for _ in range(200):                      # fixed count reaches machine precision
        mid = 0.5 * (lo + hi)
        if spend(mid) > budget:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    y = y_of(lam)
    w = y + slopes * y * y / (2.0 * beta)
    delta = np.linalg.solve(np.eye(graphon.m) - sp.B, sp.B @ w)
    support_hi = cutoffs.x - delta
    support_lo = support_hi - y
    inside = (support_lo > graphon.t[:-1]) & (support_hi < graphon.t[1:])
    if not bool(np.all(inside)):
        bad = int(np.where(~inside)[0][0])
        raise NonInteriorError(
            f"support of block {bad} leaves the block interior for budget {budget:g}",
            block=bad)
    return InfusionPlan(y=y, delta=delta, e_hat=spec.endowment_at(support_hi),
                        support_lo=support_lo, support_hi=support_hi,
                        lambda_star=lam, budget_used=0.5 * float(np.sum(slopes * y * y)),
                        cutoffs_pre=cutoffs, interior=True)


def single_block_plan(a: float, c: float, beta: float, budget: float) -> SingleBlockPlan:
    """Closed forms for one block: y = sqrt(2K/a), delta = b/(1-b) (y + K/beta)."""
    b = (c / (1.0 - c)) * beta / a
    if b >= 1.0:
        raise ParameterError(f"unstable single block: b = {b:.6g} >= 1")
    if budget < 0:
        raise ParameterError("budget: must be non-negative")
    if 2.0 * budget / a > 1.0:
        raise ParameterError(f"budget {budget:g} oversized: 2K/a = {2 * budget / a:.6g} > 1")
    y = math.sqrt(2.0 * budget / a)
    delta = b / (1.0 - b) * (y + budget / beta)
    return SingleBlockPlan(y=y, delta=delta)


def core_periphery_analytics(a1: float, a2: float, c: float, beta: float,
                             g11: float, g21: float) -> CorePeripheryAnalytics:
    """Closed forms for the two-block core-periphery layout (g22 = 0, equal halves).

    Here a_k is the total endowment dispersion within block k, i.e. the
    within-block endowment range; the label-slope is 2 a_k on half-width
    blocks.
    """
    if g21 <= 0:
        raise ParameterError("g21: periphery-to-core links must be present")
    pref = c * beta / ((1.0 - c) * (c * g21 + g11 + g21))
    B = pref * np.array([[(c * g21 + g11) / a1, (g11 + g21) / a1],
                         [g21 / a2, c * g21 / a2]])
    common = a1 * a2 * (c * g21 + g11 + g21)
    ratio_rhs = (common + a2 * c * beta * g21) / (common + a1 * c * beta * g21)
    delta_ratio = None
    if a1 == a2:
        a = a1
        delta_ratio = 1.0 + 2.0 * a * g11 / ((a * (1.0 + c) + beta * c) * g21)
    return CorePeripheryAnalytics(B=B, ratio_rhs=ratio_rhs,
                                  delta_ratio_if_equal_slopes=delta_ratio)


# ---------------------------------------------------------------------------
# applying plans
# ---------------------------------------------------------------------------


def infusion_density(plan: InfusionPlan, spec: BlockSpec, x) -> np.ndarray:
    """iota(x): top-up to the plateau on each support interval, zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    blocks = spec.block_of_labels(x)
    for k in range(spec.m):
        on = (blocks == k) & (x >= plan.support_lo[k]) & (x <= plan.support_hi[k])
        out[on] = np.maximum(plan.e_hat[k] - spec.endowment_at(x[on]), 0.0)
    return out


def _solve_infused_cutoffs(graphon: BlockGraphon, mass: np.ndarray,
                           plateau_lo: np.ndarray, plateau_hi: np.ndarray,
                           e_hat: np.ndarray,
                           tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Maximal cutoffs when block endowments carry a plateau at e_hat.

    The endowment map of block k equals f_k off [plateau_lo, plateau_hi] and
    e_hat_k on it; its generalized inverse jumps from the plateau start to the
    plateau end at u = e_hat_k. Iterating from the block starts yields the
    least fixed point, i.e. the maximal equilibrium. Optimal plans make the
    plateau value hit the threshold exactly, so the branch test at u = e_hat
    carries a small tie tolerance against round-off.
    """
    spec = graphon.spec
    lo, hi = graphon.t[:-1], graphon.t[1:]
    base = spec.sizes * spec.means + mass
    tie = 1e-12 * np.maximum(1.0, np.abs(e_hat))
    x = lo.copy()
    for _ in range(max_iter):
        A = graphon.resolvent @ (base - spec.failure_cost * (x - lo))
        u = spec.threshold - A
        ramp = lo + (u - spec.endow_lo) / spec.slopes
        nxt = np.where(u <= e_hat + tie, np.minimum(ramp, plateau_lo), ramp)
        nxt = np.clip(nxt, lo, hi)
        delta = float(np.max(np.abs(nxt - x)))
        x = nxt
        if delta < tol:
            return x
    raise NumericError(f"infused cutoff iteration did not converge (last change {delta:.3e})",
                       iterations=max_iter, residual=delta)


def apply_infusion(graphon: BlockGraphon, plan: InfusionPlan) -> CutoffVector:
    """Maximal cutoffs after raising endowments by the plan's infusion."""
    spec = graphon.spec
    mass = 0.5 * spec.slopes * plan.y * plan.y
    x = _solve_infused_cutoffs(graphon, mass, plan.support_lo, plan.support_hi, plan.e_hat)
    return CutoffVector(x=x, interior=_cutoff_interior_flags(graphon, x), side="maximal")


def post_infusion_aggregates(graphon: BlockGraphon, plan: InfusionPlan,
                             cutoffs_post: CutoffVector) -> np.ndarray:
    """Cross-holdings aggregates A_k at the post-infusion maximal equilibrium."""
    spec = graphon.spec
    mass = 0.5 * spec.slopes * plan.y * plan.y
    mu = cutoffs_post.x - graphon.t[:-1]
    return graphon.resolvent @ (spec.sizes * spec.means + mass - spec.failure_cost * mu)


# ---------------------------------------------------------------------------
# independent optimality oracle
# ---------------------------------------------------------------------------


def _placement_cutoffs(graphon: BlockGraphon, y: np.ndarray,
                       tol: float = 1e-11, max_iter: int = 10_000) -> np.ndarray:
    """Self-consistent shifted cutoffs for direct-rescue measures y.

    The support of block k is [x_k, x_k + y_k] raised to f_k(x_k + y_k); the
    least fixed point below makes the plateau value hit the threshold exactly
    (or clamps at the block edges), maximizing the solvent measure for this y.
    """
    spec = graphon.spec
    lo, hi = graphon.t[:-1], graphon.t[1:]
    base = spec.sizes * spec.means + 0.5 * spec.slopes * y * y
    x = lo.copy()
    for _ in range(max_iter):
        A = graphon.resolvent @ (base - spec.failure_cost * (x - lo))
        nxt = np.clip(lo + (spec.threshold - A - spec.endow_lo) / spec.slopes - y, lo, hi - y)
        delta = float(np.max(np.abs(nxt - x)))
        x = nxt
        if delta < tol:
            return x
    raise NumericError("oracle placement iteration did not converge",
                       iterations=max_iter, residual=delta)


def brute_force_infusion(graphon: BlockGraphon, budget: float, grid_step: float) -> BruteForcePlan:
    """Exhaustive grid search over direct-rescue allocations on the budget surface.

    Candidates fix y_1..y_{m-1} on a grid and spend the remaining budget in
    the last block; each is realized as a plateau plan placed self-
    consistently and scored by post-infusion solvent measure. Independent of
    the closed-form optimizer.
    """
    spec = graphon.spec
    m = graphon.m
    if m > 3:
        raise ParameterError("brute-force oracle is limited to m <= 3 blocks")
    if grid_step <= 0:
        raise ParameterError("grid_step: must be positive")
    if budget < 0:
        raise ParameterError("budget: must be non-negative")
    slopes = spec.slopes
    if budget == 0.0:
        x = _placement_cutoffs(graphon, np.zeros(m))
        return BruteForcePlan(y=np.zeros(m), cutoffs=x,
                              solvent_measure=float(np.sum(graphon.t[1:] - x)))

    def candidates():
        if m == 1:
            yield (math.sqrt(2.0 * budget / slopes[0]),)
            return
        axes = []
        for k in range(m - 1):
            y_max = min(math.sqrt(2.0 * budget / slopes[k]), spec.sizes[k])
            axes.append(np.arange(0.0, y_max + grid_step, grid_step))
        for head in itertools.product(*axes):
            rest = budget - 0.5 * sum(slopes[k] * head[k] ** 2 for k in range(m - 1))
            if rest < -1e-15:
                continue
            y_last = math.sqrt(max(2.0 * rest, 0.0) / slopes[m - 1])
            yield head + (y_last,)

    best = None
    for cand in candidates():
        y = np.asarray(cand)
        if np.any(y > spec.sizes + 1e-12):
            continue
        x = _placement_cutoffs(graphon, y)
        measure = float(np.sum(graphon.t[1:] - x))
        key = (-measure, tuple(y))           # deterministic lexicographic tie-break
        if best is None or key < best[0]:
            best = (key, y, x, measure)
    if best is None:
        raise ParameterError("no feasible grid candidate for this budget")
    _, y, x, measure = best
    return BruteForcePlan(y=y, cutoffs=x, solvent_measure=measure)


# ---------------------------------------------------------------------------
# lifting to finite networks
# ---------------------------------------------------------------------------


def lift_to_finite(plan: InfusionPlan, spec: BlockSpec, n: int, epsilon: float) -> FiniteInfusion:
    """Per-firm infusion majorizing the continuum plan with per-firm slack epsilon.

    Each block's infused endowment is replaced by a strictly increasing
    majorant: the plateau is tilted upward by eps_k across its width and
    everything right of the plateau is raised by eps_k, with eps_k sized so
    the extra continuum budget per block stays within epsilon * s_k. Firm i
    receives the majorant minus its base endowment at label i/(n-1).
    """
    if epsilon <= 0:
        raise ParameterError("epsilon: must be positive")
    x = labels_for(n)
    blocks = spec.block_of_labels(x)
    base = infusion_density(plan, spec, x)
    tilt = np.zeros(n)
    for k in range(spec.m):
        L, R = plan.support_lo[k], plan.support_hi[k]
        room = (R - L) / 2.0 + (spec.t[k + 1] - R)
        eps_k = epsilon * spec.sizes[k] / room if room > 0 else 0.0
        mask = blocks == k
        xk = x[mask]
        tk = np.zeros(xk.shape)
        if R > L:
            on = (xk >= L) & (xk <= R)
            tk[on] = eps_k * (xk[on] - L) / (R - L)
        tk[xk > R] = eps_k
        tilt[mask] = tk
    allowance = n * (plan.budget_used + epsilon)
    base_total = float(base.sum())
    tilt_total = float(tilt.sum())
    if base_total > allowance:
        raise ParameterError(
            f"epsilon {epsilon:g} cannot cover the discretized plan at n = {n}")
    if tilt_total > 0 and base_total + tilt_total > allowance:
        tilt *= (allowance - base_total) / tilt_total
    iota = base + tilt
    total = float(iota.sum())
    return FiniteInfusion(iota=iota, total=total,
                          epsilon_used=total / n - plan.budget_used)
