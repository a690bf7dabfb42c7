"""Continuum limit of the block equity network.

The kernel is piecewise constant, T[k, l] = c * g_{kl} / psi_l on block
rectangle (k, l), so putative valuations are affine within each block:
v(x) = f_k(x) + A_k - beta * 1{x insolvent}, where the cross-holdings
aggregate A solves A = (I - T D)^{-1} T (s_k mean_k - beta mu_k) with mu_k
the insolvent measure of block k. Extremal equilibria are cutoff-shaped and
found by a monotone clamped fixed-point iteration on the cutoffs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NumericError, ParameterError
from .model import BlockSpec

CUTOFF_TOL = 1e-12
CUTOFF_MAX_ITER = 100_000


@dataclass(frozen=True)
class BlockGraphon:
    """Block equity kernel plus the block geometry it acts on."""

    spec: BlockSpec
    T: np.ndarray    # m x m cross-share matrix
    D: np.ndarray    # diag(s_k)
    t: np.ndarray    # partial sums, t[0] = 0, t[m] = 1

    @property
    def m(self) -> int:
        return self.spec.m

    @cached_property
    def resolvent(self) -> np.ndarray:
        """(I - T D)^{-1} T, the aggregate pass-through of block-level shocks."""
        return np.linalg.solve(np.eye(self.m) - self.T @ self.D, self.T)


def build_graphon(spec: BlockSpec) -> BlockGraphon:
    if np.any(spec.psi <= 0):
        bad = np.where(spec.psi <= 0)[0].tolist()
        raise ParameterError(f"link_probs: psi is zero for blocks {bad}; "
                             "every column needs a positive entry")
    T = spec.exposure * spec.link_probs / spec.psi[None, :]
    D = np.diag(spec.sizes)
    rho = float(np.max(np.abs(np.linalg.eigvals(T @ D))))
    if rho > spec.exposure + 1e-9:
        raise ParameterError(f"kernel mass {rho:.6g} exceeds the exposure {spec.exposure:g}")
    return BlockGraphon(spec=spec, T=T, D=D, t=spec.t)


@dataclass(frozen=True)
class CutoffVector:
    x: np.ndarray            # per-block cutoff, clamped into [t_{k-1}, t_k]
    interior: np.ndarray     # strictly inside the block interval
    side: str


# ---------------------------------------------------------------------------
# putative block values as an evaluator
# ---------------------------------------------------------------------------


def _normalize_intervals(intervals):
    """Sort, drop empty, and merge touching [lo, hi) intervals."""
    ivs = sorted((float(lo), float(hi)) for lo, hi in intervals if hi > lo)
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


def _subtract_interval(intervals, cut):
    lo_c, hi_c = cut
    out = []
    for lo, hi in intervals:
        if hi_c <= lo or hi <= lo_c:
            out.append((lo, hi))
            continue
        if lo < lo_c:
            out.append((lo, lo_c))
        if hi_c < hi:
            out.append((hi_c, hi))
    return _normalize_intervals(out)


def _contains(intervals, lo, hi):
    return any(a <= lo and hi <= b for a, b in intervals)


def _disjoint(intervals, lo, hi):
    return all(hi <= a or b <= lo for a, b in intervals)


@dataclass(frozen=True)
class BlockValues:
    """Putative valuation density with per-block insolvency interval unions.

    `insolvent[k]` is a tuple of disjoint half-open [lo, hi) intervals inside
    block k; membership decides the bankruptcy-cost term. A is pinned by the
    insolvent measures, so any rearrangement preserving those measures keeps
    A (and the fixed-point defect) unchanged.
    """

    graphon: BlockGraphon
    insolvent: tuple
    A: np.ndarray

    @classmethod
    def from_insolvent_sets(cls, graphon: BlockGraphon, insolvent) -> "BlockValues":
        spec = graphon.spec
        sets = tuple(_normalize_intervals(iv) for iv in insolvent)
        for k, ivs in enumerate(sets):
            for lo, hi in ivs:
                if lo < graphon.t[k] - 1e-12 or hi > graphon.t[k + 1] + 1e-12:
                    raise ParameterError(f"insolvent interval [{lo}, {hi}) leaves block {k}")
        mu = np.array([sum(hi - lo for lo, hi in ivs) for ivs in sets])
        A = graphon.resolvent @ (spec.sizes * spec.means - spec.failure_cost * mu)
        return cls(graphon=graphon, insolvent=sets, A=A)

    def insolvent_measure(self) -> np.ndarray:
        return np.array([sum(hi - lo for lo, hi in ivs) for ivs in self.insolvent])

    def is_insolvent(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        mask = np.zeros(x.shape, dtype=bool)
        for ivs in self.insolvent:
            for lo, hi in ivs:
                mask |= (x >= lo) & (x < hi)
        return mask

    def value_at(self, x):
        """v(x) = f_k(x) + A_k - beta on the insolvent set, without beta elsewhere."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x)
        spec = self.graphon.spec
        b = spec.block_of_labels(xv)
        v = spec.endowment_at(xv) + self.A[b] - spec.failure_cost * self.is_insolvent(xv)
        return float(v[0]) if scalar else v

    def block_integrals(self) -> np.ndarray:
        """Exact per-block integrals of the valuation density."""
        spec = self.graphon.spec
        return spec.sizes * (spec.means + self.A) - spec.failure_cost * self.insolvent_measure()

    def residual_on_grid(self, num: int = 10_000) -> float:
        """Sup-norm defect of the fixed point on an equispaced grid of (0, 1]."""
        spec = self.graphon.spec
        x = np.arange(1, num + 1, dtype=float) / num
        v = self.value_at(x)
        b = spec.block_of_labels(x)
        cross = (self.graphon.T @ self.block_integrals())[b]
        rhs = spec.endowment_at(x) + cross - spec.failure_cost * (v < spec.threshold)
        return float(np.max(np.abs(v - rhs)))


def putative_block_values(graphon: BlockGraphon, cutoffs: CutoffVector | np.ndarray) -> BlockValues:
    """Evaluator for the cutoff-shaped putative solvency profile.

    Firms of block k with labels below the (clamped) cutoff are insolvent,
    firms at or above it are solvent.
    """
    x = cutoffs.x if isinstance(cutoffs, CutoffVector) else np.asarray(cutoffs, dtype=float)
    if x.shape != (graphon.m,):
        raise ParameterError(f"cutoffs: expected {graphon.m} entries")
    xc = np.clip(x, graphon.t[:-1], graphon.t[1:])
    sets = [[(graphon.t[k], xc[k])] for k in range(graphon.m)]
    return BlockValues.from_insolvent_sets(graphon, sets)


# ---------------------------------------------------------------------------
# extremal cutoffs
# ---------------------------------------------------------------------------


def _cutoff_interior_flags(graphon, x):
    return (x > graphon.t[:-1]) & (x < graphon.t[1:])


def solve_extremal_cutoffs(graphon: BlockGraphon, side: str = "maximal",
                           tol: float = CUTOFF_TOL, max_iter: int = CUTOFF_MAX_ITER) -> CutoffVector:
    """Extremal cutoff equilibrium by monotone clamped fixed-point iteration.

    At an interior jump the value equals v* on the maximal side and v* + beta
    on the minimal side, so the cutoff solves f_k(x_k) = target - A_k(x).
    The maximal side starts at the block starts and climbs to the least fixed
    point; the minimal side starts at the block ends and descends to the
    greatest one. Contraction is governed by the spillover matrix.
    """
    if side not in ("maximal", "minimal"):
        raise ParameterError(f"side: expected 'maximal' or 'minimal', got {side!r}")
    spec = graphon.spec
    lo, hi = graphon.t[:-1], graphon.t[1:]
    target = spec.threshold if side == "maximal" else spec.threshold + spec.failure_cost
    x = lo.copy() if side == "maximal" else hi.copy()
    M1 = graphon.resolvent
    base = spec.sizes * spec.means
    prev_delta = None
    for _ in range(max_iter):
        A = M1 @ (base - spec.failure_cost * (x - lo))
        nxt = np.clip(lo + (target - A - spec.endow_lo) / spec.slopes, lo, hi)
        delta = float(np.max(np.abs(nxt - x)))
        x = nxt
        if delta < tol:
            return CutoffVector(x=x, interior=_cutoff_interior_flags(graphon, x), side=side)
        prev_delta = delta
    contraction = delta / prev_delta if prev_delta else float("nan")
    raise NumericError(
        f"cutoff iteration did not reach {tol:g} in {max_iter} iterations "
        f"(last change {delta:.3e}, contraction estimate {contraction:.3f}, last iterate {x})",
        iterations=max_iter, residual=delta)


# ---------------------------------------------------------------------------
# spillovers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpilloverMatrix:
    B: np.ndarray
    rho: float
    stable: bool
    non_interior: np.ndarray   # rows whose cutoff sat on a block boundary


def spillover_matrix(graphon: BlockGraphon, cutoffs: CutoffVector) -> SpilloverMatrix:
    """Instantaneous cross-block failure rates B[k, k'] around a cutoff profile.

    B[k, k'] = [(I - T D)^{-1} T]_{kk'} * beta / f'(x_k). With linear
    endowments f' is the constant per-block slope, so B does not depend on
    where the cutoffs sit; rows with boundary cutoffs are flagged since the
    marginal reading is only exact for interior ones.
    """
    spec = graphon.spec
    B = (spec.failure_cost / spec.slopes)[:, None] * graphon.resolvent
    rho = float(np.max(np.abs(np.linalg.eigvals(B))))
    return SpilloverMatrix(B=B, rho=rho, stable=rho < 1.0,
                           non_interior=~np.asarray(cutoffs.interior, dtype=bool))


def insolvency_overflow(graphon: BlockGraphon, cutoffs: CutoffVector, ell: int,
                        t: float, side: str = "maximal") -> np.ndarray:
    """Per-block measure of firms pushed across the threshold by a cutoff nudge.

    The cutoff of block `ell` moves by +t (maximal side) or -t (minimal
    side); the perturbed putative values then drag the measure returned here
    across the threshold in each block. Dividing the increment over the t = 0
    baseline by t recovers the spillover matrix column `ell` as t -> 0.
    """
    spec = graphon.spec
    x0 = np.asarray(cutoffs.x, dtype=float)
    shift = np.zeros(graphon.m)
    shift[ell] = t if side == "maximal" else -t
    vals = putative_block_values(graphon, x0 + shift)
    lo, hi = graphon.t[:-1], graphon.t[1:]
    crossing = lo + (spec.threshold - vals.A - spec.endow_lo) / spec.slopes
    if side == "maximal":
        # initially solvent firms whose solvent-branch value drops below v*
        return np.clip(crossing, x0, hi) - x0
    # insolvent firms whose upgraded value would clear v*
    return x0 - np.clip(crossing, lo, x0)


# ---------------------------------------------------------------------------
# swap construction (equilibrium multiplicity generator)
# ---------------------------------------------------------------------------


def swap_construct(values: BlockValues, block: int, interval, shift: float) -> BlockValues:
    """Swap endowment-adjusted values between an interval and its translate.

    Exchanging solvency between I and I + shift inside one block keeps the
    block integrals, hence the aggregates A, unchanged; the margin conditions
    below guarantee the relabeled profile still solves the fixed point.
    Supported directions: I insolvent and I + shift solvent, both with margin
    sup_{x in I} (f(x + shift) - f(x)), or I solvent and I + shift insolvent
    with no margin needed.
    """
    g = values.graphon
    spec = g.spec
    lo, hi = (float(interval[0]), float(interval[1]))
    if not (g.t[block] <= lo <= hi <= g.t[block + 1]):
        raise ParameterError(f"interval [{lo}, {hi}] leaves block {block}")
    if shift < 0:
        raise ParameterError("shift must be non-negative")
    if hi - lo <= 0 or shift == 0.0:
        return values                       # measure-zero or identity swap
    if shift < hi - lo:
        raise ParameterError("shift must exceed the interval diameter")
    if hi + shift > g.t[block + 1] + 1e-12:
        raise ParameterError(f"translated interval leaves block {block}")

    margin = spec.slopes[block] * shift     # sup of the endowment gap on I
    ins = values.insolvent[block]
    beta, v_star = spec.failure_cost, spec.threshold
    A_k = values.A[block]

    def branch_value(x, insolvent_branch):
        # evaluate on block `block` explicitly; x may sit on the open left edge
        f = spec.endow_lo[block] + spec.slopes[block] * (x - g.t[block])
        return f + A_k - (beta if insolvent_branch else 0.0)

    i_insolvent = _contains(ins, lo, hi)
    j_insolvent = _contains(ins, lo + shift, hi + shift)
    i_solvent = _disjoint(ins, lo, hi)
    j_solvent = _disjoint(ins, lo + shift, hi + shift)
    if i_insolvent and j_solvent:
        # need margins on both sides of the threshold
        if not (branch_value(hi, True) < v_star - margin
                and branch_value(lo + shift, False) >= v_star + margin):
            raise ParameterError("margin condition violated for the insolvent-to-solvent swap")
        new_ins = _subtract_interval(ins, (lo, hi))
        new_ins = _normalize_intervals(list(new_ins) + [(lo + shift, hi + shift)])
    elif j_insolvent and i_solvent:
        # reversed direction: endowments already work in our favor
        if not (branch_value(lo, False) >= v_star and branch_value(hi + shift, True) < v_star):
            raise ParameterError("threshold condition violated for the solvent-to-insolvent swap")
        new_ins = _subtract_interval(ins, (lo + shift, hi + shift))
        new_ins = _normalize_intervals(list(new_ins) + [(lo, hi)])
    else:
        raise ParameterError("exactly one of I, I + shift must lie in the insolvent set")

    sets = list(values.insolvent)
    sets[block] = new_ins
    swapped = BlockValues.from_insolvent_sets(g, sets)
    if not np.allclose(swapped.A, values.A, atol=1e-12):
        raise ParameterError("swap changed the insolvent measure; intervals must not overlap")
    return swapped
