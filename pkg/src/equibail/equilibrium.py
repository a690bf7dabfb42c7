"""Solvency equilibria of the finite bankruptcy-cost fixed point.

For a fixed 0/1 solvency vector kappa the valuation system is linear,
V = e + C V - beta (1 - kappa), and kappa is feasible when the solved values
reproduce it: V_i >= v* exactly where kappa_i = 1. The extremal equilibria
are reached by monotone iteration on kappa.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericError, ParameterError
from .model import HoldingsMatrix

# direct LU up to this size, stationary (Neumann) iteration above it
DIRECT_SOLVE_LIMIT = 2000
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class ValuationProfile:
    values: np.ndarray
    residual: float      # sup-norm defect of the linear fixed point


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    violations: np.ndarray   # indices breaking the threshold condition


@dataclass(frozen=True)
class EquilibriumResult:
    values: ValuationProfile
    solvency: np.ndarray
    side: str                # "maximal" | "minimal"
    iterations: int


def _entries(C) -> np.ndarray:
    if isinstance(C, HoldingsMatrix):
        return C.entries
    return np.asarray(C, dtype=float)


class LinearValueSolver:
    """Solves (I - C) V = rhs repeatedly for a fixed cross-holdings matrix.

    Column sums below 1 guarantee the spectral radius of C is below 1, so the
    system is uniquely solvable; small systems reuse one LU factorization,
    large ones fall back to the geometrically convergent stationary iteration
    V <- rhs + C V with residual tolerance 1e-12.
    """

    def __init__(self, C, direct_limit: int = DIRECT_SOLVE_LIMIT):
        self.C = _entries(C)
        self.n = self.C.shape[0]
        if self.C.shape != (self.n, self.n):
            raise ParameterError("cross-holdings matrix must be square")
        self.direct = self.n <= direct_limit
        if self.direct:
            self._lu = scipy.linalg.lu_factor(np.eye(self.n) - self.C)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.direct:
            return scipy.linalg.lu_solve(self._lu, rhs)
        v = rhs.copy()
        for _ in range(10_000):
            nxt = rhs + self.C @ v
            if float(np.max(np.abs(nxt - v))) <= 1e-12:
                return nxt
            v = nxt
        raise NumericError("stationary iteration stalled above residual 1e-12",
                           residual=float(np.max(np.abs(rhs + self.C @ v - v))))


def putative_values(C, e, beta: float, kappa, solver: LinearValueSolver | None = None) -> ValuationProfile:
    """Valuations for a putative solvency vector: V = (I - C)^{-1} (e - beta (1 - kappa))."""
    Cm = _entries(C)
    e = np.asarray(e, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if solver is None:
        solver = LinearValueSolver(Cm)
    rhs = e - beta * (1.0 - kappa)
    v = solver.solve(rhs)
    residual = float(np.max(np.abs(v - (rhs + Cm @ v))))
    if residual > RESIDUAL_TOL:
        raise NumericError(f"linear solve residual {residual:.3e} exceeds {RESIDUAL_TOL:g}",
                           residual=residual)
    return ValuationProfile(values=v, residual=residual)


def feasibility(values, kappa, v_star: float) -> FeasibilityResult:
    """Indices violating `V_i >= v* iff kappa_i = 1`; ties at v* count as solvent."""
    v = values.values if isinstance(values, ValuationProfile) else np.asarray(values, dtype=float)
    kappa = np.asarray(kappa)
    if v.shape != kappa.shape:
        raise ParameterError("values and kappa must have matching lengths")
    solvent = v >= v_star
    bad = np.where(solvent != (kappa == 1))[0]
    return FeasibilityResult(feasible=bad.size == 0, violations=bad)


def extremal_equilibrium(C, e, beta: float, v_star: float, side: str = "maximal") -> EquilibriumResult:
    """Maximal or minimal feasible equilibrium by monotone iteration on kappa.

    Maximal: start all-solvent and repeatedly relabel by the threshold test;
    the kappa sequence decreases pointwise. Minimal: start all-insolvent and
    only ever upgrade entries whose values clear the threshold; the sequence
    increases. Either way a feasible fixed point is reached within n rounds.
    """
    if side not in ("maximal", "minimal"):
        raise ParameterError(f"side: expected 'maximal' or 'minimal', got {side!r}")
    Cm = _entries(C)
    e = np.asarray(e, dtype=float)
    n = e.size
    solver = LinearValueSolver(Cm)
    kappa = np.ones(n, dtype=np.int8) if side == "maximal" else np.zeros(n, dtype=np.int8)
    profile = None
    for rounds in range(1, n + 2):
        profile = putative_values(Cm, e, beta, kappa, solver=solver)
        relabeled = (profile.values >= v_star).astype(np.int8)
        nxt = relabeled if side == "maximal" else np.maximum(kappa, relabeled)
        if np.array_equal(nxt, kappa):
            return EquilibriumResult(values=profile, solvency=kappa, side=side, iterations=rounds)
        if side == "maximal" and np.any(nxt > kappa):
            raise RuntimeError("monotone descent violated; non-monotone relabeling step")
        kappa = nxt
    raise RuntimeError(f"extremal iteration exceeded {n} rounds without reaching a fixed point")
