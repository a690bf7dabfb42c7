"""Desk-scale batch runs probing the asymptotic claims of the model.

Each run returns flat (experiment, n, seed, block, metric, value) records,
sorted deterministically so identical configurations rewrite byte-identical
CSVs regardless of how seeds were fanned out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bailout import (InfusionPlan, apply_infusion, infusion_density,
                      lift_to_finite, optimal_infusion, post_infusion_aggregates)
from .equilibrium import LinearValueSolver, extremal_equilibrium, putative_values
from .errors import ParameterError
from .graphon import build_graphon, putative_block_values, solve_extremal_cutoffs
from .model import (BlockSpec, block_regular_matrix, cross_holdings,
                    endowment_vector, labels_for, sample_sbm, spectral_deviation)

KAPPA_RULES = ("from_graphon_cutoffs", "all_solvent")


@dataclass(frozen=True)
class ExperimentRow:
    experiment: str
    n: int
    seed: int
    block: int | None
    metric: str
    value: float

    def as_tuple(self):
        return (self.experiment, self.n, self.seed,
                "" if self.block is None else self.block, self.metric, self.value)


ROW_FIELDS = ("experiment", "n", "seed", "block", "metric", "value")


def _sorted(rows):
    return sorted(rows, key=lambda r: (r.experiment, r.n, r.seed,
                                       -1 if r.block is None else r.block, r.metric))


def concentration_run(spec: BlockSpec, kappa_rule: str, n_list, seeds, alpha: float = 0.5):
    """Sup-norm gap between sampled and block-regular putative values per (n, seed).

    Also records the spectral norm of the sampling noise and its reference
    bound at the given exponent.
    """
    if kappa_rule not in KAPPA_RULES:
        raise ParameterError(f"kappa_rule: expected one of {KAPPA_RULES}, got {kappa_rule!r}")
    cut = None
    if kappa_rule == "from_graphon_cutoffs":
        cut = solve_extremal_cutoffs(build_graphon(spec), side="maximal")
    rows = []
    for n in n_list:
        e = endowment_vector(spec, n)
        cbar = block_regular_matrix(spec, n)
        solver_bar = LinearValueSolver(cbar.entries)
        labels = labels_for(n)
        blocks = spec.block_of_labels(labels)
        if cut is None:
            kappa = np.ones(n)
        else:
            kappa = (labels >= cut.x[blocks]).astype(float)
        vbar = putative_values(cbar, e, spec.failure_cost, kappa, solver=solver_bar)
        for seed in seeds:
            net = sample_sbm(spec, n, seed)
            c = cross_holdings(net, spec.exposure)
            v = putative_values(c, e, spec.failure_cost, kappa)
            dev = spectral_deviation(c, cbar, spec.link_probs, alpha=alpha)
            sup = float(np.max(np.abs(v.values - vbar.values)))
            rows += [ExperimentRow("concentration", n, seed, None, "sup_deviation", sup),
                     ExperimentRow("concentration", n, seed, None, "lambda_norm", dev.lambda_norm),
                     ExperimentRow("concentration", n, seed, None, "lemma_bound", dev.bound)]
    return _sorted(rows)


def cutoff_convergence_run(spec: BlockSpec, n_list, seeds):
    """Extreme failing/surviving labels per block versus the continuum cutoffs."""
    graphon = build_graphon(spec)
    cut = solve_extremal_cutoffs(graphon, side="maximal")
    rows = []
    for n in n_list:
        e = endowment_vector(spec, n)
        for seed in seeds:
            net = sample_sbm(spec, n, seed)
            c = cross_holdings(net, spec.exposure)
            eq = extremal_equilibrium(c, e, spec.failure_cost, spec.threshold, side="maximal")
            labels = net.labels
            for k in range(spec.m):
                in_block = net.block_of == k
                insolvent = in_block & (eq.solvency == 0)
                solvent = in_block & (eq.solvency == 1)
                i_bar = float(labels[insolvent].max()) if insolvent.any() else float(graphon.t[k])
                i_low = float(labels[solvent].min()) if solvent.any() else float(graphon.t[k + 1])
                x_star = float(cut.x[k])
                rows += [ExperimentRow("cutoffs", n, seed, k, "i_bar", i_bar),
                         ExperimentRow("cutoffs", n, seed, k, "i_lower", i_low),
                         ExperimentRow("cutoffs", n, seed, k, "x_star", x_star),
                         ExperimentRow("cutoffs", n, seed, k, "i_bar_abs_dev", abs(i_bar - x_star)),
                         ExperimentRow("cutoffs", n, seed, k, "i_lower_abs_dev", abs(i_low - x_star))]
    return _sorted(rows)


def bailout_transfer_run(spec: BlockSpec, budget: float, epsilon: float, n_list, seeds):
    """Finite solvent fraction under the lifted plan versus the continuum measure."""
    graphon = build_graphon(spec)
    plan = optimal_infusion(graphon, budget)
    post = apply_infusion(graphon, plan)
    graphon_measure = float(np.sum(graphon.t[1:] - post.x))
    rows = []
    for n in n_list:
        fin = lift_to_finite(plan, spec, n, epsilon)
        e = endowment_vector(spec, n) + fin.iota
        for seed in seeds:
            net = sample_sbm(spec, n, seed)
            c = cross_holdings(net, spec.exposure)
            eq = extremal_equilibrium(c, e, spec.failure_cost, spec.threshold, side="maximal")
            frac = float(np.mean(eq.solvency))
            rows += [ExperimentRow("transfer", n, seed, None, "solvent_fraction", frac),
                     ExperimentRow("transfer", n, seed, None, "graphon_solvent_measure",
                                   graphon_measure),
                     ExperimentRow("transfer", n, seed, None, "budget_per_firm", fin.total / n)]
    return _sorted(rows)


FIGURE_FIELDS = ("x", "endowment", "endowment_post", "value_pre", "value_post", "iota")


def figure_infusion_run(spec: BlockSpec, budget: float, num_points: int = 10_000):
    """Single-block infusion profile: (x, e, e + iota, value pre/post, iota) on a grid."""
    if spec.m != 1:
        raise ParameterError("figure run requires a single-block parameterization")
    graphon = build_graphon(spec)
    plan = optimal_infusion(graphon, budget)
    pre = putative_block_values(graphon, plan.cutoffs_pre)
    post_cut = apply_infusion(graphon, plan)
    post_a = post_infusion_aggregates(graphon, plan, post_cut)

    x = np.arange(1, num_points + 1, dtype=float) / num_points
    endow = spec.endowment_at(x)
    iota = infusion_density(plan, spec, x)
    endow_post = endow + iota
    value_pre = pre.value_at(x)
    blocks = spec.block_of_labels(x)
    value_post = endow_post + post_a[blocks] - spec.failure_cost * (x < post_cut.x[blocks])
    return np.column_stack([x, endow, endow_post, value_pre, value_post, iota])
