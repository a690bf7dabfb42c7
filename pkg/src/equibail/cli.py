"""equibail — block equity networks, solvency equilibria, and bailout plans.

Subcommands
-----------
gen-network      sample a block-model digraph; writes adjacency.csv, holdings.csv
solve-finite     extremal equilibrium on a sampled network; writes values.csv
solve-graphon    extremal continuum cutoffs; writes cutoffs.csv
spillover        spillover matrix and stability; writes spillover.csv
optimize         optimal cash infusion for a budget; writes plan.csv
lift             per-firm lift of the optimal plan; writes infusion.csv
experiment       concentration | cutoffs | transfer | figure batch runs
figure infusion  single-block infusion profile grid; writes figure_infusion.csv

Configuration is a YAML (or JSON) file:

    blocks:
      - {size: 1.0, endow_lo: 0.5, endow_hi: 1.5}
    link_probs: [[1.0]]
    exposure: 0.5
    failure_cost: 0.4
    threshold: 2.0

plus optional run keys (n, n_list, seeds, budget, epsilon, grid_step, alpha,
out, side, seed, kappa_rule); command-line flags win over config values.

Exit codes: 0 ok, 2 missing config, 3 validation, 4 instability,
5 non-interior plan, 6 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import experiments as xp
from .bailout import apply_infusion, lift_to_finite, optimal_infusion
from .csvio import write_csv, write_matrix_csv
from .equilibrium import extremal_equilibrium
from .errors import (EquibailError, NonInteriorError, NumericError,
                     ParameterError, StabilityError)
from .graphon import build_graphon, solve_extremal_cutoffs, spillover_matrix
from .model import (BlockSpec, cross_holdings, endowment_vector, sample_sbm,
                    spec_violations)

EXIT_OK = 0
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_STABILITY = 4
EXIT_NON_INTERIOR = 5
EXIT_NUMERIC = 6

_SPEC_KEYS = {"blocks", "link_probs", "exposure", "failure_cost", "threshold"}
_RUN_KEYS = {"n", "n_list", "seeds", "budget", "epsilon", "grid_step",
             "alpha", "out", "side", "seed", "kappa_rule"}
_BLOCK_KEYS = {"size", "endow_lo", "endow_hi"}


@dataclass
class RunConfig:
    spec: BlockSpec
    command: str = ""
    n: int = 1000
    n_list: list = field(default_factory=lambda: [200, 500, 1000, 2000])
    seeds: list = field(default_factory=lambda: list(range(20)))
    budget: float | None = None
    epsilon: float = 0.01
    grid_step: float = 1e-3
    alpha: float = 0.5
    out_dir: str = "out"
    side: str = "max"
    seed: int = 0
    kappa_rule: str = "from_graphon_cutoffs"


def _parse_seeds(value) -> list[int]:
    # either a count ("20" -> 0..19) or an explicit comma list ("3,5,9")
    if isinstance(value, int):
        return list(range(value))
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    text = str(value)
    if "," in text:
        return [int(v) for v in text.split(",") if v != ""]
    return list(range(int(text)))


def _parse_n_list(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(v) for v in str(value).split(",") if v != ""]


def parse_config(path: str, overrides: dict | None = None, command: str = "") -> RunConfig:
    """Load and fully validate a run configuration, reporting every violation."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ParameterError("config: top level must be a mapping")

    violations = []
    unknown = sorted(set(raw) - _SPEC_KEYS - _RUN_KEYS)
    if unknown:
        violations.append(f"config: unknown keys {unknown}")
    blocks = raw.get("blocks")
    if not isinstance(blocks, list) or not blocks:
        violations.append("blocks: a non-empty list of blocks is required")
        blocks = []
    sizes, lo, hi = [], [], []
    for i, blk in enumerate(blocks):
        if not isinstance(blk, dict):
            violations.append(f"blocks[{i}]: must be a mapping")
            continue
        extra = sorted(set(blk) - _BLOCK_KEYS)
        if extra:
            violations.append(f"blocks[{i}]: unknown keys {extra}")
        missing = sorted(_BLOCK_KEYS - set(blk))
        if missing:
            violations.append(f"blocks[{i}]: missing keys {missing}")
            continue
        sizes.append(float(blk["size"]))
        lo.append(float(blk["endow_lo"]))
        hi.append(float(blk["endow_hi"]))
    link_probs = raw.get("link_probs")
    if link_probs is None:
        violations.append("link_probs: required")
    missing_scalar = False
    for key in ("exposure", "failure_cost", "threshold"):
        if key not in raw:
            violations.append(f"{key}: required")
            missing_scalar = True
    if link_probs is not None and not missing_scalar and len(sizes) == len(blocks) and blocks:
        violations += spec_violations(sizes, link_probs, raw["exposure"],
                                      raw["failure_cost"], raw["threshold"], lo, hi)
    if violations:
        raise ParameterError("; ".join(violations), violations)

    spec = BlockSpec(sizes=np.array(sizes), link_probs=np.array(link_probs, dtype=float),
                     exposure=raw["exposure"], failure_cost=raw["failure_cost"],
                     threshold=raw["threshold"], endow_lo=np.array(lo), endow_hi=np.array(hi))
    cfg = RunConfig(spec=spec, command=command)
    merged = {k: raw[k] for k in _RUN_KEYS if k in raw}
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    run_violations = []
    for key, value in merged.items():
        try:
            if key == "n":
                cfg.n = int(value)
            elif key == "n_list":
                cfg.n_list = _parse_n_list(value)
            elif key == "seeds":
                cfg.seeds = _parse_seeds(value)
            elif key == "budget":
                cfg.budget = float(value)
            elif key == "epsilon":
                cfg.epsilon = float(value)
            elif key == "grid_step":
                cfg.grid_step = float(value)
            elif key == "alpha":
                cfg.alpha = float(value)
            elif key == "out":
                cfg.out_dir = str(value)
            elif key == "side":
                if value not in ("max", "min"):
                    raise ValueError("must be 'max' or 'min'")
                cfg.side = str(value)
            elif key == "seed":
                cfg.seed = int(value)
            elif key == "kappa_rule":
                if value not in xp.KAPPA_RULES:
                    raise ValueError(f"must be one of {xp.KAPPA_RULES}")
                cfg.kappa_rule = str(value)
        except (TypeError, ValueError) as exc:
            run_violations.append(f"{key}: {exc}")
    if run_violations:
        raise ParameterError("; ".join(run_violations), run_violations)
    return cfg


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------


def _out(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def _side_name(side: str) -> str:
    return "maximal" if side == "max" else "minimal"


def _cmd_gen_network(cfg: RunConfig) -> None:
    net = sample_sbm(cfg.spec, cfg.n, cfg.seed)
    holdings = cross_holdings(net, cfg.spec.exposure)
    stamp = f"n={cfg.n} seed={cfg.seed}"
    write_matrix_csv(_out(cfg, "adjacency.csv"), net.adjacency, comment=stamp)
    write_matrix_csv(_out(cfg, "holdings.csv"), holdings.entries, comment=stamp)
    print(f"wrote adjacency.csv and holdings.csv for {stamp}")


def _cmd_solve_finite(cfg: RunConfig) -> None:
    spec = cfg.spec
    net = sample_sbm(spec, cfg.n, cfg.seed)
    holdings = cross_holdings(net, spec.exposure)
    e = endowment_vector(spec, cfg.n)
    side = _side_name(cfg.side)
    eq = extremal_equilibrium(holdings, e, spec.failure_cost, spec.threshold, side=side)
    labels = net.labels
    rows = [(i, labels[i], int(net.block_of[i]), e[i], eq.values.values[i],
             int(eq.solvency[i]), side) for i in range(cfg.n)]
    write_csv(_out(cfg, "values.csv"),
              ("firm_index", "label", "block", "endowment", "value", "solvent", "side"),
              rows, comment=f"n={cfg.n} seed={cfg.seed} iterations={eq.iterations}")
    print(f"wrote values.csv ({side}, {int(eq.solvency.sum())}/{cfg.n} solvent)")


def _cmd_solve_graphon(cfg: RunConfig) -> None:
    side = _side_name(cfg.side)
    cut = solve_extremal_cutoffs(build_graphon(cfg.spec), side=side)
    rows = [(k, cut.x[k], bool(cut.interior[k]), side) for k in range(cfg.spec.m)]
    write_csv(_out(cfg, "cutoffs.csv"), ("block", "x_star", "interior", "side"), rows)
    print("wrote cutoffs.csv: " + " ".join(f"{v:.6f}" for v in cut.x))


def _cmd_spillover(cfg: RunConfig) -> None:
    graphon = build_graphon(cfg.spec)
    cut = solve_extremal_cutoffs(graphon, side=_side_name(cfg.side))
    sp = spillover_matrix(graphon, cut)
    flagged = np.where(sp.non_interior)[0].tolist()
    write_matrix_csv(_out(cfg, "spillover.csv"), sp.B,
                     comment=f"rho={sp.rho:.17g} stable={int(sp.stable)} "
                             f"non_interior_rows={flagged}")
    print(f"wrote spillover.csv (rho={sp.rho:.6f}, stable={sp.stable})")


def _require_budget(cfg: RunConfig) -> float:
    if cfg.budget is None:
        raise ParameterError("budget: required (set --budget or the config key)")
    return cfg.budget


def _cmd_optimize(cfg: RunConfig) -> None:
    graphon = build_graphon(cfg.spec)
    plan = optimal_infusion(graphon, _require_budget(cfg))
    rows = [(k, plan.cutoffs_pre.x[k], plan.y[k], plan.delta[k], plan.e_hat[k],
             plan.support_lo[k], plan.support_hi[k], plan.lambda_star, plan.budget_used)
            for k in range(cfg.spec.m)]
    write_csv(_out(cfg, "plan.csv"),
              ("block", "x_star", "y", "delta", "e_hat", "support_lo", "support_hi",
               "lambda_star", "budget_used"), rows)
    print(f"wrote plan.csv (budget {plan.budget_used:.6g})")


def _cmd_lift(cfg: RunConfig) -> None:
    spec = cfg.spec
    plan = optimal_infusion(build_graphon(spec), _require_budget(cfg))
    fin = lift_to_finite(plan, spec, cfg.n, cfg.epsilon)
    labels = np.arange(cfg.n) / (cfg.n - 1)
    blocks = spec.block_of_labels(labels)
    rows = [(i, labels[i], int(blocks[i]), fin.iota[i]) for i in range(cfg.n)]
    write_csv(_out(cfg, "infusion.csv"), ("firm_index", "label", "block", "iota"), rows,
              comment=f"n={cfg.n} epsilon={cfg.epsilon:.17g} total={fin.total:.17g}")
    print(f"wrote infusion.csv (total {fin.total:.6g} over {cfg.n} firms)")


def _experiment_comment(cfg: RunConfig, extra: str = "") -> str:
    body = (f"seeds={len(cfg.seeds)} seed_list={','.join(map(str, cfg.seeds))} "
            f"n_list={','.join(map(str, cfg.n_list))}")
    return body + (" " + extra if extra else "")


def _write_rows(cfg: RunConfig, name: str, rows, comment: str) -> None:
    write_csv(_out(cfg, name), xp.ROW_FIELDS, [r.as_tuple() for r in rows], comment=comment)
    print(f"wrote {name} ({len(rows)} rows)")


def _cmd_experiment(cfg: RunConfig, which: str) -> None:
    if which == "concentration":
        rows = xp.concentration_run(cfg.spec, cfg.kappa_rule, cfg.n_list, cfg.seeds,
                                    alpha=cfg.alpha)
        _write_rows(cfg, "concentration.csv", rows,
                    _experiment_comment(cfg, f"kappa_rule={cfg.kappa_rule} alpha={cfg.alpha}"))
    elif which == "cutoffs":
        rows = xp.cutoff_convergence_run(cfg.spec, cfg.n_list, cfg.seeds)
        _write_rows(cfg, "cutoffs_experiment.csv", rows, _experiment_comment(cfg))
    elif which == "transfer":
        rows = xp.bailout_transfer_run(cfg.spec, _require_budget(cfg), cfg.epsilon,
                                       cfg.n_list, cfg.seeds)
        _write_rows(cfg, "transfer.csv", rows,
                    _experiment_comment(cfg, f"budget={cfg.budget} epsilon={cfg.epsilon}"))
    elif which == "figure":
        _cmd_figure(cfg)
    else:
        raise ParameterError(f"experiment: unknown name {which!r}")


def _cmd_figure(cfg: RunConfig) -> None:
    grid = xp.figure_infusion_run(cfg.spec, _require_budget(cfg))
    write_csv(_out(cfg, "figure_infusion.csv"), xp.FIGURE_FIELDS, grid,
              comment=f"budget={cfg.budget:.17g} points={grid.shape[0]}")
    print(f"wrote figure_infusion.csv ({grid.shape[0]} points)")


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def dispatch(cfg: RunConfig) -> int:
    """Run the configured command, mapping library errors to exit codes."""
    try:
        if cfg.command == "gen-network":
            _cmd_gen_network(cfg)
        elif cfg.command == "solve-finite":
            _cmd_solve_finite(cfg)
        elif cfg.command == "solve-graphon":
            _cmd_solve_graphon(cfg)
        elif cfg.command == "spillover":
            _cmd_spillover(cfg)
        elif cfg.command == "optimize":
            _cmd_optimize(cfg)
        elif cfg.command == "lift":
            _cmd_lift(cfg)
        elif cfg.command.startswith("experiment:"):
            _cmd_experiment(cfg, cfg.command.split(":", 1)[1])
        elif cfg.command == "figure:infusion":
            _cmd_figure(cfg)
        else:
            raise ParameterError(f"unknown command {cfg.command!r}")
    except StabilityError as exc:
        print(f"error: stability: {exc}", file=sys.stderr)
        return EXIT_STABILITY
    except NonInteriorError as exc:
        print(f"error: non-interior: {exc}", file=sys.stderr)
        return EXIT_NON_INTERIOR
    except NumericError as exc:
        print(f"error: numeric: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ParameterError as exc:
        for item in exc.violations:
            print(f"error: validation: {item}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="equibail", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--config", required=True, help="YAML/JSON model configuration")
        p.add_argument("--out", default=None, help="output directory (default: out)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--seeds", default=None, help="count or comma list of seeds")
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--n-list", dest="n_list", default=None, help="comma list of sizes")
        p.add_argument("--budget", type=float, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--grid-step", dest="grid_step", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--side", choices=("max", "min"), default=None)
        p.add_argument("--kappa-rule", dest="kappa_rule", choices=xp.KAPPA_RULES, default=None)
        return p

    add("gen-network", help="sample a network and export its matrices")
    add("solve-finite", help="extremal equilibrium on a sampled network")
    add("solve-graphon", help="extremal continuum cutoffs")
    add("spillover", help="spillover matrix and stability")
    add("optimize", help="optimal cash infusion plan")
    add("lift", help="lift the optimal plan to a finite network")
    p = add("experiment", help="batch experiment runs")
    p.add_argument("name", choices=("concentration", "cutoffs", "transfer", "figure"))
    p = add("figure", help="figure data grids")
    p.add_argument("name", choices=("infusion",))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    command = args.command
    if command == "experiment":
        command = f"experiment:{args.name}"
    elif command == "figure":
        command = f"figure:{args.name}"
    overrides = {k: getattr(args, k, None) for k in
                 ("seed", "seeds", "n", "n_list", "budget", "epsilon",
                  "grid_step", "alpha", "side", "kappa_rule")}
    overrides["out"] = args.out
    try:
        cfg = parse_config(args.config, overrides=overrides, command=command)
    except FileNotFoundError as exc:
        print(f"error: io: config file not found: {exc}", file=sys.stderr)
        return EXIT_IO
    except ParameterError as exc:
        for item in exc.violations:
            print(f"error: validation: {item}", file=sys.stderr)
        return EXIT_VALIDATION
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
