"""Command-line interface.

Subcommands
-----------
statdim <cone-spec>          closed-form statistical dimension (optional MC check)
ivols <cone-spec>            intrinsic-volume sequence of a supported cone
predict --delta-c A --delta-k B --d D --eta E
                             approximate-kinematics verdict for two cones
run <experiment> [--config FILE] [--seed N] [--out DIR] [--workers W]
                             run a phase-transition experiment, emit outputs
fit <grid.csv>               logistic transition fits of an emitted grid

Cone-spec grammar (angles in radians):

    subspace:<j>:<d> | orthant:<d> | soc:<d> | circ:<d>:<alpha> | psd:<n>
    | polar(<spec>) | product(<spec>,<spec>,...)

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from .cones import (
    Circular,
    ConeSpec,
    Orthant,
    PolarOf,
    Product,
    PsdSym,
    SecondOrder,
    Subspace,
    ambient_dimension,
)
from .experiments import (
    EXPERIMENT_NAMES,
    ExperimentConfig,
    emit_outputs,
    parse_config_file,
    run_experiment,
)
from .kinematics import (
    IntrinsicVolumes,
    ivols_circular,
    ivols_orthant,
    ivols_product,
    ivols_subspace,
    kinematic_predict,
    statdim_from_ivols,
)
from .numerics import RngStream, logistic_fit
from .statdim import statdim_closed_form, statdim_monte_carlo


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Cone-spec mini language
# ---------------------------------------------------------------------------


def _split_top(text: str) -> list:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise UsageError(f"unbalanced parentheses in {text!r}")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise UsageError(f"unbalanced parentheses in {text!r}")
    parts.append("".join(cur))
    return parts


def parse_cone_spec(text: str) -> ConeSpec:
    text = text.strip()
    low = text.lower()
    if low.startswith("polar(") and low.endswith(")"):
        return PolarOf(parse_cone_spec(text[6:-1]))
    if low.startswith("product(") and low.endswith(")"):
        inner = _split_top(text[8:-1])
        return Product(tuple(parse_cone_spec(p) for p in inner))
    fields = text.split(":")
    kind = fields[0].lower()
    try:
        if kind == "orthant" and len(fields) == 2:
            return Orthant(int(fields[1]))
        if kind == "soc" and len(fields) == 2:
            return SecondOrder(int(fields[1]))
        if kind == "circ" and len(fields) == 3:
            return Circular(int(fields[1]), float(fields[2]))
        if kind == "psd" and len(fields) == 2:
            return PsdSym(int(fields[1]))
        if kind == "subspace" and len(fields) == 3:
            return Subspace.canonical(int(fields[1]), int(fields[2]))
    except ValueError as exc:
        raise UsageError(f"bad cone spec {text!r}: {exc}") from exc
    raise UsageError(f"unrecognized cone spec {text!r}")


def _ivols_of(cone: ConeSpec) -> IntrinsicVolumes:
    match cone:
        case Subspace():
            return ivols_subspace(cone.dim, cone.basis.shape[0])
        case Orthant(d=d):
            return ivols_orthant(d)
        case SecondOrder(d=d):
            return ivols_circular(d, math.pi / 4)
        case Circular(d=d, alpha=alpha):
            return ivols_circular(d, alpha)
        case Product(factors=fs):
            vols = _ivols_of(fs[0])
            for f in fs[1:]:
                vols = ivols_product(vols, _ivols_of(f))
            return vols
        case PolarOf(cone=inner):
            return _ivols_of(inner).reversed()
    raise RuntimeError(
        f"no intrinsic-volume formula for cone variant {type(cone).__name__}"
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_statdim(args) -> int:
    cone = parse_cone_spec(args.cone)
    est = statdim_closed_form(cone)
    d = ambient_dimension(cone)
    if est is None:
        raise RuntimeError(f"no closed form for {args.cone}")
    print(f"cone            {args.cone}")
    print(f"ambient dim     {d}")
    print(f"statdim         {est.value:.10g}")
    if args.mc_samples:
        mc = statdim_monte_carlo(cone, args.mc_samples, RngStream(args.seed))
        print(f"monte carlo     {mc.value:.6f} +- {mc.stderr:.6f} ({args.mc_samples} samples)")
    return 0


def _cmd_ivols(args) -> int:
    cone = parse_cone_spec(args.cone)
    vols = _ivols_of(cone)
    vols.validate(tol=1e-7)
    print(f"cone      {args.cone}")
    print(f"statdim   {statdim_from_ivols(vols):.10g}")
    for k, vk in enumerate(vols.v):
        print(f"v[{k}] = {vk:.12g}")
    return 0


def _cmd_predict(args) -> int:
    pred = kinematic_predict(args.delta_c, args.delta_k, args.d, args.eta)
    print(f"a_eta           {pred.a_eta:.6f}")
    print(f"lambda          {pred.lam:.6f}")
    print(f"tail bound      {pred.bound:.6g}")
    print(f"verdict         {pred.verdict}")
    return 0


def _cmd_run(args) -> int:
    overrides = {"experiment": args.experiment}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.config:
        config = parse_config_file(args.config, overrides)
    else:
        config = ExperimentConfig(**overrides)
    result = run_experiment(config)
    total = int(result.trials.sum())
    wins = int(result.successes.sum())
    print(f"experiment      {result.experiment}")
    print(f"cells           {result.successes.size}  ({wins}/{total} successes)")
    print(f"wall time       {result.wall_time:.1f} s")
    for fit in result.fits:
        flag = "  [separated]" if fit["separated"] else ""
        print(f"fit {result.row_name}={fit['row']:<4} mu = {fit['mu']:.3f}{flag}")
    if config.out_dir:
        paths = emit_outputs(result, config.out_dir)
        for name, path in sorted(paths.items()):
            print(f"wrote {name:4} -> {path}")
    return 0


def _cmd_fit(args) -> int:
    with open(args.grid) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    if not rows:
        raise RuntimeError(f"{args.grid}: no data rows")
    by_row: dict = {}
    for rec in rows:
        a, b, succ, trials = rec[0], int(rec[1]), int(rec[2]), int(rec[3])
        by_row.setdefault(a, []).append((b, succ, trials))
    out = {}
    for a, column in sorted(by_row.items(), key=lambda kv: float(kv[0])):
        fit = logistic_fit(column)
        flag = "  [separated]" if fit.separated else ""
        print(f"{header[0]}={a:<6} mu = {fit.mu:.4f}   beta1 = {fit.beta1:.4f}{flag}")
        out[a] = fit.mu
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="conelab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"conelab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("statdim", help="closed-form statistical dimension")
    p.add_argument("cone")
    p.add_argument("--mc-samples", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_statdim)

    p = sub.add_parser("ivols", help="intrinsic volumes of a supported cone")
    p.add_argument("cone")
    p.set_defaults(func=_cmd_ivols)

    p = sub.add_parser("predict", help="approximate-kinematics verdict")
    p.add_argument("--delta-c", type=float, required=True)
    p.add_argument("--delta-k", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("run", help="run a phase-transition experiment")
    p.add_argument("experiment", choices=EXPERIMENT_NAMES)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("fit", help="logistic fits of an emitted grid.csv")
    p.add_argument("grid")
    p.set_defaults(func=_cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (SystemExit, KeyboardInterrupt):
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
