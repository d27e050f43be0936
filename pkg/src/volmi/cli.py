"""Command-line surface: one binary, four command groups.

    volmi mi   eval|grid      evaluate measures / write slice grids
    volmi vmi  symbolic|numeric   closed forms / quadrature values
    volmi mech run|audit      run mechanisms / truthfulness audits
    volmi opt  vstar|threshold|sweep   effort-incentive pipeline

JSON arguments accept inline JSON or a path to a JSON file.  ``--rational``
switches numeric parsing to exact decimals.  Exit codes: 0 success, 2
configuration error, 3 precondition violation.
"""

import argparse
import json
import os
import sys
from fractions import Fraction

from .core import (ColumnStochasticMatrix, JointDistribution, random_stochastic)
from .errors import ConfigurationError, PreconditionError
from .estimators import AveragedUStat, FirstK
from .measures import MeasureSpec
from .mechanisms import (AgentProfile, MechanismSpec, run_mechanism, simulate,
                         truthfulness_audit)
from .optimizer import (EffortModel, approximation_sweep, compute_vstar,
                        dmi_counterexample_check, find_equilibria,
                        select_equilibrium, sweep_rows_to_csv,
                        threshold_payments)
from .vmi import DensitySpec, vmi_numeric, vmi_symbolic
from .viz import emit, marching_squares, slice_grid


def _load_json(arg: str):
    if arg is None:
        raise ConfigurationError("missing JSON argument")
    if os.path.exists(arg):
        with open(arg, "r", encoding="utf-8") as fh:
            return json.load(fh)
    try:
        return json.loads(arg)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"not a file and not valid JSON: {arg!r}") from exc


def _policy_from_json(obj):
    if not obj:
        return AveragedUStat(subsample=200, seed=0)
    if obj.get("kind") == "FirstK":
        return FirstK()
    return AveragedUStat(subsample=obj.get("subsample"), seed=obj.get("seed", 0))


def _print(obj):
    if isinstance(obj, Fraction):
        print(f"{obj} ({float(obj):.12g})")
    else:
        print(obj)


# -- mi ----------------------------------------------------------------------


def _cmd_mi_eval(args):
    measure = MeasureSpec.from_json(_load_json(args.measure), exact=args.rational)
    joint = JointDistribution.from_json(_load_json(args.joint), exact=args.rational)
    _print(measure.evaluate(joint))
    return 0


def _cmd_mi_grid(args):
    measure = MeasureSpec.from_json(_load_json(args.measure), exact=args.rational)
    grid = slice_grid(measure, args.p0, args.n)
    if args.levels:
        if args.format == "csv":
            raise ConfigurationError("contours emit as svg or json; "
                                     "drop --levels for a csv grid")
        levels = [float(x) for x in args.levels.split(",")]
        emit(marching_squares(grid, levels), args.format, args.out)
    else:
        emit(grid, args.format, args.out)
    print(f"wrote {args.out}")
    return 0


# -- vmi ---------------------------------------------------------------------


def _cmd_vmi_symbolic(args):
    density = DensitySpec.from_json(_load_json(args.density), exact=True)
    form = vmi_symbolic(density, args.C, args.mode)
    payload = form.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
        print(f"wrote {args.out}")
    print(f"mode={form.mode} degree={form.degree} radical_pow={form.radical_pow}")
    print("inner:", form.inner.to_text())
    return 0


def _cmd_vmi_numeric(args):
    density = DensitySpec.from_json(_load_json(args.density), exact=args.rational)
    joint = JointDistribution.from_json(_load_json(args.joint), exact=args.rational)
    value, err = vmi_numeric(density, joint, budget=args.budget, seed=args.seed)
    print(f"{value:.12g} +- {err:.3g}")
    return 0


# -- mech --------------------------------------------------------------------


def _cmd_mech_run(args):
    cfg = _load_json(args.config)
    measure = MeasureSpec.from_json(cfg["measure"], exact=args.rational)
    if "reports" in cfg:
        n = len(cfg["reports"])
    else:
        n = len(cfg.get("agents", [])) or 2
    spec = MechanismSpec(measure=measure, T=int(cfg.get("T", 8)),
                         policy=_policy_from_json(cfg.get("policy")),
                         scale=cfg.get("scale", 1), n=n)
    seed = int(cfg.get("seed", args.seed))
    if "reports" in cfg:
        result = run_mechanism(spec, cfg["reports"], seed=seed)
        payload = {"payments": [float(p) for p in result.payments],
                   "pairwise": {f"{i},{j}": float(v)
                                for (i, j), v in result.pairwise.items()},
                   "permutations": {f"{i},{j}": p
                                    for (i, j), p in result.permutations.items()}}
    else:
        joint = JointDistribution.from_json(cfg["joint"], exact=args.rational)
        profiles = [AgentProfile(ColumnStochasticMatrix.from_json(
            a["strategy"] if isinstance(a["strategy"], dict)
            else {"rows": a["strategy"]}, exact=args.rational))
            for a in cfg["agents"]]
        sim = simulate(joint, profiles, spec,
                       replicates=int(cfg.get("replicates", 10_000)), seed=seed)
        payload = {"mean": sim.mean, "stderr": sim.stderr,
                   "expected": [float(e) for e in sim.expected],
                   "replicates": sim.replicates}
    if args.out and args.out.endswith(".csv"):
        if "mean" in payload:
            lines = ["agent,mean,stderr,expected"]
            lines += [f"{k},{payload['mean'][k]:.17g},{payload['stderr'][k]:.17g},"
                      f"{payload['expected'][k]:.17g}"
                      for k in range(len(payload["mean"]))]
        else:
            lines = ["agent,payment"]
            lines += [f"{k},{p:.17g}" for k, p in enumerate(payload["payments"])]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(payload, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def _cmd_mech_audit(args):
    measure = MeasureSpec.from_json(_load_json(args.measure), exact=args.rational)
    joint = JointDistribution.from_json(_load_json(args.joint), exact=args.rational)
    C = joint.C
    strategies = [ColumnStochasticMatrix.identity(C, exact=joint.exact)]
    strategies += [random_stochastic(C, args.seed + k) for k in range(args.strategies)]
    report = truthfulness_audit(measure, joint, strategies, tol=args.tol)
    print(f"checked {report.checked} strategies; truthful value "
          f"{report.truthful_value:.6g}; uninformative {report.uninformative_value:.3g}")
    if report.passed:
        print("PASS: no monotonicity violations")
        return 0
    for v in report.violations[:20]:
        print(f"VIOLATION [{v.kind}] strategy #{v.strategy_index}: "
              f"{v.deviated_value:.6g} > {v.truthful_value:.6g}")
    if not report.positivity_gap_ok:
        print("VIOLATION: uninformative strategy not at zero payment")
    print(f"FAIL: {len(report.violations)} violations")
    return 0


# -- opt ---------------------------------------------------------------------


def _cmd_opt_vstar(args):
    model = EffortModel.from_json(_load_json(args.model))
    vs = compute_vstar(model)
    print(f"v* = {vs.vstar} ({float(vs.vstar):.6g}) at pair "
          f"({vs.alice_index}, {vs.bob_index}); degenerate={vs.degenerate}")
    print("U* =", json.dumps(vs.ustar.to_json()))
    return 0


def _cmd_opt_threshold(args):
    model = EffortModel.from_json(_load_json(args.model))
    scheme = threshold_payments(model, Fraction(str(args.eps)))
    sel = select_equilibrium(find_equilibria(model, scheme, Fraction(str(args.delta))))
    print(f"levels: alice {scheme.level_a} bob {scheme.level_b}")
    print(f"selected equilibrium ({sel.chosen.alice_index}, {sel.chosen.bob_index}); "
          f"requester guarantee {sel.requester_guarantee} "
          f"({float(sel.requester_guarantee):.6g})")
    rep = None
    try:
        rep = dmi_counterexample_check(model)
    except PreconditionError:
        pass
    if rep is not None:
        print(f"determinant counterexample: equal |det| {rep.det_cheap}, "
              f"utility cap {rep.utility_cap} vs v* {rep.vstar}")
    return 0


def _cmd_opt_sweep(args):
    model = EffortModel.from_json(_load_json(args.model))
    alphas = [int(a) for a in args.alphas.split(",")]
    result = approximation_sweep(model, Fraction(str(args.eps)),
                                 Fraction(str(args.delta)), alphas,
                                 calibrate_at_target=not args.no_calibration)
    csv = sweep_rows_to_csv(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv)
        print(f"wrote {args.out}")
    print(csv, end="")
    return 0


# -- wiring --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rational", action="store_true",
                        help="exact mode: JSON numbers parse as decimals")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="volmi", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    groups = p.add_subparsers(dest="group", required=True)

    def sub(parent, name):
        return parent.add_parser(name, parents=[common])

    mi = groups.add_parser("mi").add_subparsers(dest="cmd", required=True)
    ev = sub(mi, "eval")
    ev.add_argument("--measure", required=True)
    ev.add_argument("--joint", required=True)
    ev.set_defaults(fn=_cmd_mi_eval)
    gr = sub(mi, "grid")
    gr.add_argument("--measure", required=True)
    gr.add_argument("--p0", type=float, default=0.5)
    gr.add_argument("--n", type=int, default=201)
    gr.add_argument("--out", required=True)
    gr.add_argument("--format", default="csv", choices=("csv", "json", "svg"))
    gr.add_argument("--levels", default=None,
                    help="comma-separated contour levels (svg/json output)")
    gr.set_defaults(fn=_cmd_mi_grid)

    vm = groups.add_parser("vmi").add_subparsers(dest="cmd", required=True)
    sy = sub(vm, "symbolic")
    sy.add_argument("--density", required=True)
    sy.add_argument("--C", type=int, default=2)
    sy.add_argument("--mode", default="even_times_dmi",
                    choices=("odd_direct", "even_times_dmi", "squared"))
    sy.add_argument("--out", default=None)
    sy.set_defaults(fn=_cmd_vmi_symbolic)
    nu = sub(vm, "numeric")
    nu.add_argument("--density", required=True)
    nu.add_argument("--joint", required=True)
    nu.add_argument("--budget", type=int, default=2_000_000)
    nu.set_defaults(fn=_cmd_vmi_numeric)

    me = groups.add_parser("mech").add_subparsers(dest="cmd", required=True)
    ru = sub(me, "run")
    ru.add_argument("--config", required=True)
    ru.add_argument("--out", default=None)
    ru.set_defaults(fn=_cmd_mech_run)
    au = sub(me, "audit")
    au.add_argument("--measure", required=True)
    au.add_argument("--joint", required=True)
    au.add_argument("--strategies", type=int, default=100)
    au.add_argument("--tol", type=float, default=1e-9)
    au.set_defaults(fn=_cmd_mech_audit)

    op = groups.add_parser("opt").add_subparsers(dest="cmd", required=True)
    vs = sub(op, "vstar")
    vs.add_argument("--model", required=True)
    vs.set_defaults(fn=_cmd_opt_vstar)
    th = sub(op, "threshold")
    th.add_argument("--model", required=True)
    th.add_argument("--eps", type=float, default=0.5)
    th.add_argument("--delta", type=float, default=0.0)
    th.set_defaults(fn=_cmd_opt_threshold)
    sw = sub(op, "sweep")
    sw.add_argument("--model", required=True)
    sw.add_argument("--eps", type=float, default=0.5)
    sw.add_argument("--delta", type=float, default=1.0)
    sw.add_argument("--alphas", default="20,40,80")
    sw.add_argument("--out", default=None)
    sw.add_argument("--no-calibration", action="store_true",
                    help="use the constant scale (e*+eps) without dividing by "
                         "the measure at the target joint")
    sw.set_defaults(fn=_cmd_opt_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"precondition violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
