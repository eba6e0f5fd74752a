"""Command-line front end: gen, solve, recover, pool, profile, scatter, fixture.

Exit codes: 0 ok/optimal, 2 timeout, 3 validation error, 4 I/O error.
LEXSCHED_THREADS > 1 fans batch work (scatter) out to a process pool;
results merge in input order, so output stays deterministic.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys
from fractions import Fraction

from . import jsonio
from .baselines import (
    collect_solution_pool,
    highest_rank_method,
    sequential_method,
    solve_constrained_min,
    weighting_method,
)
from .bnb import Limits, solve_lexopt
from .generators import (
    FIXTURE_FAMILIES,
    DISTRIBUTIONS,
    GenSpec,
    PerturbSpec,
    gen_degenerate,
    gen_fixture,
    gen_perturbations,
    gen_wellformed,
)
from .model import (
    InfeasibleError,
    Instance,
    LexSchedError,
    SizeLimitError,
    ValidationError,
    completion_vector,
    makespan,
    weighted_value,
)
from .profiles import normalize_scatter, performance_profile, profile_csv, scatter_csv, write_text
from .recovery import apply_perturbations, binding_recovery, flexible_recovery, verify_guarantee

EXIT_OK = 0
EXIT_TIMEOUT = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

METHODS = ("bnb", "sequential", "weighting", "highest-rank")


def _limits(args) -> Limits:
    return Limits(time_s=args.time_limit, nodes=args.node_limit)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("LEXSCHED_THREADS", "1")))
    except ValueError:
        return 1


def _run_method(instance: Instance, method: str, limits: Limits, args):
    if method == "bnb":
        return solve_lexopt(instance, limits)
    if method == "sequential":
        return sequential_method(instance, limits)
    if method == "weighting":
        return weighting_method(instance, base=args.base, limits=limits)
    if method == "highest-rank":
        return highest_rank_method(instance, pool_capacity=args.pool_capacity, limits=limits)
    raise ValidationError(f"unknown method {method!r}")


def cmd_gen(args) -> int:
    if args.kind == "degenerate":
        instance = gen_degenerate(args.m, args.n, args.dist, args.seed)
    else:
        spec = GenSpec("wellformed", args.m, args.n, args.q, args.dist, args.seed)
        instance = gen_wellformed(spec)
    if args.dn is None and args.dm is None:
        text = jsonio.dump_json(jsonio.instance_to_obj(instance), args.out)
        if args.out is None:
            sys.stdout.write(text)
        return EXIT_OK
    # with disturbance counts we emit a full recovery scenario
    pspec = PerturbSpec(
        seed=args.perturb_seed if args.perturb_seed is not None else args.seed + 1,
        d_n=args.dn,
        d_m=args.dm,
    )
    perturbations = gen_perturbations(instance, pspec)
    report = solve_lexopt(instance, Limits(time_s=args.time_limit))
    scenario = apply_perturbations(instance, report.schedule, perturbations)
    text = jsonio.dump_json(jsonio.scenario_to_obj(scenario), args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = jsonio.load_instance(args.instance)
    report = _run_method(instance, args.method, _limits(args), args)
    text = jsonio.dump_json(jsonio.solve_report_to_obj(report, args.instance), args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK if report.status == "optimal" else EXIT_TIMEOUT


def _reference_makespan(scenario, args) -> tuple[int, str]:
    if args.optimal is not None:
        return args.optimal, "supplied"
    new = scenario.new
    if new.m**new.n <= 10**7:
        from .model import brute_force_makespan

        return brute_force_makespan(new), "optimal"
    result = solve_constrained_min(new, 1, (), Limits(time_s=args.time_limit))
    return result.value, "optimal" if result.status == "optimal" else "best-known"


def cmd_recover(args) -> int:
    scenario = jsonio.load_scenario(args.scenario)
    status = "optimal"
    if args.strategy == "binding":
        recovered = binding_recovery(scenario)
    else:
        g = args.g if args.g is not None else -(-scenario.new.n // 10)
        recovered, status = flexible_recovery(scenario, g, Limits(time_s=args.time_limit))
    optimal, basis = _reference_makespan(scenario, args)
    boundary = Fraction(args.f) if args.f is not None else None
    check = verify_guarantee(scenario, recovered, optimal, boundary)
    obj = {
        "recovered": jsonio.schedule_to_obj(recovered),
        "ratio": jsonio.frac_str(check.ratio) if check.ratio is not None else None,
        "bound": jsonio.frac_str(check.bound),
        "holds": check.holds,
        "k": check.characterization.k,
        "delta": check.characterization.delta,
        "f": jsonio.frac_str(check.characterization.boundary),
        "makespan": makespan(recovered),
        "optimal_makespan": optimal,
        "optimal_basis": basis,
        "strategy": args.strategy,
        "status": status,
        "degenerate": check.degenerate,
    }
    text = jsonio.dump_json(obj, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK if status == "optimal" else EXIT_TIMEOUT


def cmd_pool(args) -> int:
    instance = jsonio.load_instance(args.instance)
    entries, exhausted = collect_solution_pool(instance, args.count, _limits(args))
    if len(entries) < args.count and exhausted:
        print(
            f"warning: only {len(entries)} distinct optimal-makespan schedules exist "
            f"(requested {args.count})",
            file=sys.stderr,
        )
    obj = {
        "instance": args.instance,
        "optimal_makespan": entries[0].vector[0] if entries[0].vector else 0,
        "count": len(entries),
        "exhausted": exhausted,
        "schedules": [
            {
                "assignment": dict(e.schedule.assignment),
                "vector": list(e.vector),
                "weight": weighted_value(e.vector),
            }
            for e in entries
        ],
    }
    text = jsonio.dump_json(obj, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_profile(args) -> int:
    paths = sorted(p for pattern in args.reports for p in glob.glob(pattern))
    if not paths:
        raise ValidationError("no report files matched")
    records = []
    for path in paths:
        obj = jsonio._load_json(path)
        solver = obj.get("method", "unknown")
        instance = obj.get("instance")
        if instance is None:
            raise ValidationError(f"{path}: report lacks an instance id; re-run solve with --out")
        if args.metric == "time":
            value = Fraction(max(int(obj.get("elapsed_ms", 0)), 1))
        else:
            value = Fraction(max(weighted_value(list(obj["vector"])), 1))
        records.append((solver, instance, value))
    points = performance_profile(records)
    write_text(args.out, profile_csv(points))
    return EXIT_OK


def _scatter_one(task) -> list[tuple[str, int, str, int, int]]:
    path, pool_size, seed, dn, dm, strategies, g, time_limit = task
    instance = jsonio.load_instance(path)
    limits = Limits(time_s=time_limit)
    entries, _ = collect_solution_pool(instance, pool_size, limits)
    perturbations = gen_perturbations(instance, PerturbSpec(seed=seed, d_n=dn, d_m=dm))
    rows = []
    for idx, entry in enumerate(entries):
        scenario = apply_perturbations(instance, entry.schedule, perturbations)
        weight = weighted_value(completion_vector(entry.schedule))
        for strategy in strategies:
            if strategy == "binding":
                recovered = binding_recovery(scenario)
            else:
                budget = g if g is not None else -(-scenario.new.n // 10)
                recovered, _ = flexible_recovery(scenario, budget, limits)
            rows.append((path, idx, strategy, weight, makespan(recovered)))
    return rows


def cmd_scatter(args) -> int:
    paths = sorted(p for pattern in args.instances for p in glob.glob(pattern))
    if not paths:
        raise ValidationError("no instance files matched")
    strategies = tuple(s.strip() for s in args.strategies.split(","))
    for s in strategies:
        if s not in ("binding", "flexible"):
            raise ValidationError(f"unknown strategy {s!r}")
    tasks = [
        (path, args.pool_size, args.perturb_seed, args.dn, args.dm, strategies, args.g, args.time_limit)
        for path in paths
    ]
    workers = _workers()
    if workers > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_instance = list(pool.map(_scatter_one, tasks))
    else:
        per_instance = [_scatter_one(t) for t in tasks]
    rows = [row for chunk in per_instance for row in chunk]
    if not rows:
        print("warning: empty pool, nothing to emit", file=sys.stderr)
        return EXIT_OK
    write_text(args.out, scatter_csv(normalize_scatter(rows)))
    return EXIT_OK


def cmd_fixture(args) -> int:
    params = {}
    for name in ("m", "k", "p", "f", "F"):
        value = getattr(args, name if name != "F" else "big_f")
        if value is not None:
            params[name] = value
    fixture = gen_fixture(args.family, **params)
    jsonio.dump_json(jsonio.scenario_to_obj(fixture.scenario), args.out)
    print(
        f"{args.family}: recovered={fixture.recovered_makespan} "
        f"optimal={fixture.optimal_makespan} ratio={fixture.ratio}",
        file=sys.stderr,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lexsched")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark instance (or scenario with --dn/--dm)")
    p.add_argument("--kind", choices=("wellformed", "degenerate"), default="wellformed")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, help="processing time seed (wellformed only)")
    p.add_argument("--dist", choices=DISTRIBUTIONS, default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dn", type=int, help="job disturbances; together with --dm emits a scenario")
    p.add_argument("--dm", type=int, help="machine disturbances")
    p.add_argument("--perturb-seed", type=int)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve an instance with one LexOpt method")
    p.add_argument("instance")
    p.add_argument("--method", choices=METHODS, default="bnb")
    p.add_argument("--base", type=int, default=2, help="weighting big-M base")
    p.add_argument("--pool-capacity", type=int, default=2000)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--node-limit", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("recover", help="recover a perturbed scenario")
    p.add_argument("scenario")
    p.add_argument("--strategy", choices=("binding", "flexible"), default="binding")
    p.add_argument("--g", type=int, help="flexible migration budget (default ceil(0.1 n))")
    p.add_argument("--f", help="stability boundary as p/q (default: tightest)")
    p.add_argument("--optimal", type=int, help="known optimal makespan of the new instance")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("pool", help="collect diverse minimum-makespan schedules")
    p.add_argument("instance")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--node-limit", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("profile", help="performance-profile CSV from solve reports")
    p.add_argument("reports", nargs="+", help="report files or globs")
    p.add_argument("--metric", choices=("time", "weight"), default="time")
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("scatter", help="recovery-quality scatter CSV over instances")
    p.add_argument("instances", nargs="+", help="instance files or globs")
    p.add_argument("--pool-size", type=int, default=50)
    p.add_argument("--perturb-seed", type=int, default=0)
    p.add_argument("--dn", type=int)
    p.add_argument("--dm", type=int)
    p.add_argument("--strategies", default="binding,flexible")
    p.add_argument("--g", type=int)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("fixture", help="emit a proof-derived adversarial scenario")
    p.add_argument("--family", choices=FIXTURE_FAMILIES, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--f", type=int)
    p.add_argument("--F", dest="big_f", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fixture)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, SizeLimitError, InfeasibleError, LexSchedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
