"""Command-line harness.

Subcommands:
    mc-bench   low-rank matrix completion, elastic averaging vs leader
    sinc-demo  2-D sinc landscape, 4 workers, both methods
    run        execute an experiment spec file
    verify     run the bound-checking suite

Exit codes: 0 success, 1 check failure, 2 usage error, 3 runtime error.
"""

import argparse
import hashlib
import sys

import numpy as np

from . import theory
from .cluster import (
    ClusterConfig,
    center_variable,
    format_float,
    run,
    run_synchronous,
    trace_to_csv,
)
from .errors import LeadoptError
from .objectives import matrix_completion_problem, sinc2d
from .rng import Rng
from .specfile import ExperimentSpec
from .steps import StepParams

MC_BENCH_HEADER = "rank,trial,method,step,best_f"
SINC_HEADER = "method,iteration,worker,x,y,f_value"

# Batch-experiment hyperparameters: eta = 5e-4, lambda = 1/5, 8
# workers, communication period 1.
MC_ETA = 5e-4
MC_LAMBDA = 0.2
MC_WORKERS = 8

# sinc demo: 4 workers, eta = 0.1, leader pull lambda = 0.1, elastic
# beta = 0.43 (converted per-step: alpha = beta / p).
SINC_INITS = [(-6.0, -4.0), (-15.0, -18.0), (20.0, 11.0), (17.0, 8.0)]
SINC_ETA = 0.1
SINC_LGD_LAMBDA = 0.1
SINC_EAGD_BETA = 0.43


def _mc_config(method, steps, seed):
    return ClusterConfig(
        n=1, l=MC_WORKERS, method=method,
        step=StepParams(eta=MC_ETA, lam=MC_LAMBDA),
        tau=1, seed=seed, max_total_steps=steps,
    )


def cmd_mc_bench(args):
    ranks = [int(r) for r in str(args.ranks).split(",")]
    d = args.d
    if d < max(ranks):
        raise LeadoptError(f"d={d} must be at least the largest rank {max(ranks)}")

    csv_path = f"{args.out}_curves.csv"
    final = {}
    with open(csv_path, "w") as fh:
        fh.write(MC_BENCH_HEADER + "\n")
        for rank in ranks:
            for trial in range(args.trials):
                prng = Rng(args.seed, (rank, trial))
                obj = matrix_completion_problem(d, rank, prng.child(0))
                init = [prng.child(1 + i).standard_normal(obj.dim)
                        for i in range(MC_WORKERS)]
                digest = hashlib.sha256(b"".join(x.tobytes() for x in init)).hexdigest()
                print(f"rank={rank} trial={trial} init_sha256={digest[:16]}")
                for method in ("eagd", "lgd"):
                    cfg = _mc_config(method, args.steps, args.seed)
                    result = run_synchronous(cfg, obj, init, max_rounds=args.steps)
                    for step, best in enumerate(result.best_values, start=1):
                        fh.write(f"{rank},{trial},{method},{step},{format_float(best)}\n")
                    final[(rank, trial, method)] = float(result.best_values[-1])

    print(f"wrote {csv_path}")
    print("rank,trial,eagd_final_best_f,lgd_final_best_f")
    for rank in ranks:
        for trial in range(args.trials):
            print(f"{rank},{trial},{format_float(final[(rank, trial, 'eagd')])},"
                  f"{format_float(final[(rank, trial, 'lgd')])}")
    return 0


def cmd_sinc_demo(args):
    obj = sinc2d()
    init = [np.array(p) for p in SINC_INITS]
    csv_path = f"{args.out}_trajectory.csv"
    summary = {}
    with open(csv_path, "w") as fh:
        fh.write(SINC_HEADER + "\n")
        for method, step in (
            ("lgd", StepParams(eta=SINC_ETA, lam=SINC_LGD_LAMBDA)),
            ("eagd", StepParams(eta=SINC_ETA, beta=SINC_EAGD_BETA)),
        ):
            cfg = ClusterConfig(n=1, l=4, method=method, step=step, tau=1,
                                seed=0, max_total_steps=args.iterations)
            result = run_synchronous(cfg, obj, init, max_rounds=args.iterations,
                                     tol=1e-10, record_positions=True,
                                     pull_times_eta=False)
            for it, positions in enumerate(result.positions, start=1):
                for w, pos in enumerate(positions):
                    fh.write(f"{method},{it},{w},{format_float(pos[0])},"
                             f"{format_float(pos[1])},"
                             f"{format_float(obj.value(pos))}\n")
            grads = [float(np.linalg.norm(obj.gradient(x)))
                     for x in result.state.params]
            summary[method] = (float(result.best_values[-1]), result.rounds,
                               result.converged, max(grads))

    print(f"wrote {csv_path}")
    print("method,final_best_f,iterations,converged,max_grad_norm")
    for method, (best, rounds, converged, gmax) in summary.items():
        print(f"{method},{format_float(best)},{rounds},{converged},{format_float(gmax)}")
    return 0


def cmd_run(args):
    with open(args.spec) as fh:
        spec = ExperimentSpec.from_text(fh.read())
    obj = spec.build_objective()
    init = spec.initial_points(obj)
    state, events = run(spec.config, obj, init)

    trace_path = f"{spec.out_prefix}_trace.csv"
    trace_to_csv(events, trace_path)
    with open(f"{spec.out_prefix}_spec.json", "w") as fh:
        fh.write(spec.to_json())

    center = center_variable(state)
    worker_values = [obj.value(x) for x in state.params]
    pulls = sum(1 for e in events if e.kind in ("local_pull", "global_pull"))
    switches = sum(1 for e in events if e.kind == "leader_switch")
    print(f"wrote {trace_path}")
    print("final_center_f,final_best_worker_f,pull_events,leader_switches")
    print(f"{format_float(obj.value(center))},{format_float(min(worker_values))},"
          f"{pulls},{switches}")
    return 0


def cmd_verify(args):
    reports = theory.run_checks(filter_pattern=args.filter, seed=args.seed)
    print(theory.CSV_HEADER)
    failed = False
    for report in reports:
        print(report.csv_row())
        if report.applicable and not report.passed:
            failed = True
    return 1 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="leadopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    mc = sub.add_parser("mc-bench", help="matrix completion benchmark")
    mc.add_argument("--d", type=int, default=100)
    mc.add_argument("--ranks", default="1,10")
    mc.add_argument("--trials", type=int, default=10)
    mc.add_argument("--steps", type=int, default=20000)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--out", default="mc_bench")
    mc.add_argument("--full", action="store_true",
                    help="full-scale protocol: d=1000, ranks 1,10,50,100")
    mc.set_defaults(func=cmd_mc_bench)

    sinc = sub.add_parser("sinc-demo", help="2-D sinc landscape demo")
    sinc.add_argument("--iterations", type=int, default=50000)
    sinc.add_argument("--out", default="sinc_demo")
    sinc.set_defaults(func=cmd_sinc_demo)

    runp = sub.add_parser("run", help="execute an experiment spec")
    runp.add_argument("--spec", required=True)
    runp.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="run the bound-checking suite")
    ver.add_argument("--filter", default=None)
    ver.add_argument("--seed", type=int, default=2026)
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "full", False):
        args.d = 1000
        args.ranks = "1,10,50,100"
    try:
        return args.func(args)
    except LeadoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
