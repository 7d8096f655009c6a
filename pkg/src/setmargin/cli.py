"""Command-line entry points.

    setmargin bench  --dataset synthetic:r=3 --dist uniform --users 20 \
                     --k 2 --T 100 --seed 0 --out results/
    setmargin serve  --host 127.0.0.1 --port 8000 --session-dir sessions/
    setmargin replay sessions/<id>.jsonl
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bench, solver
from .loop import LoopConfig
from .users import DISTRIBUTION_KINDS, UtilityDistribution


def _bench(args) -> int:
    dist = UtilityDistribution(args.dist)
    loop = LoopConfig(k=args.k, T=args.T, cv_every=args.cv_every)
    cfg = bench.ExperimentConfig(
        dataset=args.dataset,
        distribution=dist,
        seeds=bench.seeds_for(args.seed, args.users),
        k=args.k,
        T=args.T,
        loop=loop,
        solver=solver.SolverConfig(time_limit=args.time_limit),
        timing=args.timing,
        workers=args.workers,
    )
    result = bench.run_experiment(cfg)
    failures = [r for r in result.user_results if r.error]
    for r in failures:
        print(f"user {r.user} failed: {r.error}", file=sys.stderr)
    if args.out:
        paths = bench.write_outputs(result, args.out)
        for name, path in paths.items():
            print(f"{name}: {path}")
    else:
        sys.stdout.write(bench.summary_csv(result))
    finals = [r.final_loss for r in result.user_results if not r.error]
    if finals:
        import numpy as np
        print(f"median final utility loss over {len(finals)} users: "
              f"{float(np.median(finals)):.6g}", file=sys.stderr)
    return 1 if failures else 0


def _serve(args) -> int:
    import uvicorn

    from .service import SessionService, create_app

    service = SessionService(
        session_dir=args.session_dir,
        solver_cfg=solver.SolverConfig(time_limit=args.time_limit),
        loop_defaults=LoopConfig(T=20, cv_every=args.cv_every),
    )
    app = create_app(service)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _replay(args) -> int:
    from .service import replay_preferences

    prefs = replay_preferences(args.log)
    out = {
        "entries": [
            {"kind": p.kind,
             "better": [int(b) for b in p.better.bits],
             "worse": [int(b) for b in p.worse.bits]}
            for p in prefs
        ]
    }
    json.dump(out, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setmargin")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run a seeded multi-user experiment")
    b.add_argument("--dataset", default="synthetic:r=3",
                   help="'synthetic:r=N' or 'pc'")
    b.add_argument("--dist", default="uniform", choices=DISTRIBUTION_KINDS)
    b.add_argument("--users", type=int, default=20)
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--T", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default=None, help="output directory for CSVs")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--cv-every", type=int, default=5)
    b.add_argument("--time-limit", type=float, default=600.0,
                   help="per-solve time limit in seconds")
    b.add_argument("--timing", choices=(bench.TIMING_WALL, bench.TIMING_NONE),
                   default=bench.TIMING_WALL,
                   help="'none' zeroes the cumulative_seconds column for "
                        "byte-reproducible output")
    b.set_defaults(func=_bench)

    s = sub.add_parser("serve", help="run the live elicitation HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--session-dir", default="sessions")
    s.add_argument("--time-limit", type=float, default=60.0)
    s.add_argument("--cv-every", type=int, default=1_000_000,
                   help="iterations between hyperparameter re-selection "
                        "(default: effectively never for live sessions)")
    s.set_defaults(func=_serve)

    r = sub.add_parser("replay", help="print the preferences recorded in a session log")
    r.add_argument("log")
    r.set_defaults(func=_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
