"""Drive every CLI subcommand into one output directory and print the summary.

Produces a complete, manifest-backed experiment bundle for a single (N, beta):
stationary samples, an ensemble run, a coupling decay fit, the refinement
ladder, the ball-family weight scan, mass-scaling slopes, the boundary
classification table and the residual battery, then the collected report.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from simplexbessel.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, help="output directory for all artifacts")
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--beta", type=float, default=6.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--paths", type=int, default=2000)
    args = ap.parse_args()

    model = {"n": args.n, "beta": args.beta}
    plans = [
        ("sample", {"model": model, "run": {"seed": args.seed, "paths": args.paths}}),
        ("simulate", {"model": model, "integrator": {"dt": 1e-3},
                      "run": {"seed": args.seed, "t_end": 1.0, "paths": args.paths}}),
        ("couple", {"model": model, "integrator": {"dt": 1e-3, "min_gap": 0.0447},
                    "run": {"seed": args.seed, "t_end": 2.0, "paths": args.paths,
                            "record_stride": 20}}),
        ("fvtest", {"model": model, "integrator": {"dt": 1e-3},
                    "run": {"seed": args.seed, "t_end": 0.25, "paths": min(args.paths, 500)}}),
        ("a2", {"model": model, "run": {"seed": args.seed, "paths": 200}}),
        ("scaling", {"model": model, "run": {"seed": args.seed, "paths": 100_000}}),
        ("wiener", {"model": model, "run": {"seed": args.seed}}),
        ("ibp", {"model": model, "run": {"seed": args.seed, "paths": 200_000}}),
        ("report", {}),
    ]

    with tempfile.TemporaryDirectory() as tmp:
        for command, doc in plans:
            cfg = Path(tmp) / f"{command}.json"
            cfg.write_text(json.dumps(doc), encoding="utf-8")
            print(f"== {command}", file=sys.stderr)
            code = cli_main([command, "--config", str(cfg), "--out", args.out,
                             "--workers", str(args.workers)])
            if code != 0:
                print(f"{command} failed with exit code {code}", file=sys.stderr)
                return code

    print((Path(args.out) / "summary.csv").read_text(), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
