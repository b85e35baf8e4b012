"""``fisher-solve`` command line interface.

Exit codes: 0 success, 1 invalid input or failed verification, 2 a solver
or reference run did not converge.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

from .bench import ExperimentConfig, emit_report, instance_seed, run_experiment
from .errors import DidNotConverge, MarketError
from .hoffman import hoffman_brute
from .io import load_candidate, load_instance, load_matrix, parse_key_values, read_text, save_instance
from .market import BudgetMode, Distribution, GenerationSpec, UtilityClass, generate_instance, validate_instance
from .metrics import verify_equilibrium

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NO_CONVERGENCE = 2


def _cmd_gen(args) -> int:
    kv = parse_key_values(read_text(args.spec))
    cfg = ExperimentConfig.from_text("\n".join(
        f"{k}={v}" for k, v in kv.items() if k in {"utility", "distribution", "budget_mode", "sizes", "repeats", "seed"}
    ) + "\nprice_thresholds=1e-2\n")
    written = 0
    for k, (n, m) in enumerate(cfg.sizes):
        for rep in range(cfg.repeats):
            seed = instance_seed(cfg.seed, k, rep)
            spec = GenerationSpec(cfg.distribution, n, m, cfg.budget_mode, seed, cfg.utility)
            inst = generate_instance(spec)
            name = f"{cfg.utility.value}_{cfg.distribution.value}_{n}x{m}_r{rep}.txt"
            save_instance(os.path.join(args.out, name), inst, sparse=args.sparse,
                          comments=[f"seed={seed}", f"distribution={cfg.distribution.value}",
                                    f"budget_mode={cfg.budget_mode.label()}"])
            written += 1
    print(f"wrote {written} instance(s) to {args.out}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    out = args.out or cfg.output_dir
    if out is None:
        raise MarketError("no output directory: pass --out or set out= in the config")
    summary = run_experiment(cfg, out)
    for path in emit_report(summary, out):
        print(path)
    return EXIT_OK


def _cmd_verify(args) -> int:
    inst = validate_instance(load_instance(args.instance))
    cand = load_candidate(args.candidate)
    report = verify_equilibrium(cand, inst, args.tol)
    print(f"max_clearance_violation={report.max_clearance_violation!r}")
    print(f"max_budget_violation={report.max_budget_violation!r}")
    print(f"max_dual_feasibility_violation={report.max_dual_feasibility_violation!r}")
    print(f"max_complementary_slackness={report.max_complementary_slackness!r}")
    print(f"passed={str(report.passed).lower()}")
    return EXIT_OK if report.passed else EXIT_INVALID


def _cmd_hoffman(args) -> int:
    result = hoffman_brute(load_matrix(args.matrix))
    print(f"H={result.value!r}")
    print("witness=" + " ".join(str(i) for i in result.witness))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fisher-solve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate random instances from a spec file")
    p.add_argument("--spec", required=True, help="key=value file: utility, distribution, sizes, ...")
    p.add_argument("--out", required=True, help="directory for instance files")
    p.add_argument("--sparse", action="store_true", help="write triplet bodies instead of dense rows")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("run", help="run a benchmark experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides out= in the config)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("verify", help="check an equilibrium candidate")
    p.add_argument("--instance", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("hoffman", help="brute-force Hoffman constant of a small matrix")
    p.add_argument("--matrix", required=True, help="whitespace-separated rows")
    p.set_defaults(func=_cmd_hoffman)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DidNotConverge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (MarketError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
