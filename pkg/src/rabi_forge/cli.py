"""Command-line entry point: ``rabi-forge run ...``."""
from __future__ import annotations

import argparse
import sys

from .errors import EngineError, NumericError, ParameterError, ResourceError, StructuralError
from .experiments import METHODS, PRESETS, RunConfig, hamiltonian_text, preset, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_ENGINE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rabi-forge",
                                     description="Rabi-oscillation simulations with Trotter, ISL and VQS.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a preset or a JSON config")
    src = run.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--config", help="JSON file with RunConfig fields")
    run.add_argument("--method", choices=METHODS + ("all",))
    run.add_argument("--dt", type=float)
    run.add_argument("--t-max", type=float, dest="t_max")
    run.add_argument("--shots", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--exact", action="store_true", help="exact expectation values (overrides --shots)")
    run.add_argument("--out")
    run.add_argument("--dump-hamiltonian", action="store_true")
    run.add_argument("--dump-ansatz", action="store_true", help="write the per-step ISL blocks")
    run.add_argument("--param-history", action="store_true", help="write the VQS parameter history")
    run.add_argument("--plot", action="store_true")
    run.add_argument("--paper-literal-entropy", action="store_true")
    run.add_argument("--flip-tcm-sign", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        cfg = RunConfig.from_json(args.config)
    else:
        cfg = preset(args.preset or "jcm-fig2")
    changes = {k: getattr(args, k) for k in ("method", "dt", "t_max", "shots", "seed", "out")
               if getattr(args, k) is not None}
    if args.exact:
        changes["shots"] = None
    for flag in ("plot", "paper_literal_entropy", "flip_tcm_sign", "dump_ansatz", "param_history"):
        if getattr(args, flag):
            changes[flag] = True
    return cfg.replace(**changes)


def _report(result) -> None:
    for key, value in result.extras.items():
        if key == "table1":
            for method, c in value.items():
                print(f"{method:8s} c = {c:,}")
        elif key == "period_averaged_errors":
            for method, errs in value.items():
                print(f"{method:8s} " + "  ".join(f"{c}={v:.4g}" for c, v in errs.items()))
        else:
            for row in value:
                print("  ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    for path in result.files:
        print(f"wrote {path}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.dump_hamiltonian:
            print(hamiltonian_text(cfg))
        result = run_experiment(cfg)
    except (ParameterError, StructuralError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EngineError, NumericError, ResourceError) as exc:
        print(f"engine failure: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    _report(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
