"""Command-line entry points: run experiments, generate data, inspect results.

Exit codes: 0 for a completed run, 2 when the dynamics halted early
(the error is printed as JSON on stdout), 1 for usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .dataset import DatasetError, save_csv
from .experiment import ConfigError, ExperimentConfig, inspect_dir, run_experiment
from .stumps import EmptyHypothesisSpaceError
from .synthetic import GENERATORS, make


def _cmd_run(args) -> int:
    config = ExperimentConfig.from_json_file(args.config)
    result = run_experiment(config)
    if result.exit_code != 0:
        halt = result.halt
        print(
            json.dumps(
                {
                    "error": halt.kind,
                    "at_round": halt.at_round,
                    "row": halt.row,
                    "output_dir": result.output_dir,
                },
                sort_keys=True,
            )
        )
    else:
        print(f"completed {result.summary['rounds_completed']} rounds -> {result.output_dir}")
    return result.exit_code


def _cmd_synth(args) -> int:
    params = {}
    for name in ("m", "d", "seed", "separation", "scale", "jitter"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    ds = make(args.kind, **params)
    save_csv(ds, args.out)
    print(f"wrote {ds.m} examples with {ds.d} features to {args.out}")
    return 0


def _cmd_inspect(args) -> int:
    print(inspect_dir(args.dir))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boostdyn",
        description="Boosting-dynamics experiments: run, synth, inspect.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config", help="path to the experiment config JSON")
    p_run.set_defaults(func=_cmd_run)

    p_synth = sub.add_parser("synth", help="write a synthetic dataset CSV")
    p_synth.add_argument("kind", choices=sorted(GENERATORS))
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.add_argument("--m", type=int, default=None, help="number of examples")
    p_synth.add_argument("--d", type=int, default=None, help="number of features")
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--separation", type=float, default=None)
    p_synth.add_argument("--scale", type=float, default=None)
    p_synth.add_argument("--jitter", type=float, default=None)
    p_synth.set_defaults(func=_cmd_synth)

    p_inspect = sub.add_parser("inspect", help="summarize a run directory")
    p_inspect.add_argument("dir", help="artifact directory of a finished run")
    p_inspect.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DatasetError, EmptyHypothesisSpaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
