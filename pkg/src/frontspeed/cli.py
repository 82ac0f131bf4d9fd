"""Command line interface.

    frontspeed theory   --dist negexp:1 --N 100,10000
    frontspeed simulate --dist uniform01 --N 256 --steps 20000
    frontspeed sweep    --dist uniform01 --N 64,256 --replicas 8
    frontspeed ppp      --alpha 2 --K 64 --samples 100000
    frontspeed mbrw     --alpha 1 --K 8 --M 4,16,64 --steps 20000
    frontspeed mbrw-fit --input results/mbrw_a1_K8.csv
    frontspeed plot     --input results/sweep_uniform01.csv
    frontspeed bench    --N 256,1024

Global flags: --seed, --out, --threads, --config.  A JSON config file supplies
defaults; explicit command line flags override its fields.  Exit codes:
0 success, 2 configuration error, 4 insufficient data, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .errors import ConfigError, InsufficientDataError, NumericError


def _int_list(text: str):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frontspeed",
        description="branching-selection front speed: theory, simulation, analysis",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default 1)")
    common.add_argument("--out", default=None, help="output directory (default results)")
    common.add_argument("--threads", type=int, default=None, help="kernel threads")
    common.add_argument("--config", default=None, help="JSON config file")

    sub = parser.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("theory", parents=[common], help="deterministic predictions")
    p.add_argument("--dist", default=None, help="uniform01|negexp:l|rweibull:a|polymax:a")
    p.add_argument("--N", type=_int_list, default=None, dest="n_list")

    for name in ("simulate", "sweep"):
        p = sub.add_parser(name, parents=[common], help=f"{name} the N-particle front")
        p.add_argument("--dist", default=None)
        p.add_argument("--N", type=_int_list, default=None, dest="n_list")
        p.add_argument("--steps", type=int, default=None, help="post-burn-in steps")
        p.add_argument("--burnin", type=int, default=None)
        p.add_argument("--batches", type=int, default=None)
        p.add_argument("--stepper", choices=("naive", "pruned"), default=None)
        p.add_argument("--init", choices=("zero", "uniform"), default=None)
        if name == "sweep":
            p.add_argument("--replicas", type=int, default=None)

    p = sub.add_parser("ppp", parents=[common], help="Poisson process diagnostics")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--K", type=int, default=None, dest="k")
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("mbrw", parents=[common], help="M-BRW speed estimates")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--K", type=int, default=None, dest="k")
    p.add_argument("--M", type=_int_list, default=None, dest="m_list")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--burnin", type=int, default=None)
    p.add_argument("--batches", type=int, default=None)
    p.add_argument("--prelimit", type=int, default=None,
                   help="offspring = K largest of N rescaled noise draws")

    p = sub.add_parser("mbrw-fit", parents=[common], help="fit the (ln M)^-2 correction")
    p.add_argument("--input", default=None, help="mbrw CSV")

    p = sub.add_parser("plot", parents=[common], help="SVG convergence plot")
    p.add_argument("--input", default=None, help="sweep CSV")

    p = sub.add_parser("bench", parents=[common], help="kernel benchmark")
    p.add_argument("--dist", default=None)
    p.add_argument("--N", type=_int_list, default=None, dest="n_list")
    p.add_argument("--steps", type=int, default=None)

    return parser


def resolve_config(args: argparse.Namespace) -> harness.ExperimentConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {args.config!r}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    data["kind"] = args.kind
    for key, value in vars(args).items():
        if key in ("kind", "config") or value is None:
            continue
        data[key] = value
    return harness.config_from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        for path in harness.run(cfg):
            print(path)
        return 0
    except ConfigError as exc:
        _diag("config_error", exc, 2)
        return 2
    except InsufficientDataError as exc:
        _diag("insufficient_data", exc, 4)
        return 4
    except NumericError as exc:
        _diag("numeric_error", exc, 3)
        return 3


def _diag(kind: str, exc: Exception, code: int) -> None:
    print(json.dumps({"error": kind, "message": str(exc), "exit": code}),
          file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
