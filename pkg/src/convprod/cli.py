"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 input error,
3 failed hypothesis (the violated condition is named on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dyadic import block_samples, k_block, shell_amplitude_constant, shell_increment_constant
from .errors import ConfigError, ConvProdError, PreconditionFailed
from .formats import (
    format_measure_tsv,
    format_rows_csv,
    format_spectrum_csv,
    read_json,
    read_measure,
    read_sequence,
)
from .harness import ExperimentConfig, counterexample_explorer, run_experiment
from .measures import convolve_all, family_from_spec
from .seqnorms import (
    BlockSpec,
    block_variation,
    oscillation_norm,
    variation_norm,
    variation_norm_bruteforce,
)
from .spectral import TorusGrid, char_fun, gaussian_decay


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p):
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="convprod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("convolve", help="convolve measure files")
    p.add_argument("inputs", nargs="+", help="measure TSV files")
    _common(p)

    p = sub.add_parser("norms", help="variation / oscillation norms of a sequence CSV")
    p.add_argument("input")
    p.add_argument("--rho", type=float, default=2.0)
    p.add_argument("--blocks", help='"4^k" or comma-separated breakpoints')
    p.add_argument("--s", type=float, help="oscillation exponent (needs --blocks)")
    p.add_argument("--oracle", action="store_true", help="cross-check with brute force")
    _common(p)

    p = sub.add_parser("spectrum", help="characteristic function and decay certificate")
    p.add_argument("input")
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--certificate", help="write the decay certificate JSON here")
    _common(p)

    p = sub.add_parser("decompose", help="dyadic block kernels and their empirical constants")
    p.add_argument("--family", required=True, help="family JSON (file or literal)")
    p.add_argument("--k", type=int, nargs="+", required=True)
    p.add_argument("--j-range", default="-4:4", help="inclusive range lo:hi")
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--full-sweep", action="store_true", help="use every n in the block")
    _common(p)

    p = sub.add_parser("verify", help="run an empirical inequality check")
    p.add_argument("--experiment", required=True,
                   help="theorem17 | theorem133 | theorem141 | shell")
    p.add_argument("--config", help="experiment config JSON (file or literal)")
    p.add_argument("--M", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--s", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--csv", help="also write the per-trial CSV here")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--threads", type=int)

    p = sub.add_parser("explore-counterexample", help="holding-family diagnostics")
    p.add_argument("--a", default=None, help="a-sequence spec as JSON (default 1-(n+1)^-2)")
    p.add_argument("--n-max", type=int, default=64)
    p.add_argument("--grid", type=int, default=1024)
    _common(p)
    return parser


def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj, args) -> str:
    if not getattr(args, "no_timestamp", False):
        obj["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_convolve(args):
    mu = convolve_all([read_measure(p) for p in args.inputs])
    _emit(format_measure_tsv(mu), args.output)
    if args.output:
        sys.stdout.write(_dump({"seed": args.seed, "offset": mu.offset, "width": mu.width,
                                "mass": mu.mass}, args))


def cmd_norms(args):
    xs = read_sequence(args.input)
    out = {"seed": args.seed, "n": int(xs.size), "rho": args.rho,
           "variation": variation_norm(xs, args.rho).to_dict()}
    if args.oracle:
        oracle = variation_norm_bruteforce(xs, args.rho)
        out["oracle"] = oracle.to_dict()
        out["oracle_agrees"] = abs(oracle.value - out["variation"]["value"]) <= 1e-10
    if args.blocks:
        blocks = BlockSpec.parse(args.blocks, n=xs.size)
        out["breakpoints"] = list(blocks.breakpoints)
        out["blocks"] = [r.to_dict() for r in block_variation(xs, blocks, args.rho)]
        if args.s is not None:
            out["oscillation"] = oscillation_norm(xs, blocks, args.s).to_dict()
    elif args.s is not None:
        raise ConfigError("--s (oscillation) needs --blocks")
    if args.format == "csv":
        rows = [("variation", args.rho, out["variation"]["value"])]
        rows += [("block", args.rho, b["value"]) for b in out.get("blocks", [])]
        _emit(format_rows_csv(["kind", "exponent", "value"], rows), args.output)
    else:
        _emit(_dump(out, args), args.output)
    if args.oracle and not out["oracle_agrees"]:
        return 3
    return 0


def cmd_spectrum(args):
    mu = read_measure(args.input)
    grid = TorusGrid(args.grid)
    samples = char_fun(mu, grid)
    cert = gaussian_decay(mu, grid)
    _emit(format_spectrum_csv(samples), args.output)
    info = {"seed": args.seed, "certificate": cert.to_dict()}
    text = _dump(info, args)
    if args.certificate:
        Path(args.certificate).write_text(text)
    elif args.output:
        sys.stdout.write(text)


def _j_range(text):
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"--j-range must look like lo:hi, got {text!r}") from None
    return range(lo, hi + 1)


def cmd_decompose(args):
    fam = family_from_spec(read_json(args.family))
    grid = TorusGrid(args.grid)
    rows, amplitude = [], []
    for k in args.k:
        ns = block_samples(k, args.full_sweep, args.seed)
        for j in _j_range(args.j_range):
            amplitude.append({"j": j, "k": k, "constant":
                              shell_amplitude_constant(fam, j, k, grid, samples=ns)})
            for n in ns:
                sup = float(np.max(k_block(fam, j, k, n, grid).hatK_jn.abs))
                inc = shell_increment_constant(fam, j, k, n, grid) if n + 1 < 4**k else None
                rows.append((j, k, n, sup, None if inc is None else inc.value,
                             None if inc is None else inc.degenerate))
    if args.format == "csv":
        text = format_rows_csv(["j", "k", "n", "sup_abs_K_jn", "increment_constant",
                                "degenerate"], [tuple("" if v is None else v for v in r)
                                                for r in rows])
        _emit(text, args.output)
        return 0
    out = {"seed": args.seed, "family": fam.descriptor, "grid": args.grid,
           "full_sweep": args.full_sweep, "amplitude_constants": amplitude,
           "rows": [dict(zip(["j", "k", "n", "sup_abs_K_jn", "increment_constant",
                              "degenerate"], r)) for r in rows], "sampling": "grid"}
    _emit(_dump(out, args), args.output)
    return 0


def cmd_verify(args):
    base = read_json(args.config) if args.config else {}
    if not isinstance(base, dict):
        raise ConfigError("experiment config must be a JSON object")
    for key, attr in (("M", "M"), ("k_max", "k_max"), ("s", "s"), ("trials", "trials"),
                      ("seed", "seed"), ("grid", "grid"), ("threads", "threads")):
        v = getattr(args, attr)
        if v is not None:
            base[key] = v
    cfg = ExperimentConfig.from_dict(base)
    report = run_experiment(args.experiment, cfg)
    rows = report.csv_rows()
    csv_text = format_rows_csv(["curve", "k_max", "trial", "ratio"], rows)
    if args.csv:
        Path(args.csv).write_text(csv_text)
    if args.format == "csv":
        _emit(csv_text, args.output)
    else:
        _emit(report.to_json(timestamp=not args.no_timestamp) + "\n", args.output)
    return 0


def cmd_explore(args):
    spec = json.loads(args.a) if args.a else None
    rep = counterexample_explorer(spec, args.n_max, args.grid)
    rep["seed"] = args.seed
    if args.format == "csv":
        keys = [k for k in rep["rows"][0] if k != "coset_concentration"]
        _emit(format_rows_csv(keys, [tuple(r[k] for k in keys) for r in rep["rows"]]),
              args.output)
    else:
        _emit(_dump(rep, args), args.output)
    failed = [k for k, ok in rep["checks"].items() if not ok]
    if failed:
        print(f"diagnostic check failed: {', '.join(failed)}", file=sys.stderr)
        return 3
    return 0


COMMANDS = {
    "convolve": cmd_convolve,
    "norms": cmd_norms,
    "spectrum": cmd_spectrum,
    "decompose": cmd_decompose,
    "verify": cmd_verify,
    "explore-counterexample": cmd_explore,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args) or 0
    except PreconditionFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ConvProdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
