"""Command-line front end: ``capacity``, ``verify``, ``simulate`` and ``trace``.

Every option can also come from a ``key=value`` file given with ``--config``;
flags on the command line win.  Exit codes: 0 success / PASS, 1 FAIL,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Sequence

from .analysis import (
    NetworkConfig,
    achievable_rate_with_header,
    capacity_p2p,
    capacity_upper,
    code_dimensions,
    if_rate,
    loss_upper_bound,
    mdf_rate,
)
from .diagonal import RateZeroError, parse_block_code
from .field import FieldError, FieldParams
from .sim import (
    CSV_HEADER,
    SCHEMES,
    SimReport,
    SimulationError,
    make_scheme,
    run_chain,
    run_monte_carlo,
    verify_exhaustive,
    verify_sliding,
)
from .trace import render_trace

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# option name -> converter, for the key=value config file
_FILE_KEYS = {
    "L": int,
    "T": int,
    "N": str,
    "budgets": str,
    "alpha": str,
    "field_bits": int,
    "scheme": str,
    "frames": int,
    "seed": int,
    "horizon": int,
    "output": str,
    "samples": int,
    "mdf_code": str,
    "if_code": str,
}


class UsageError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in str(text).replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in str(text).replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def read_config_file(path: str) -> dict:
    values: dict = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, val = (x.strip() for x in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _FILE_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            if key == "budgets":
                key = "N"
            try:
                values[key] = _FILE_KEYS[key](val)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {val!r}") from None
    return values


def _merge(args: argparse.Namespace) -> argparse.Namespace:
    """Fill options the user did not pass from the config file, then defaults."""
    file_vals = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, val in file_vals.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    defaults = {"seed": 0, "field_bits": 8, "frames": 10**6, "samples": 10_000, "scheme": None}
    for key, val in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    return args


def build_config(args: argparse.Namespace) -> NetworkConfig:
    if args.L is None or args.T is None or args.N is None:
        raise UsageError("-L, -T and -N are required (as flags or in --config)")
    budgets = _int_list(args.N)
    try:
        return NetworkConfig(args.L, args.T, budgets, FieldParams(args.field_bits))
    except (ValueError, FieldError) as exc:
        raise UsageError(str(exc)) from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; command-line flags win")
    p.add_argument("-L", type=int, help="number of relays")
    p.add_argument("-T", type=int, help="end-to-end delay in slots")
    p.add_argument("-N", help="per-link erasure budgets, comma separated (L+1 values)")
    p.add_argument("--field-bits", dest="field_bits", type=int, help="symbols live in GF(2^m), default 8")
    p.add_argument("--seed", type=int, help="random seed (default 0)")


def _add_code_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mdf-code", dest="mdf_code", help="per-hop n,k,T code for message-wise DF")
    p.add_argument("--if-code", dest="if_code", help="n,k,T code for instantaneous forwarding")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamrelay",
        description="Streaming codes over a chain of erasure relays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="rates and code dimensions for a configuration")
    _add_common(p)

    p = sub.add_parser("verify", help="check delay-T recovery over all budgeted erasure patterns")
    _add_common(p)
    p.add_argument("--horizon", type=int, help="slots per pattern (default T+k+sum(N)+2)")
    p.add_argument("--sliding", action="store_true", help="sample sliding-window admissible patterns instead")
    p.add_argument("--samples", type=int, help="sliding-window samples (default 10000)")
    p.add_argument("--scheme", choices=SCHEMES, help="scheme to verify (default sdf)")
    _add_code_overrides(p)

    p = sub.add_parser("simulate", help="Monte Carlo frame loss under i.i.d. erasures (CSV)")
    _add_common(p)
    p.add_argument("--alpha", help="erasure probabilities to sweep, comma separated")
    p.add_argument("--per-link", dest="per_link", action="store_true",
                   help="treat --alpha as one probability per link instead of a sweep")
    p.add_argument("--scheme", help="comma separated subset of sdf,mdf,if (default all)")
    p.add_argument("--frames", type=int, help="frames per point (default 1e6)")
    p.add_argument("--bound-only", dest="bound_only", action="store_true",
                   help="print the analytical SDF bound without simulating")
    _add_code_overrides(p)
    p.add_argument("-o", "--output", help="write CSV here instead of stdout")

    p = sub.add_parser("trace", help="print per-node transmission tables for a scenario")
    _add_common(p)
    p.add_argument("--erase", action="append", default=[], metavar="LINK:SLOT",
                   help="erase a packet, e.g. 1:i or 2:i+2 (repeatable)")
    p.add_argument("--scheme", choices=SCHEMES, help="scheme to trace (default sdf)")
    p.add_argument("--from", dest="first", type=int, default=-1, help="first column, relative to i")
    p.add_argument("--to", dest="last", type=int, default=4, help="last column, relative to i")
    return parser


def cmd_capacity(args, out=None) -> int:
    out = out or sys.stdout
    config = build_config(args)
    T, budgets = config.T, config.budgets
    lines = [f"L={config.L} T={T} N={','.join(map(str, budgets))} field=GF(2^{config.field.m})"]
    for j, n in enumerate(budgets, 1):
        lines.append(f"point-to-point capacity, link {j} (T={T}, N={n}): {capacity_p2p(T, n)}")
    lines.append(f"chain capacity upper bound: {capacity_upper(T, budgets)}")
    try:
        dims = code_dimensions(config)
    except RateZeroError:
        dims = None
    if dims is None:
        lines.append("symbol-wise DF: rate 0 (T < sum N)")
    else:
        codes = ", ".join(f"({n},{dims.k},{d})" for n, d in zip(dims.n, dims.link_delays))
        lines.append(f"symbol-wise DF codes (n,k,T_j): {codes}; n_max={dims.n_max}")
        try:
            rate = achievable_rate_with_header(T, budgets, config.field.m)
            lines.append(f"symbol-wise DF rate with headers: {rate} (~{float(rate):.4f})")
        except ValueError as exc:
            lines.append(f"symbol-wise DF rate with headers: unavailable ({exc})")
    rate, split = mdf_rate(T, budgets)
    lines.append(f"message-wise DF rate: {rate} split {','.join(map(str, split))}")
    lines.append(f"instantaneous forwarding rate: {if_rate(T, budgets)}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


def _format_counterexample(report: SimReport) -> str:
    lines = ["counterexample (1 = erased):"]
    for p in report.counterexample:
        lines.append(f"  link {p.link}: {p}")
    replay = report.details.get("replay")
    if replay is not None:
        lines.append(f"  lost frames: {replay.details['lost_frames']}")
    return "\n".join(lines)


def cmd_verify(args, out=None) -> int:
    out = out or sys.stdout
    config = build_config(args)
    args.scheme = args.scheme or "sdf"
    (scheme,) = _schemes(args, config)
    if args.sliding:
        report = verify_sliding(config, args.horizon, args.samples, args.seed, scheme=scheme)
        what = f"{report.combinations} sliding-window samples ({report.excluded} excluded)"
    else:
        report = verify_exhaustive(config, args.horizon, scheme=scheme, seed=args.seed)
        what = f"{report.combinations} pattern combinations"
    verdict = "PASS" if report.passed else "FAIL"
    out.write(f"{verdict}: {scheme.label} L={config.L} T={config.T} "
              f"N={','.join(map(str, config.budgets))}, {what}\n")
    if not report.passed:
        out.write(_format_counterexample(report) + "\n")
        if report.counterexample is not None:
            trace = run_chain(config, scheme, report.counterexample, seed=args.seed, record=True)
            out.write(_dump_slots(trace) + "\n")
        return EXIT_FAIL
    return EXIT_OK


def _dump_slots(report: SimReport) -> str:
    chain = report.details["chain"]
    rows = report.details["trace"]
    names = ["r0"]
    for j in range(1, report.config.links):
        names += [f"y r{j}", f"r{j}"]
    names.append(f"y r{report.config.links}")
    lines = [" | ".join(["t"] + names)]
    for offset, row in enumerate(rows):
        t = chain.start + offset
        cells = [str(t)] + ["x" if p is None else " ".join(f"{s.header}:{s.value}" for s in p.symbols) for p in row]
        lines.append(" | ".join(cells))
    return "\n".join(lines)


def _schemes(args, config: NetworkConfig):
    names = [s.strip().lower() for s in (args.scheme or "sdf,mdf,if").split(",") if s.strip()]
    for n in names:
        if n not in SCHEMES:
            raise UsageError(f"unknown scheme {n!r}; choose from {', '.join(SCHEMES)}")
    try:
        mdf_code = parse_block_code(args.mdf_code) if args.mdf_code else None
        if_code = parse_block_code(args.if_code) if args.if_code else None
    except ValueError as exc:
        raise UsageError(f"bad code triple: {exc}") from None
    return [make_scheme(n, config, mdf_code=mdf_code, if_code=if_code) for n in names]


def cmd_simulate(args, out=None) -> int:
    out = out or sys.stdout
    config = build_config(args)
    alphas = _float_list(args.alpha) if args.alpha is not None else (0.01,)
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise UsageError("erasure probabilities must lie in [0, 1]")
    if args.per_link:
        if len(alphas) not in (1, config.links):
            raise UsageError(f"--per-link needs 1 or {config.links} probabilities")
        points = [alphas]
    else:
        points = [(a,) for a in alphas]
    if args.frames < 1:
        raise UsageError("--frames must be >= 1")
    rows = []
    if args.bound_only:
        for point in points:
            bound = loss_upper_bound(point, config.T, config.budgets)
            rep = SimReport("sdf", config, 0, 0, bound=bound, seed=args.seed,
                            alpha=tuple(point) * (config.links if len(point) == 1 else 1))
            row = rep.csv_row()
            row[7] = ""  # nothing simulated, so no ratio
            rows.append(row)
    else:
        schemes = _schemes(args, config)
        for point in points:
            for scheme in schemes:
                rep = run_monte_carlo(config, scheme, point, args.frames, seed=args.seed)
                rows.append(rep.csv_row())
    fh = open(args.output, "w", newline="", encoding="utf-8") if args.output else out
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
    finally:
        if args.output:
            fh.close()
    return EXIT_OK


def cmd_trace(args, out=None) -> int:
    out = out or sys.stdout
    config = build_config(args)
    try:
        result = render_trace(config, args.erase, scheme=args.scheme or "sdf",
                              first=args.first, last=args.last, seed=args.seed)
    except ValueError as exc:
        if isinstance(exc, (RateZeroError, SimulationError)):
            raise
        raise UsageError(str(exc)) from None
    out.write(result.text)
    return EXIT_OK


COMMANDS = {
    "capacity": cmd_capacity,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "trace": cmd_trace,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        _merge(args)
        return COMMANDS[args.command](args)
    except (UsageError, RateZeroError, SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
