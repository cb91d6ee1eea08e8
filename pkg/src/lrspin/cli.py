"""Command-line front end.

Exit codes: 0 ok, 1 oracle mismatch, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
import tempfile

from . import experiments as ex
from .chain import MAX_ORACLE_SITES, compare_with_oracle
from .errors import LRSpinError, ValidationError
from .transfer import DEFAULT_COARSE_STEPS, ideal_transfer_time

log = logging.getLogger("lrspin")

ORACLE_TOL = 1e-10
NULL = "null"

TRACE_COLUMNS = ("t", "f_abs", "f_sq", "fidelity")
SWEEP_COLUMNS = ("n", "variant", "fid_max", "t_meas", "t_id", "t_est", "ratio", "delta12", "f_m", "gamma1_sq", "gamma2_sq")
_VARIANT_NAMES = {"complete": ex.COMPLETE, "dh": ex.DOUBLE_HOLE, "custom": ex.CUSTOM}


def fmt(x) -> str:
    if x is None:
        return NULL
    if isinstance(x, (int, str)):
        return str(x)
    return format(float(x), ".17g")


def parse_int_list(text: str) -> list:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def parse_range(text: str) -> list:
    """``start:stop:step`` (stop included when reached by the step) or ``a,b,c``."""
    if ":" not in text:
        return parse_int_list(text)
    parts = text.split(":")
    try:
        start, stop, step = (int(p) for p in parts) if len(parts) == 3 else (int(parts[0]), int(parts[1]), 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if len(parts) not in (2, 3) or step < 1 or stop < start:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:stop:step with step >= 1")
    return list(range(start, stop + 1, step))


def write_output(path: str, text: str):
    """Write ``text`` to ``path`` atomically (temp file + rename); ``-`` means stdout."""
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".lrspin-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _spec_from_args(args):
    variant = _VARIANT_NAMES[args.variant]
    if args.holes and variant != ex.CUSTOM:
        raise ValidationError("holes", f"--holes conflicts with --variant {args.variant}; use --variant custom")
    return ex.make_spec(args.n, args.nu, variant, args.holes or ())


def cmd_trace(args) -> int:
    spec = _spec_from_args(args)
    t_max = args.window_factor * ideal_transfer_time(spec.distance, spec.nu)
    tr = ex.run_fidelity_trace(spec, t_max, args.samples)
    rows = zip(tr.times, tr.f_abs, tr.f_abs**2, tr.fidelity)
    write_output(args.output, to_csv(TRACE_COLUMNS, rows))
    log.info("trace: N=%d nu=%g max fidelity %.6f", spec.n_sites, spec.nu, float(tr.fidelity.max()))
    return 0


def _sweep_cells(r: ex.SweepRow) -> list:
    if r.error is not None:
        return [r.n, r.variant, f"ERROR:{r.error}"] + [""] * (len(SWEEP_COLUMNS) - 3)
    vals = [r.fidelity_max, r.t_measured, r.t_ideal, r.t_estimate, r.ratio, r.delta12, r.f_m, r.gamma1_sq, r.gamma2_sq]
    return [r.n, r.variant] + [None if isinstance(v, float) and math.isnan(v) else v for v in vals]


def cmd_sweep(args) -> int:
    if args.variant == "both":
        variants = (ex.COMPLETE, ex.DOUBLE_HOLE)
    else:
        variants = (_VARIANT_NAMES[args.variant],)
    if args.holes and variants != (ex.CUSTOM,):
        raise ValidationError("holes", f"--holes conflicts with --variant {args.variant}; use --variant custom")
    req = ex.SweepRequest(
        n_values=tuple(args.n),
        nu=args.nu,
        variants=variants,
        holes=tuple(args.holes or ()),
        window_factor=args.window_factor,
        coarse_steps=args.coarse_steps,
    )
    res = ex.run_sweep(req, max_workers=args.workers)
    write_output(args.output, to_csv(SWEEP_COLUMNS, (_sweep_cells(r) for r in res.rows)))
    failed = sum(r.error is not None for r in res.rows)
    log.info("sweep: %d rows, %d failed", len(res.rows), failed)
    return 0


def cmd_eigvec(args) -> int:
    spec = _spec_from_args(args)
    table = ex.dump_eigenvector_components(spec, args.j)
    header = ["site"] + [f"lambda_{j}" for j in args.j]
    rows = ([row["site"]] + [row[j] for j in args.j] for row in table)
    write_output(args.output, to_csv(header, rows))
    return 0


def cmd_onsite(args) -> int:
    spec = _spec_from_args(args)
    diag = ex.dump_onsite_energies(spec, shifted=args.shifted)
    write_output(args.output, to_csv(["site", "h_ii"], sorted(diag.items())))
    return 0


def cmd_oracle_check(args) -> int:
    if args.n > MAX_ORACLE_SITES:
        raise ValidationError("n", f"oracle check limited to n <= {MAX_ORACLE_SITES} (2^n states); got {args.n}")
    spec = _spec_from_args(args)
    dev, shift, where = compare_with_oracle(spec)
    ok = dev <= ORACLE_TOL
    if not args.quiet:
        status = "PASS" if ok else "FAIL"
        print(f"{status} n={spec.n_sites} nu={spec.nu:g} holes={sorted(spec.holes)} "
              f"max_dev={dev:.3e} shift={shift:.6g} tol={ORACLE_TOL:g}")
        if not ok:
            print(f"worst entry at sites {where[0]},{where[1]}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lrspin", description="State transfer in long-range interacting spin chains.")
    sub = p.add_subparsers(dest="command", required=True)

    def chain_flags(sp, n_type=int, variants=("complete", "dh", "custom")):
        sp.add_argument("--n", type=n_type, required=True, help="number of sites N")
        sp.add_argument("--nu", type=float, default=3.0, help="coupling exponent (default 3, dipolar)")
        sp.add_argument("--variant", choices=variants, default="complete",
                        help="complete chain, dh (sites 2 and N-1 removed) or custom --holes")
        sp.add_argument("--holes", type=parse_int_list, default=None,
                        help="hole sites for --variant custom, e.g. 2,3,-3,-2 (negative counts from the end)")
        sp.add_argument("--output", "-o", default="-", help="output file, '-' for stdout (default)")
        sp.add_argument("--quiet", "-q", action="store_true", help="suppress log messages")

    sp = sub.add_parser("trace", help="fidelity versus time")
    chain_flags(sp)
    sp.add_argument("--window-factor", type=float, default=ex.DEFAULT_WINDOW_FACTOR,
                    help="trace length in units of the ideal transfer time")
    sp.add_argument("--samples", type=int, default=4001, help="number of time samples")
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("sweep", help="max fidelity and transfer times over chain sizes")
    chain_flags(sp, n_type=parse_range, variants=("complete", "dh", "custom", "both"))
    sp.set_defaults(variant="both")
    sp.add_argument("--window-factor", type=float, default=ex.DEFAULT_WINDOW_FACTOR,
                    help="peak search window [0, factor * t_ideal]")
    sp.add_argument("--coarse-steps", type=int, default=DEFAULT_COARSE_STEPS, help="coarse scan intervals")
    sp.add_argument("--samples", type=int, dest="coarse_steps", help="alias of --coarse-steps")
    sp.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    sp.set_defaults(func=cmd_sweep)
    sp.description = "N accepts start:stop:step (stop included when the step lands on it) or a comma list."

    sp = sub.add_parser("eigvec", help="eigenvector components per site")
    chain_flags(sp)
    sp.add_argument("--j", type=parse_int_list, default=[1, 2], help="1-based eigenvector indices (default 1,2)")
    sp.set_defaults(func=cmd_eigvec)

    sp = sub.add_parser("onsite", help="diagonal Hamiltonian elements per site")
    chain_flags(sp)
    sp.add_argument("--shifted", action="store_true", help="move the minimum to zero")
    sp.set_defaults(func=cmd_onsite)

    sp = sub.add_parser("oracle-check", help="compare the direct builder with the 2^N construction")
    chain_flags(sp)
    sp.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except LRSpinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
