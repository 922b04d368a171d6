"""Command-line front end: ``gp-spectrum {kernel,spectrum,verify}``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(some points or modes failed, or some experiment did not pass).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, kernel
from .asymptotics import predict
from .charfunc import solve_range
from .errors import DomainError, SpectrumError
from .kernel import KernelParams, SectorSpec
from .verify import EXPERIMENTS, STANDARD_PARAMS, run_experiments

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
WHICH = ("K", "Kprime", "h", "asymptotic")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) != 2:
            raise ValueError
        z = complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise argparse.ArgumentTypeError(f"non-finite point {text!r}")
    return z


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return value


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _jsonable(obj):
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, complex):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _render(fmt: str, config: dict, rows: list, extra: dict | None = None) -> str:
    if fmt == "json":
        payload = {"config": config, "results": rows, "version": __version__}
        if extra:
            payload.update(extra)
        return json.dumps(_jsonable(payload), indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\r\n")
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gp_spectrum_", suffix=".tmp")
    umask = os.umask(0)
    os.umask(umask)
    os.chmod(tmp, 0o666 & ~umask)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _params(args) -> KernelParams:
    return KernelParams(args.alpha, args.beta)


def cmd_kernel_eval(args) -> int:
    params = _params(args)
    which = args.which or ["K"]
    rows, failed = [], 0
    for name in which:
        for z in args.z:
            try:
                if name == "K":
                    ev = kernel.eval_K(params, z, args.kernel_tol)
                elif name == "Kprime":
                    ev = kernel.eval_Kprime(params, z, args.kernel_tol)
                elif name == "h":
                    ev = kernel.eval_h(params, z, args.kernel_tol, args.delta)
                else:
                    ev = kernel.KernelEval(kernel.asymptotic_K(params, z, args.delta), math.nan, 0)
            except SpectrumError as exc:
                failed += 1
                logging.error("%s at %r failed: %s", name, z, exc)
                continue
            rows.append({
                "which": name, "z_re": z.real, "z_im": z.imag,
                "K_re": ev.value.real, "K_im": ev.value.imag,
                "err_bound": ev.error_bound, "terms": ev.terms_used,
            })
    config = {"alpha": params.alpha, "beta": params.beta, "kernel_tol": args.kernel_tol,
              "delta": args.delta, "which": which, "z": [[z.real, z.imag] for z in args.z]}
    _emit(_render(args.format, config, rows), args.out)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_spectrum(args) -> int:
    params = _params(args)
    if not 1 <= args.n_min <= args.n_max:
        raise DomainError("requires 1 <= n_min <= n_max")
    primary = "as_stated" if args.variant == "both" else args.variant
    result = solve_range(params, args.n_min, args.n_max, args.tol_fp, args.tol_residual,
                         variant=primary)
    rows = []
    for p in result.points:
        row = {
            "n": p.n, "z_re": p.z.real, "z_im": p.z.imag, "residual": p.residual,
            "iters": p.iterations, "pred_re": p.prediction.real, "pred_im": p.prediction.imag,
            "deviation": p.deviation,
        }
        if args.variant == "both":
            half = predict(params, p.n, "half").predicted_z
            row.update({"pred_half_re": half.real, "pred_half_im": half.imag,
                        "deviation_half": abs(p.z - half)})
        rows.append(row)
    config = {"alpha": params.alpha, "beta": params.beta, "n_min": args.n_min,
              "n_max": args.n_max, "tol_fp": args.tol_fp, "tol_residual": args.tol_residual,
              "variant": args.variant}
    extra = {"failures": {str(k): v for k, v in result.failures.items()}}
    _emit(_render(args.format, config, rows, extra if args.format == "json" else None), args.out)
    for n, msg in result.failures.items():
        logging.error("mode %d: %s", n, msg)
    return EXIT_NUMERIC if result.failures else EXIT_OK


def cmd_verify(args) -> int:
    if (args.alpha is None) != (args.beta is None):
        raise DomainError("give both --alpha and --beta, or neither for the standard quartet")
    pairs = STANDARD_PARAMS if args.alpha is None else ((args.alpha, args.beta),)
    params_list = [KernelParams(a, b) for a, b in pairs]
    experiments = args.experiment or list(EXPERIMENTS)
    sector = SectorSpec(args.delta)
    rows = run_experiments(
        params_list, experiments, sector, seed=args.seed, samples=args.samples,
        n_min=args.n_min, n_max=args.n_max, variant=args.variant, tol_fp=args.tol_fp,
        tol_residual=args.tol_residual, kernel_tol=args.kernel_tol, cap=args.cap,
    )
    config = {
        "params": [[p.alpha, p.beta] for p in params_list], "experiments": experiments,
        "delta": args.delta, "seed": args.seed, "samples": args.samples,
        "n_min": args.n_min, "n_max": args.n_max, "variant": args.variant,
        "tol_fp": args.tol_fp, "tol_residual": args.tol_residual,
        "kernel_tol": args.kernel_tol, "cap": args.cap,
    }
    if args.format == "csv":
        text = _render("csv", config, [
            {k: row[k] for k in ("experiment", "alpha", "beta", "passed")} for row in rows
        ])
    else:
        text = _render("json", config, rows)
    _emit(text, args.out)
    for row in rows:
        logging.info("%s alpha=%s beta=%s: %s", row["experiment"], row["alpha"], row["beta"],
                     "pass" if row["passed"] else "FAIL")
    return EXIT_OK if all(row["passed"] for row in rows) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gp-spectrum", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, params_required=True):
        p.add_argument("-v", "--verbose", action="count", default=0)
        p.add_argument("--alpha", type=float, required=params_required, default=None)
        p.add_argument("--beta", type=float, required=params_required, default=None)
        p.add_argument("--tol-fp", type=_positive, default=1e-12)
        p.add_argument("--tol-residual", type=_positive, default=1e-10)
        p.add_argument("--kernel-tol", type=_positive, default=kernel.DEFAULT_TOL)
        p.add_argument("--delta", type=_positive, default=kernel.DEFAULT_DELTA)
        p.add_argument("--variant", choices=("as_stated", "half", "both"), default="both")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("kernel", help="evaluate K, K', h or the asymptotic form")
    common(p)
    p.add_argument("--z", type=_complex_arg, action="append", required=True, metavar="RE,IM")
    p.add_argument("--which", choices=WHICH, action="append")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_kernel_eval)

    p = sub.add_parser("spectrum", help="solve the modes n_min..n_max")
    common(p)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run the verification experiments")
    common(p, params_required=False)
    p.add_argument("--experiment", choices=EXPERIMENTS, action="append")
    p.add_argument("--n-min", type=int, default=20)
    p.add_argument("--n-max", type=int, default=500)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--cap", type=_positive, default=10.0)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"gp-spectrum: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpectrumError as exc:
        print(f"gp-spectrum: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
