"""Command-line interface: trace, quench, sweep, audit, validate.

Exit codes: 0 success, 1 validation/physics failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import dynamics, model, oracle, output, suites
from .errors import DomainError, FitError, GaplessPointError, XYQuenchError
from .model import ChainSpec, PhaseConvention, QuenchSchedule

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

COMMANDS = ("trace", "quench", "sweep", "audit", "validate")
_BOOL_FLAGS = {"cross-check", "split"}
ROUNDING_RULE = "nearest integer, halves rounded up: floor(kink_count + 0.5)"


class UsageError(Exception):
    pass


# -- argument parsing -----------------------------------------------------------

_PI_EXPR = re.compile(r"^\s*([0-9]*\.?[0-9]*)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$")


def parse_angle(text: str) -> float:
    """Float, or a multiple of pi such as ``pi/3`` or ``2pi/5``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_EXPR.match(text.lower())
    if not m:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}")
    num = float(m.group(1)) if m.group(1) else 1.0
    den = float(m.group(2)) if m.group(2) else 1.0
    return num * math.pi / den


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="flat key=value file; flags override it")

    p = argparse.ArgumentParser(prog="xyquench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("trace", parents=[common], help="mode phase against time")
    tr.add_argument("--alpha", type=float, default=0.2)
    tr.add_argument("--k", type=parse_angle, default=None, help="momentum, e.g. 1.047 or pi/3")
    tr.add_argument("--k-index", type=int, default=None, help="1-based index into the grid of --n")
    tr.add_argument("--n", type=int, default=None)
    tr.add_argument("--tau-q", type=float, nargs="+", default=[1.0])
    tr.add_argument("--t-min", type=float, default=-3.0)
    tr.add_argument("--t-max", type=float, default=0.0)
    tr.add_argument("--samples", type=int, default=301)
    tr.add_argument("--split", action="store_true", help="one file per tau_q")
    tr.add_argument("--out", required=True)

    qu = sub.add_parser("quench", parents=[common], help="kink count and final phase")
    qu.add_argument("--n", type=int, default=101)
    qu.add_argument("--alpha", type=float, default=1.0)
    qu.add_argument("--tau-q", type=float, default=50.0)
    qu.add_argument("--method", choices=[m.value for m in dynamics.Method], default="analytic")
    qu.add_argument("--convention", choices=[c.value for c in PhaseConvention], default="raw")
    qu.add_argument("--cross-check", action="store_true")
    qu.add_argument("--out", default=None)

    sw = sub.add_parser("sweep", parents=[common], help="tau_q sweep and power-law fit")
    sw.add_argument("--n", type=int, default=401)
    sw.add_argument("--alpha", type=float, default=1.0)
    sw.add_argument("--tau-q", type=float, nargs="+", default=None, help="explicit samples")
    sw.add_argument("--tau-min", type=float, default=10.0)
    sw.add_argument("--tau-max", type=float, default=1000.0)
    sw.add_argument("--samples", type=int, default=9, help="log-spaced samples")
    sw.add_argument("--method", choices=[m.value for m in dynamics.Method], default="analytic")
    sw.add_argument("--out", required=True, help="CSV path")
    sw.add_argument("--summary", default=None, help="JSON fit summary (default: --out with .json)")

    au = sub.add_parser("audit", parents=[common], help="brute-force sums vs printed closed forms")
    au.add_argument("--n", type=int, nargs="+", default=[5])
    au.add_argument("--defects", type=int, nargs="+", default=[0, 1])
    au.add_argument("--out", default=None)

    va = sub.add_parser("validate", parents=[common], help="run an invariant suite")
    va.add_argument("--suite", choices=["oracle", "lz", "sums", "all"], default="all")
    va.add_argument("--steps", type=int, default=1024, help="loop steps for the oracle suite")
    va.add_argument("--hamiltonian", choices=[c.value for c in oracle.HamiltonianConvention],
                    default="analytic")
    va.add_argument("--tau-q", type=float, nargs="+", default=[20.0, 50.0, 100.0])
    va.add_argument("--n", type=int, default=101, help="chain size for the lz suite")
    va.add_argument("--max-n", type=int, default=1001, help="largest N for the sums suite")
    va.add_argument("--json", default=None, help="write machine-readable results here")
    return p


def _config_tokens(path: str) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    tokens: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key == "config":
            raise UsageError(f"{path}:{lineno}: nested config files are not supported")
        if key in _BOOL_FLAGS:
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(f"--{key}")
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"{path}:{lineno}: {key} expects a boolean")
            continue
        tokens.append(f"--{key}")
        tokens.extend(v for v in re.split(r"[\s,]+", value) if v)
    return tokens


def _merge_config(argv: list[str]) -> list[str]:
    """Insert config-file tokens right after the subcommand so flags win."""
    cfg = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            cfg = argv[i + 1]
        elif tok.startswith("--config="):
            cfg = tok.split("=", 1)[1]
    if cfg is None:
        return argv
    pos = next((i for i, tok in enumerate(argv) if tok in COMMANDS), None)
    if pos is None:
        return argv
    return argv[: pos + 1] + _config_tokens(cfg) + argv[pos + 1 :]


# -- commands ---------------------------------------------------------------------


def _resolve_k(args) -> float:
    if args.k is not None and args.k_index is not None:
        raise UsageError("give either --k or --k-index, not both")
    if args.k_index is not None:
        if args.n is None:
            raise UsageError("--k-index needs --n")
        grid = model.momentum_grid(ChainSpec(args.n, args.alpha))
        if not (1 <= args.k_index <= len(grid)):
            raise UsageError(f"--k-index must lie in [1, {len(grid)}]")
        return grid.momenta[args.k_index - 1]
    return math.pi / 3 if args.k is None else args.k


def trace_rows(
    k: float, alpha: float, tau_q: float, t_min: float, t_max: float, samples: int
) -> list[tuple[float, float, float, float]]:
    sched = QuenchSchedule(tau_q)
    rows = []
    for i in range(samples):
        t = t_max if i == samples - 1 else t_min + i * (t_max - t_min) / (samples - 1)
        B = model.field_at(t, sched)
        raw = model.mode_phase(k, B, alpha)
        rows.append((t, B, raw, model.wrap_phase(raw)))
    return rows


def _split_path(out: Path, tau_q: float) -> Path:
    return out.with_name(f"{out.stem}_tau{output.fmt(tau_q)}{out.suffix}")


def cmd_trace(args) -> int:
    if not (0.0 <= args.alpha <= 1.0):
        raise UsageError("--alpha must lie in [0, 1]")
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    if not (args.t_min < args.t_max):
        raise UsageError("--t-min must be below --t-max")
    if args.t_max > 0.0:
        raise UsageError("--t-max must be <= 0 (the quench stops at t = 0)")
    if any(not (t > 0) for t in args.tau_q):
        raise UsageError("--tau-q values must be positive")
    k = _resolve_k(args)
    out = Path(args.out)
    per_tau = [
        (tq, trace_rows(k, args.alpha, tq, args.t_min, args.t_max, args.samples))
        for tq in args.tau_q
    ]
    if args.split:
        for tq, rows in per_tau:
            output.write_atomic(_split_path(out, tq), output.csv_text(output.TRACE_COLUMNS, rows))
    elif len(per_tau) == 1:
        output.write_atomic(out, output.csv_text(output.TRACE_COLUMNS, per_tau[0][1]))
    else:
        rows = [(tq,) + r for tq, rs in per_tau for r in rs]
        output.write_atomic(out, output.csv_text(output.TRACE_LONG_COLUMNS, rows))
    return EXIT_OK


def quench_report(
    N: int, alpha: float, tau_q: float, method: str, convention: str, cross_check: bool
) -> dict:
    spec = ChainSpec(N, alpha)
    sched = QuenchSchedule(tau_q)
    method = dynamics.Method(method)
    rep = dynamics.kink_count(spec, sched, method)
    thr = model.adiabatic_threshold(N)
    adiabatic = model.is_adiabatic(N, tau_q)

    final: dict = {"rounding": ROUNDING_RULE}
    if adiabatic:
        final["formula"] = "one_pair"
        final["defect_pairs"] = 1
        final["report"] = dynamics.final_phase_one_pair(spec, convention).to_dict()
    else:
        d = min(int(math.floor(rep.kink_count + 0.5)), spec.M)
        final["formula"] = "defects"
        final["defect_pairs"] = d
        if d == 0:
            # nothing excluded: the full B = 0 sum, valid for any alpha
            final["report"] = model.total_phase(spec, 0.0, convention).to_dict()
        elif alpha == 1.0:
            final["report"] = dynamics.final_phase_with_defects(spec, d, convention).to_dict()
        else:
            final["report"] = None
            final["note"] = "defect formula is defined for alpha = 1 only"

    payload = {
        "command": "quench",
        "params": {"N": N, "alpha": alpha, "method": method.value, "tau_q": tau_q},
        "defect_report": rep.to_dict(),
        "adiabatic_threshold": thr,
        "adiabatic_margin": model.ADIABATIC_MARGIN,
        "adiabatic": adiabatic,
        "final_phase": final,
    }
    if cross_check:
        other = (
            dynamics.Method.NUMERIC_ODE
            if method is dynamics.Method.ANALYTIC_LZ
            else dynamics.Method.ANALYTIC_LZ
        )
        rep2 = dynamics.kink_count(spec, sched, other)
        an, nu = (rep, rep2) if method is dynamics.Method.ANALYTIC_LZ else (rep2, rep)
        rel = abs(nu.kink_count - an.kink_count) / an.kink_count if an.kink_count > 0 else None
        payload["cross_check"] = {
            "analytic": {"density": an.density, "kink_count": an.kink_count},
            "numeric": {"density": nu.density, "kink_count": nu.kink_count},
            "relative_difference": rel,
        }
    return payload


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        output.write_atomic(out, text)


def cmd_quench(args) -> int:
    _check_chain(args.n, args.alpha)
    if not (args.tau_q > 0):
        raise UsageError("--tau-q must be positive")
    payload = quench_report(
        args.n, args.alpha, args.tau_q, args.method, args.convention, args.cross_check
    )
    _emit(output.json_text(payload), args.out)
    return EXIT_OK


def sweep_samples(args) -> list[float]:
    if args.tau_q:
        return list(args.tau_q)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    if not (0 < args.tau_min <= args.tau_max):
        raise UsageError("need 0 < --tau-min <= --tau-max")
    if args.samples == 1:
        return [args.tau_min]
    return [float(x) for x in np.logspace(np.log10(args.tau_min), np.log10(args.tau_max), args.samples)]


def run_sweep(
    spec: ChainSpec,
    taus: Sequence[float],
    method: str = "analytic",
    density_fn: Callable[[float], float] | None = None,
) -> tuple[list[tuple[float, float, float]], dynamics.ScalingFit]:
    """Sweep rows ``(tau_q, kink_count, density)`` plus the fit.

    ``density_fn`` replaces the physics with a given density law (test hook).
    """
    if density_fn is None:
        dynamics.check_scaling_samples(spec, taus)
        rows = []
        for tq in taus:
            rep = dynamics.kink_count(spec, QuenchSchedule(tq), dynamics.Method(method))
            rows.append((tq, rep.kink_count, rep.density))
    else:
        if len(taus) < dynamics.MIN_FIT_SAMPLES:
            raise FitError(f"insufficient samples: need >= {dynamics.MIN_FIT_SAMPLES}")
        rows = [(tq, density_fn(tq) * spec.N, density_fn(tq)) for tq in taus]
    fit = dynamics.fit_power_law([r[0] for r in rows], [r[2] for r in rows])
    return rows, fit


def cmd_sweep(args, density_fn: Callable[[float], float] | None = None) -> int:
    _check_chain(args.n, args.alpha)
    taus = sweep_samples(args)
    spec = ChainSpec(args.n, args.alpha)
    rows, fit = run_sweep(spec, taus, args.method, density_fn)
    out = Path(args.out)
    summary = Path(args.summary) if args.summary else out.with_suffix(".json")
    output.write_atomic(out, output.csv_text(output.SWEEP_COLUMNS, rows))
    payload = {
        "command": "sweep",
        "params": {"N": args.n, "alpha": args.alpha, "method": args.method,
                   "tau_q": [r[0] for r in rows]},
        "exponent": fit.exponent,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "expected_exponent": -0.5,
    }
    output.write_atomic(summary, output.json_text(payload))
    return EXIT_OK


def cmd_audit(args) -> int:
    records = []
    for N in args.n:
        _check_chain(N, 1.0)
        for D in args.defects:
            if not (0 <= D <= (N - 1) // 2):
                raise UsageError(f"--defects {D} out of range for N={N}")
            records.append(dynamics.audit_closed_forms(N, D).to_dict())
    payload = {
        "command": "audit",
        "note": "printed closed forms evaluated as written; brute_force is the reference",
        "records": records,
    }
    _emit(output.json_text(payload), args.out)
    return EXIT_OK


def _paint(status: str) -> str:
    if os.environ.get("NO_COLOR") is not None or not sys.stdout.isatty():
        return status.upper()
    colors = {suites.PASS: "32", suites.FAIL: "31", suites.SKIP: "33",
              suites.UNTESTABLE: "33", suites.INFO: "36"}
    return f"\033[{colors.get(status, '0')}m{status.upper()}\033[0m"


def render_table(checks: Sequence[suites.Check]) -> str:
    name_w = max([len(c.name) for c in checks] + [5])
    lines = [f"{'suite':<7} {'check':<{name_w}} {'status':<10} detail"]
    for c in checks:
        status = _paint(c.status)
        pad = 10 + len(status) - len(c.status)
        lines.append(f"{c.suite:<7} {c.name:<{name_w}} {status:<{pad}} {c.detail}")
    return "\n".join(lines) + "\n"


def cmd_validate(args) -> int:
    if args.steps < 16 or args.steps % 2:
        raise UsageError("--steps must be even and >= 16")
    if any(not (t > 0) for t in args.tau_q):
        raise UsageError("--tau-q values must be positive")
    _check_chain(args.n, 1.0)
    if args.max_n < 3:
        raise UsageError("--max-n must be >= 3")
    checks = suites.run(
        args.suite,
        oracle={"steps": args.steps, "convention": oracle.HamiltonianConvention(args.hamiltonian)},
        lz={"tau_q": args.tau_q, "N": args.n},
        sums={"max_n": args.max_n},
    )
    sys.stdout.write(render_table(checks))
    failed = suites.any_failed(checks)
    if args.json:
        payload = {
            "command": "validate",
            "suite": args.suite,
            "passed": not failed,
            "checks": [c.to_dict() for c in checks],
        }
        output.write_atomic(args.json, output.json_text(payload))
    return EXIT_FAIL if failed else EXIT_OK


def _check_chain(N: int, alpha: float) -> None:
    try:
        ChainSpec(N, alpha)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


_DISPATCH = {
    "trace": cmd_trace,
    "quench": cmd_quench,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
    "validate": cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _merge_config(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"xyquench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return _DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"xyquench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"xyquench {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GaplessPointError as exc:
        print(f"xyquench {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except FitError as exc:
        print(f"xyquench {args.command}: fit failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except DomainError as exc:
        print(f"xyquench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except XYQuenchError as exc:
        print(f"xyquench {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
