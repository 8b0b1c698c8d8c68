"""Command-line front door.

Four subcommands:

* forward:  direct solves (series variants or the quadrature oracle)
* inverse:  backward solves (series variants, the classical baseline)
* validate: the constants audit; exit 0 iff the observed pass/fail table
  matches the documented expectation for the chosen constants mode
* study:    reproducible experiment sweeps driven by a flat config file

Outputs are CSV or JSON with a metadata header that is sufficient to re-run
the command; identical invocations write byte-identical files (study
reports carry one wall-clock column, runtime_ms, which is exempt).  Exit
codes: 0 success, 1 validation failure, 2 configuration error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .experiments import (
    GridGeom,
    StudyConfig,
    expected_audit_statuses,
    run_audit,
    run_study,
)
from .kernels import forward_line, forward_polar
from .profiles import (
    Sampled1D,
    estimate_scale_line,
    estimate_scale_polar,
    parse_profile,
)
from .quad import AccuracyError, QuadSpec
from .series_cartesian import DEFAULT_ORDER, default_beta, solve_grid_line
from .series_polar import solve_grid_polar
from .specfun import KernelParams

FORWARD_VARIANTS = {
    "line": ("CD-A", "CD-B", "CD-C", "oracle"),
    "polar": ("PD-A", "PD-B", "PD-C", "oracle"),
}
INVERSE_VARIANTS = {
    "line": ("CI-A", "CI-B", "CI-C", "CI-classical"),
    "polar": ("PI-A", "PI-B", "PI-C"),
}


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-heatseries-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render_csv(metadata: dict, header: list, rows: list) -> str:
    lines = [f"# {key} = {_fmt(val)}" for key, val in metadata.items()]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _render_json(metadata: dict, header: list, rows: list) -> str:
    payload = {
        "metadata": metadata,
        "rows": [dict(zip(header, row)) for row in rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(args, metadata: dict, header: list, rows: list) -> None:
    text = (_render_json if args.format == "json" else _render_csv)(metadata, header, rows)
    if args.output:
        _atomic_write(args.output, text)
    else:
        sys.stdout.write(text)


def _parse_eval_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"--eval-grid must be lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(f"--eval-grid must be numeric lo:hi:n, got {text!r}") from None
    if n < 1:
        raise CliError("--eval-grid needs at least one point")
    if n == 1:
        if lo != hi:
            raise CliError("--eval-grid with n=1 needs lo == hi")
        return np.array([lo])
    if not lo < hi:
        raise CliError("--eval-grid needs lo < hi")
    return np.linspace(lo, hi, n)


def _read_sampled(path: str) -> Sampled1D:
    """Read `x,value` pairs; `#` lines and non-numeric header rows ignored."""
    xs, vals = [], []
    try:
        with open(path) as handle:
            for line in handle:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split(",")
                if len(parts) < 2:
                    raise CliError(f"{path}: expected x,value per line, got {line!r}")
                try:
                    xs.append(float(parts[0]))
                    vals.append(float(parts[1]))
                except ValueError:
                    continue  # column-header row
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    if len(xs) < 2:
        raise CliError(f"{path}: need at least two samples")
    xs_arr = np.asarray(xs)
    steps = np.diff(xs_arr)
    if np.any(steps <= 0.0):
        raise CliError(f"{path}: sample abscissae must be strictly increasing")
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(steps[0]), 1e-300):
        raise CliError(f"{path}: samples must sit on a uniform grid")
    return Sampled1D(float(xs_arr[0]), float(xs_arr[-1]), np.asarray(vals))


def _resolve_beta(args, variant: str, data, geometry: str, tau: float) -> float:
    if variant in ("oracle", "CI-classical"):
        return 0.0
    raw = args.beta
    if raw is None:
        raise CliError(f"{variant} needs --beta (a number or 'auto')")
    if raw != "auto":
        try:
            beta = float(raw)
        except ValueError:
            raise CliError(f"--beta must be a number or 'auto', got {raw!r}") from None
        if beta <= 0.0:
            raise CliError("--beta must be positive")
        return beta
    est = estimate_scale_line(data) if geometry == "line" else estimate_scale_polar(data)
    return default_beta(variant, est, tau)


def _load_data(args, geometry: str):
    if (args.profile is None) == (getattr(args, "input", None) is None):
        raise CliError("provide exactly one of --profile or --input")
    if args.profile is not None:
        try:
            return parse_profile(args.profile), {"profile": args.profile}
        except ValueError as exc:
            raise CliError(f"bad --profile: {exc}") from None
    data = _read_sampled(args.input)
    return data, {"input": args.input}


def _config_echo(args, extra: dict) -> dict:
    echo = {"command": args.command, "geometry": args.geometry}
    echo.update(extra)
    echo["format"] = args.format
    echo["constants_mode"] = getattr(args, "constants_mode", "oracle_validated")
    return echo


def cmd_forward(args) -> int:
    geometry = args.geometry
    if args.variant not in FORWARD_VARIANTS[geometry]:
        raise CliError(
            f"variant {args.variant!r} is not a {geometry} forward variant; "
            f"choose from {FORWARD_VARIANTS[geometry]}"
        )
    if not (args.tau > 0.0):
        raise CliError("--tau must be > 0 (the kernel and every series need it)")
    data, source = _load_data(args, geometry)
    xs = _parse_eval_grid(args.eval_grid)
    if geometry == "polar" and np.any(xs < 0.0):
        raise CliError("polar evaluation radii must be non-negative")
    beta = _resolve_beta(args, args.variant, data, geometry, args.tau)
    spec = QuadSpec()
    try:
        if args.variant == "oracle":
            forward = forward_line if geometry == "line" else forward_polar
            values = forward(data, args.tau, xs, spec)
            flags = [False] * xs.size
        else:
            params = KernelParams(tau=args.tau, beta=beta)
            solver = solve_grid_line if geometry == "line" else solve_grid_polar
            values, diags = solver(
                args.variant, data, params, args.order, xs, args.constants_mode, spec
            )
            flags = [d.flagged for d in diags]
    except AccuracyError as exc:
        raise CliError(f"forward {args.variant}: quadrature did not converge: {exc}", code=3)
    except OverflowError as exc:
        raise CliError(f"forward {args.variant}: overflow: {exc}", code=3)
    metadata = _config_echo(args, source)
    metadata.update(
        {
            "variant": args.variant,
            "tau": args.tau,
            "beta": beta,
            "beta_requested": args.beta if args.beta is not None else "",
            "order": args.order,
            "eval_grid": args.eval_grid,
            "axis": "x" if geometry == "line" else "r",
        }
    )
    rows = [(float(x), float(v), bool(f)) for x, v, f in zip(xs, values, flags)]
    _emit(args, metadata, [metadata["axis"], "value", "diverged"], rows)
    return 0


def cmd_inverse(args) -> int:
    geometry = args.geometry
    if args.variant not in INVERSE_VARIANTS[geometry]:
        raise CliError(
            f"variant {args.variant!r} is not a {geometry} inverse variant; "
            f"choose from {INVERSE_VARIANTS[geometry]}"
        )
    if not (args.tau > 0.0):
        raise CliError("--tau must be > 0")
    data, source = _load_data(args, geometry)
    xs = _parse_eval_grid(args.eval_grid)
    if geometry == "polar" and np.any(xs < 0.0):
        raise CliError("polar evaluation radii must be non-negative")
    if args.noise is not None:
        if not isinstance(data, Sampled1D):
            raise CliError("--noise applies to --input sample files only")
        if args.noise < 0.0:
            raise CliError("--noise must be non-negative")
        rng = np.random.default_rng(args.seed)
        data = data.with_noise(args.noise, rng)
    beta = _resolve_beta(args, args.variant, data, geometry, args.tau)
    spec = QuadSpec()
    try:
        solver = solve_grid_line if geometry == "line" else solve_grid_polar
        if args.variant == "CI-classical":
            values, diags = solve_grid_line(
                "CI-classical", data, None, args.order, xs, args.constants_mode, spec, tau=args.tau
            )
        else:
            params = KernelParams(tau=args.tau, beta=beta)
            values, diags = solver(
                args.variant, data, params, args.order, xs, args.constants_mode, spec
            )
        flags = [d.flagged for d in diags]
    except AccuracyError as exc:
        raise CliError(f"inverse {args.variant}: quadrature did not converge: {exc}", code=3)
    except OverflowError as exc:
        raise CliError(f"inverse {args.variant}: overflow: {exc}", code=3)
    except ValueError as exc:
        raise CliError(f"inverse {args.variant}: {exc}")
    metadata = _config_echo(args, source)
    metadata.update(
        {
            "variant": args.variant,
            "tau": args.tau,
            "beta": beta,
            "beta_requested": args.beta if args.beta is not None else "",
            "order": args.order,
            "eval_grid": args.eval_grid,
            "noise": args.noise if args.noise is not None else "",
            "seed": args.seed,
            "axis": "x" if geometry == "line" else "r",
        }
    )
    if any(flags):
        metadata["warning"] = "divergence flagged at some evaluation points"
    if args.truth:
        try:
            truth_profile = parse_profile(args.truth)
        except ValueError as exc:
            raise CliError(f"bad --truth: {exc}") from None
        truth = truth_profile(xs)
        err = np.asarray(values) - truth
        metadata["summary_rel_l2"] = float(np.linalg.norm(err) / np.linalg.norm(truth))
        metadata["summary_rel_max"] = float(np.max(np.abs(err)) / np.max(np.abs(truth)))
    rows = [(float(x), float(v), bool(f)) for x, v, f in zip(xs, values, flags)]
    _emit(args, metadata, [metadata["axis"], "value", "diverged"], rows)
    return 0


def cmd_validate(args) -> int:
    mode = args.constants_mode
    config = StudyConfig(study_kind="audit", constants_mode=mode)
    report = run_audit(config)
    expected = expected_audit_statuses(mode)
    observed = {row.variant: row.status for row in report.rows}
    metadata = {
        "command": "validate",
        "constants_mode": mode,
        "tolerances": json.dumps(report.metadata["tolerances"], sort_keys=True),
    }
    ratios = report.metadata.get("literal_value_ratios", {})
    if ratios:
        metadata["literal_value_ratios"] = json.dumps(
            {k: float(f"{v:.17g}") for k, v in sorted(ratios.items())}, sort_keys=True
        )
    header = ["variant", "n", "beta", "error", "status", "expected"]
    rows = [
        (r.variant, r.n, r.beta, r.error_max, r.status, expected[r.variant])
        for r in report.rows
    ]
    _emit(args, metadata, header, rows)
    mismatches = {v: (observed[v], expected[v]) for v in observed if observed[v] != expected[v]}
    if mismatches:
        detail = ", ".join(f"{v}: got {o}, expected {e}" for v, (o, e) in sorted(mismatches.items()))
        print(f"validate: audit table mismatch ({detail})", file=sys.stderr)
        return 1
    return 0


# --- study config files ---------------------------------------------------------

def _parse_number_list(text: str, line_no: int, path: str, integer: bool = False):
    text = text.strip()
    out = []
    if ":" in text and "," not in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CliError(f"{path}:{line_no}: ranges are lo:hi:step, got {text!r}")
        try:
            lo, hi, step = (int(p) if integer else float(p) for p in parts)
        except ValueError:
            raise CliError(f"{path}:{line_no}: non-numeric range {text!r}") from None
        if step <= 0 or hi < lo:
            raise CliError(f"{path}:{line_no}: bad range {text!r}")
        val = lo
        while val <= hi:
            out.append(val)
            val += step
        return tuple(out)
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            out.append(int(piece) if integer else float(piece))
        except ValueError:
            raise CliError(f"{path}:{line_no}: non-numeric value {piece!r}") from None
    if not out:
        raise CliError(f"{path}:{line_no}: empty list")
    return tuple(out)


def _parse_study_config(path: str) -> StudyConfig:
    """Flat `key = value` lines under [study] / [grid] / [sweep] markers."""
    sections = {"study": {}, "grid": {}, "sweep": {}}
    current = None
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in sections:
                raise CliError(f"{path}:{line_no}: unknown section [{name}]")
            current = name
            continue
        if current is None:
            raise CliError(f"{path}:{line_no}: key outside of a [section]")
        if "=" not in line:
            raise CliError(f"{path}:{line_no}: expected key = value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        sections[current][key] = (val, line_no)
    study = sections["study"]

    def take(section: dict, key: str, default=None):
        if key in section:
            return section.pop(key)
        return (default, None)

    kind, ln = take(study, "kind")
    if kind is None:
        raise CliError(f"{path}: [study] must set kind")
    geometry, _ = take(study, "geometry", "line")
    profile_text, pln = take(study, "profile", "gaussian:a=1")
    try:
        profile = parse_profile(profile_text)
    except ValueError as exc:
        raise CliError(f"{path}:{pln or 0}: bad profile: {exc}") from None

    def number(section, key, default, caster=float):
        val, line_no = take(section, key, None)
        if val is None:
            return default
        try:
            return caster(val)
        except ValueError:
            raise CliError(f"{path}:{line_no}: {key} must be numeric, got {val!r}") from None

    tau = number(study, "tau", 0.3)
    seed = number(study, "seed", 20250808, int)
    mode, _ = take(study, "constants_mode", "oracle_validated")
    variants_text, _ = take(study, "variants", "")
    variants = tuple(v.strip() for v in variants_text.split(",") if v.strip())
    if study:
        key = sorted(study)[0]
        raise CliError(f"{path}:{study[key][1]}: unknown [study] key {key!r}")

    grid_sec = sections["grid"]
    lo = number(grid_sec, "lo", -8.0 if geometry == "line" else 0.0)
    hi = number(grid_sec, "hi", 8.0)
    n = number(grid_sec, "n", 401, int)
    if grid_sec:
        key = sorted(grid_sec)[0]
        raise CliError(f"{path}:{grid_sec[key][1]}: unknown [grid] key {key!r}")

    sweep = sections["sweep"]
    orders_val, oln = take(sweep, "orders", None)
    n_range = (
        _parse_number_list(orders_val, oln, path, integer=True)
        if orders_val is not None
        else tuple(range(0, 45, 2))
    )
    deltas_val, dln = take(sweep, "deltas", None)
    delta_range = (
        _parse_number_list(deltas_val, dln, path) if deltas_val is not None else (0.0, 1e-3)
    )
    betas_val, bln = take(sweep, "betas", None)
    beta_range = _parse_number_list(betas_val, bln, path) if betas_val is not None else ()
    if sweep:
        key = sorted(sweep)[0]
        raise CliError(f"{path}:{sweep[key][1]}: unknown [sweep] key {key!r}")

    try:
        return StudyConfig(
            study_kind=kind,
            geometry=geometry,
            profile=profile,
            tau=tau,
            n_range=n_range,
            delta_range=delta_range,
            beta_range=beta_range,
            grid=GridGeom(lo, hi, n),
            seed=seed,
            variants=variants,
            constants_mode=mode,
        )
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def cmd_study(args) -> int:
    config = _parse_study_config(args.config)
    try:
        report = run_study(config)
    except (AccuracyError, OverflowError) as exc:
        raise CliError(f"study failed numerically: {exc}", code=3)
    metadata = {"command": "study", "config_file": args.config}
    for key, val in report.metadata.items():
        metadata[key] = json.dumps(val, sort_keys=True) if isinstance(val, (dict, list)) else val
    header = ["variant", "N", "beta", "delta", "error_l2", "error_max", "diverged", "status", "runtime_ms"]
    rows = [
        (r.variant, r.n, r.beta, r.delta, r.error_l2, r.error_max, r.diverged, r.status, r.runtime_ms)
        for r in report.rows
    ]
    _emit(args, metadata, header, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatseries",
        description="Direct and inverse heat-equation solves by truncated series, "
        "with quadrature oracles and reproducible studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common_io(p):
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument(
            "--constants-mode",
            dest="constants_mode",
            choices=("oracle_validated", "paper_literal"),
            default="oracle_validated",
        )

    def common_solve(p, variants):
        p.add_argument("--geometry", choices=("line", "polar"), default="line")
        p.add_argument("--variant", required=True, choices=variants)
        p.add_argument("--tau", type=float, required=True)
        p.add_argument("--beta", help="shift parameter: a positive number or 'auto'")
        p.add_argument("--order", type=int, default=DEFAULT_ORDER, help="truncation order N")
        p.add_argument("--profile", help="analytic data, e.g. gaussian:a=1")
        p.add_argument("--input", help="sampled data file (x,value per line)")
        p.add_argument("--eval-grid", dest="eval_grid", required=True, help="lo:hi:n")
        common_io(p)

    fwd = sub.add_parser("forward", help="solve the direct problem")
    common_solve(fwd, sorted(set(FORWARD_VARIANTS["line"] + FORWARD_VARIANTS["polar"])))

    inv = sub.add_parser("inverse", help="solve the backward problem")
    common_solve(inv, sorted(set(INVERSE_VARIANTS["line"] + INVERSE_VARIANTS["polar"])))
    inv.add_argument("--noise", type=float, help="additive noise std-dev on --input data")
    inv.add_argument("--seed", type=int, default=0, help="noise seed")
    inv.add_argument("--truth", help="reference profile for the error summary")

    val = sub.add_parser("validate", help="run the constants audit")
    common_io(val)

    stu = sub.add_parser("study", help="run a configured study")
    stu.add_argument("--config", required=True, help="study config file")
    common_io(stu)

    return parser


_COMMANDS = {
    "forward": cmd_forward,
    "inverse": cmd_inverse,
    "validate": cmd_validate,
    "study": cmd_study,
}


def _merge_grid_args(argv):
    """Let `--eval-grid -8:8:401` work: argparse would read the value as a flag."""
    out = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg == "--eval-grid" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--eval-grid={argv[i + 1]}")
            i += 2
        else:
            out.append(arg)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_merge_grid_args(list(argv)))
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"heatseries {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
