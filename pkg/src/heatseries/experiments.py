"""Reproducible studies over the series solvers.

Five study kinds:

* audit: certifies every series variant at truncation orders 0, 1, 2
  against the kernel-quadrature oracle under its exact-truncation Gaussian
  configuration, in both constants modes.  This is the arbitration protocol
  for the published-vs-validated constant sets.
* convergence: error versus truncation order for the direct variants.
* beta_map: error and divergence flag over a grid of shift values.
* noise: reconstruction error under additive grid noise; locates the
  error-minimizing order and the semi-convergence (U-shape) indicator.
* classical_compare: the derivative-based inverse baseline against the
  moment-based series on identical noisy data.

Reports are deterministic given (config, seed): noise comes from a recorded
numpy PCG64 stream, summation orders are fixed, and rows are sorted
canonically.  Row runtimes are wall-clock measurements and are the one
field excluded from reproducibility comparisons.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__ as _pkg_version
from .kernels import evolve_line, evolve_polar, forward_line, forward_polar
from .profiles import AnalyticProfile, Gaussian, Sampled1D, format_profile
from .quad import QuadSpec
from .series_cartesian import ci_classical, default_beta, solve_grid_line
from .series_polar import solve_grid_polar
from .specfun import KernelParams

__all__ = [
    "GridGeom",
    "StudyConfig",
    "StudyReport",
    "StudyRow",
    "run_audit",
    "run_beta_map",
    "run_classical_compare",
    "run_convergence",
    "run_noise_study",
    "run_study",
]

PRNG_NAME = "numpy-PCG64"

LINE_COMPARE_GRID = np.linspace(-3.0, 3.0, 121)
POLAR_COMPARE_GRID = np.linspace(0.0, 3.0, 61)

# fixed shift for the noise studies: deliberately scale-mismatched so the
# truncation bias is visible and the bias/variance tradeoff has an interior
# optimum (the scale-matched rule would make order 0 already optimal)
NOISE_STUDY_BETA = {"line": 0.6, "polar": 0.8}

LINE_VARIANTS = ("CD-A", "CD-B", "CD-C", "CI-A", "CI-B", "CI-C", "CI-classical")
POLAR_VARIANTS = ("PD-A", "PD-B", "PD-C", "PI-A", "PI-B", "PI-C")
ALL_SERIES_VARIANTS = (
    "CD-A", "CD-B", "CD-C", "CI-A", "CI-B", "CI-C",
    "PD-A", "PD-B", "PD-C", "PI-A", "PI-B", "PI-C",
)


@dataclass(frozen=True)
class GridGeom:
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.n < 2 or not (self.lo < self.hi):
            raise ValueError(f"bad grid geometry [{self.lo}, {self.hi}] n={self.n}")


@dataclass
class StudyConfig:
    study_kind: str
    geometry: str = "line"
    profile: AnalyticProfile = field(default_factory=lambda: Gaussian(width_a=1.0))
    tau: float = 0.3
    n_range: tuple = tuple(range(0, 45, 2))
    delta_range: tuple = (0.0, 1e-3)
    beta_range: tuple = ()
    grid: GridGeom | None = None
    seed: int = 20250808
    variants: tuple = ()
    constants_mode: str = "oracle_validated"
    quad: QuadSpec = field(default_factory=QuadSpec)

    def __post_init__(self):
        kinds = ("audit", "convergence", "beta_map", "noise", "classical_compare")
        if self.study_kind not in kinds:
            raise ValueError(f"study_kind must be one of {kinds}")
        if self.geometry not in ("line", "polar"):
            raise ValueError("geometry must be 'line' or 'polar'")
        if self.study_kind != "audit":
            if not self.n_range:
                raise ValueError("n_range must be non-empty")
            if self.study_kind in ("noise", "classical_compare") and not self.delta_range:
                raise ValueError("delta_range must be non-empty")
            if self.study_kind == "beta_map" and not self.beta_range:
                raise ValueError("beta_map needs an explicit beta_range")
        if self.grid is None:
            lo = -8.0 if self.geometry == "line" else 0.0
            self.grid = GridGeom(lo, 8.0, 401)


@dataclass
class StudyRow:
    variant: str
    n: int
    beta: float
    delta: float
    error_l2: float
    error_max: float
    diverged: bool
    status: str
    runtime_ms: float

    def sort_key(self):
        return (self.variant, self.n, self.beta, self.delta)


@dataclass
class StudyReport:
    study_kind: str
    metadata: dict
    rows: list

    def finalize(self):
        self.rows.sort(key=StudyRow.sort_key)
        return self

    def rows_equal(self, other: "StudyReport", ignore_timing: bool = True) -> bool:
        if len(self.rows) != len(other.rows):
            return False
        for a, b in zip(self.rows, other.rows):
            fields_a = (a.variant, a.n, a.beta, a.delta, a.error_l2, a.error_max, a.diverged, a.status)
            fields_b = (b.variant, b.n, b.beta, b.delta, b.error_l2, b.error_max, b.diverged, b.status)
            if fields_a != fields_b:
                return False
            if not ignore_timing and a.runtime_ms != b.runtime_ms:
                return False
        return True


def _base_metadata(config: StudyConfig) -> dict:
    return {
        "study_kind": config.study_kind,
        "geometry": config.geometry,
        "profile": format_profile(config.profile),
        "tau": config.tau,
        "n_range": list(config.n_range),
        "delta_range": list(config.delta_range),
        "beta_range": list(config.beta_range),
        "grid": [config.grid.lo, config.grid.hi, config.grid.n],
        "seed": config.seed,
        "prng": PRNG_NAME,
        "variants": list(config.variants),
        "constants_mode": config.constants_mode,
        "library_version": _pkg_version,
    }


def _compare_grid(geometry: str) -> np.ndarray:
    return LINE_COMPARE_GRID if geometry == "line" else POLAR_COMPARE_GRID


def _errors(values: np.ndarray, truth: np.ndarray) -> tuple[float, float]:
    denom_l2 = float(np.linalg.norm(truth))
    denom_max = float(np.max(np.abs(truth)))
    err_l2 = float(np.linalg.norm(values - truth)) / denom_l2
    err_max = float(np.max(np.abs(values - truth))) / denom_max
    return err_l2, err_max


def _solve(variant, data, params, n, xs, mode, spec, tau=None):
    if variant in LINE_VARIANTS:
        return solve_grid_line(variant, data, params, n, xs, mode, spec, tau=tau)
    return solve_grid_polar(variant, data, params, n, xs, mode, spec)


def _sweep_orders(variant, data, params, n_list, xs, mode, spec, tau=None):
    """Values and divergence flags for every order in n_list.

    Coefficients do not depend on the truncation order, so they are computed
    once at max(n_list) and sliced; only CI-classical re-derives (cheaply)
    per order.  Yields (n, values, any_flagged, err) with err set to an
    exception when that order failed.
    """
    from .series_cartesian import cd_coeffs, cd_eval, ci_coeffs, ci_eval
    from .series_polar import pd_coeffs, pd_eval, pi_coeffs, pi_eval

    xs = np.asarray(xs, dtype=float)
    n_list = sorted(int(n) for n in n_list)
    n_max = n_list[-1]
    if variant == "CI-classical":
        for n in n_list:
            try:
                vals, diags = ci_classical(data, tau if tau is not None else params.tau, n, xs)
                yield n, vals, any(d.flagged for d in diags), None
            except (OverflowError, ValueError) as exc:
                yield n, None, True, exc
        return
    table = {
        "CD-A": (cd_coeffs, cd_eval, False),
        "CD-B": (cd_coeffs, cd_eval, False),
        "CD-C": (cd_coeffs, cd_eval, True),
        "CI-A": (ci_coeffs, ci_eval, False),
        "CI-B": (ci_coeffs, ci_eval, False),
        "CI-C": (ci_coeffs, ci_eval, True),
        "PD-A": (pd_coeffs, pd_eval, False),
        "PD-B": (pd_coeffs, pd_eval, False),
        "PD-C": (pd_coeffs, pd_eval, True),
        "PI-A": (pi_coeffs, pi_eval, False),
        "PI-B": (pi_coeffs, pi_eval, False),
        "PI-C": (pi_coeffs, pi_eval, True),
    }
    coeff_fn, eval_fn, pointwise = table[variant]
    try:
        if pointwise:
            per_point = [coeff_fn(variant, data, params, n_max, float(x), spec) for x in xs]
        else:
            coeffs = coeff_fn(variant, data, params, n_max, spec=spec)
    except (OverflowError, ValueError) as exc:
        for n in n_list:
            yield n, None, True, exc
        return
    for n in n_list:
        try:
            if pointwise:
                vals = np.empty(xs.size)
                flagged = False
                for i, x in enumerate(xs):
                    v, diag = eval_fn(variant, per_point[i][: n + 1], params, float(x), mode)
                    vals[i] = v
                    flagged = flagged or diag.flagged
                yield n, vals, flagged, None
            else:
                vals, diags = eval_fn(variant, coeffs[: n + 1], params, xs, mode)
                yield n, vals, any(d.flagged for d in diags), None
        except (OverflowError, ValueError) as exc:
            yield n, None, True, exc


def _geometry_of(variant: str) -> str:
    return "line" if variant in LINE_VARIANTS else "polar"


# --- audit ---------------------------------------------------------------------

# exact-truncation Gaussian configurations (width a = 1) per variant:
# (tau, beta, probes); C variants also get an off-center probe checked at
# full order, which is where the published CI-C constants break.
_AUDIT_SETUP = {
    "CD-A": (0.5, 1.0, (-1.3, 0.0, 0.8, 2.1)),
    "CD-B": (0.4, 0.6, (-1.3, 0.0, 0.8, 2.1)),
    "CD-C": (0.5, 1.0, (0.0,)),
    "CI-A": (0.3, 1.0, (-1.3, 0.0, 0.8, 2.1)),
    "CI-B": (0.3, 1.0, (-1.3, 0.0, 0.8, 2.1)),
    "CI-C": (0.3, 1.0, (0.0,)),
    "PD-A": (0.5, 1.0, (0.0, 0.7, 1.6, 2.5)),
    "PD-B": (0.4, 0.6, (0.0, 0.7, 1.6, 2.5)),
    "PD-C": (0.5, 1.0, (0.0,)),
    "PI-A": (0.3, 1.0, (0.0, 0.7, 1.6, 2.5)),
    "PI-B": (0.3, 1.3, (0.0, 0.7, 1.6, 2.5)),
    "PI-C": (0.3, 1.0, (0.0,)),
}

_AUDIT_TOL_EXACT = 1e-9     # N in {0, 1, 2} at the exact-truncation config
_AUDIT_TOL_FULL = 1e-8      # off-center / full-order convergence checks
_AUDIT_FULL_ORDER = 40
_CI_B_FULL_ORDER = 60       # CI-B converges subgeometrically at the outer probe
_OFF_CENTER_PROBE = 1.0

# variants whose published constants differ from the oracle-validated ones
_LITERAL_SENSITIVE = ("CD-C", "CI-C", "PD-C", "PI-C")


def _audit_case(variant: str):
    tau, beta, probes = _AUDIT_SETUP[variant]
    geometry = _geometry_of(variant)
    f = Gaussian(width_a=1.0)
    evolve = evolve_line if geometry == "line" else evolve_polar
    if variant.startswith(("CD", "PD")):
        data = f
        oracle_fn = (forward_line if geometry == "line" else forward_polar)
        truth = lambda xs: oracle_fn(f, tau, xs)
    else:
        data = evolve(f, tau)
        truth = lambda xs: f(np.asarray(xs, dtype=float))
    return tau, beta, np.asarray(probes), data, truth


def run_audit(config: StudyConfig) -> StudyReport:
    """Certify all 12 series variants at N in {0, 1, 2} against the oracle.

    In oracle_validated mode every variant must pass.  In paper_literal mode
    the C variants fail by their documented constant ratios, which the
    report records in metadata["literal_value_ratios"] (the truncated-value
    ratio at the exact-truncation configuration).
    """
    if config.study_kind != "audit":
        raise ValueError("config.study_kind must be 'audit'")
    mode = config.constants_mode
    spec = config.quad
    rows: list[StudyRow] = []
    ratios: dict[str, float] = {}
    for variant in ALL_SERIES_VARIANTS:
        tau, beta, probes, data, truth = _audit_case(variant)
        params = KernelParams(tau=tau, beta=beta)
        truth_vals = np.atleast_1d(truth(probes))
        scale = float(np.max(np.abs(truth_vals)))
        errs = {}
        t0 = time.perf_counter()
        full_order = _CI_B_FULL_ORDER if variant == "CI-B" else _AUDIT_FULL_ORDER
        for n in (0, 1, 2, full_order):
            vals, diags = _solve(variant, data, params, n, probes, mode, spec)
            err = float(np.max(np.abs(vals - truth_vals))) / scale
            errs[n] = err
            rows.append(
                StudyRow(
                    variant=variant,
                    n=n,
                    beta=beta,
                    delta=0.0,
                    error_l2=err,
                    error_max=err,
                    diverged=any(d.flagged for d in diags),
                    status="",
                    runtime_ms=(time.perf_counter() - t0) * 1e3,
                )
            )
        if variant in _LITERAL_SENSITIVE:
            # value ratio literal/validated of the N=2 truncation at center
            v_lit, _ = _solve(variant, data, params, 2, probes[:1], "paper_literal", spec)
            v_ok, _ = _solve(variant, data, params, 2, probes[:1], "oracle_validated", spec)
            ratios[variant] = float(v_lit[0] / v_ok[0])
            off = np.array([_OFF_CENTER_PROBE])
            off_vals, _ = _solve(variant, data, params, _AUDIT_FULL_ORDER, off, mode, spec)
            off_err = float(abs(off_vals[0] - np.atleast_1d(truth(off))[0])) / scale
        if variant == "CI-B":
            # no exact-truncation configuration exists for the weighted
            # moments; certified by strict error decrease plus full-order
            # convergence to the oracle
            passed = errs[2] < 0.8 * errs[0] and errs[full_order] <= _AUDIT_TOL_FULL
        else:
            passed = all(errs[n] <= _AUDIT_TOL_EXACT for n in (0, 1, 2))
            if variant in _LITERAL_SENSITIVE:
                passed = passed and off_err <= _AUDIT_TOL_FULL
        status = "pass" if passed else "fail"
        for row in rows:
            if row.variant == variant:
                row.status = status
    metadata = _base_metadata(config)
    metadata["tolerances"] = {"exact": _AUDIT_TOL_EXACT, "full": _AUDIT_TOL_FULL}
    if ratios:
        metadata["literal_value_ratios"] = ratios
    return StudyReport("audit", metadata, rows).finalize()


def expected_audit_statuses(mode: str) -> dict:
    """The documented pass/fail table per constants mode (the errata guard)."""
    if mode == "oracle_validated":
        return {v: "pass" for v in ALL_SERIES_VARIANTS}
    out = {v: "pass" for v in ALL_SERIES_VARIANTS}
    for v in _LITERAL_SENSITIVE:
        out[v] = "fail"
    return out


# --- sampled-data scaffolding -----------------------------------------------------

def _sampled_forward(config: StudyConfig) -> Sampled1D:
    evolve = evolve_line if config.geometry == "line" else evolve_polar
    u = evolve(config.profile, config.tau)
    return Sampled1D.from_function(u, config.grid.lo, config.grid.hi, config.grid.n)


def _noise_betas(config: StudyConfig) -> float:
    if config.beta_range:
        return config.beta_range[0]
    return NOISE_STUDY_BETA[config.geometry]


def _reconstruction_rows(
    config: StudyConfig,
    variants,
    data: Sampled1D,
    delta: float,
    beta: float,
) -> list:
    xs = _compare_grid(config.geometry)
    truth = config.profile(xs)
    rows = []
    for variant in variants:
        params = None
        if variant != "CI-classical":
            params = KernelParams(tau=config.tau, beta=beta)
        t0 = time.perf_counter()
        for n, vals, diverged, exc in _sweep_orders(
            variant, data, params, config.n_range, xs, config.constants_mode, config.quad, tau=config.tau
        ):
            if exc is not None:
                err_l2 = err_max = float("nan")
                status = f"error:{type(exc).__name__}"
            else:
                err_l2, err_max = _errors(vals, truth)
                status = "ok"
                if not (math.isfinite(err_l2) and math.isfinite(err_max)):
                    status = "error:nonfinite"
            rows.append(
                StudyRow(
                    variant=variant,
                    n=int(n),
                    beta=0.0 if variant == "CI-classical" else beta,
                    delta=delta,
                    error_l2=err_l2,
                    error_max=err_max,
                    diverged=diverged,
                    status=status,
                    runtime_ms=(time.perf_counter() - t0) * 1e3,
                )
            )
            t0 = time.perf_counter()
    return rows


def _semi_convergence_summary(rows, n_range) -> dict:
    """Per (variant, delta): the minimizing order and the U-shape indicator."""
    summary = {}
    by_key: dict = {}
    for row in rows:
        if row.status != "ok":
            continue
        by_key.setdefault((row.variant, row.delta), []).append(row)
    for (variant, delta), group in by_key.items():
        group.sort(key=lambda r: r.n)
        errs = {r.n: r.error_l2 for r in group}
        n_star = min(errs, key=errs.get)
        lo_n, hi_n = min(errs), max(errs)
        interior = (
            lo_n < n_star < hi_n
            and errs[n_star] < errs[lo_n]
            and errs[n_star] < errs[hi_n]
        )
        summary[f"{variant}@delta={delta:.17g}"] = {
            "n_star": int(n_star),
            "err_at_n_star": errs[n_star],
            "err_at_first": errs[lo_n],
            "err_at_last": errs[hi_n],
            "u_shape": bool(interior and delta > 0.0),
        }
    return summary


def run_noise_study(config: StudyConfig) -> StudyReport:
    """Reconstruction error under additive i.i.d. Gaussian grid noise.

    One noise shape is drawn from the seeded stream and scaled by each delta,
    so rows across noise levels share the same realization.
    """
    if config.study_kind != "noise":
        raise ValueError("config.study_kind must be 'noise'")
    variants = config.variants or (
        ("CI-A", "CI-classical") if config.geometry == "line" else ("PI-A",)
    )
    clean = _sampled_forward(config)
    beta = _noise_betas(config)
    rng = np.random.default_rng(config.seed)
    shape = rng.standard_normal(clean.n_nodes)
    rows: list = []
    for delta in config.delta_range:
        data = Sampled1D(clean.lo, clean.hi, clean.values + delta * shape)
        rows.extend(_reconstruction_rows(config, variants, data, delta, beta))
    metadata = _base_metadata(config)
    metadata["beta_used"] = beta
    report = StudyReport("noise", metadata, rows).finalize()
    metadata["semi_convergence"] = _semi_convergence_summary(report.rows, config.n_range)
    return report


def run_classical_compare(config: StudyConfig) -> StudyReport:
    """CI-classical versus CI-A on identical noisy data."""
    if config.study_kind != "classical_compare":
        raise ValueError("config.study_kind must be 'classical_compare'")
    if config.geometry != "line":
        raise ValueError("the classical baseline exists on the line only")
    cfg = replace(config, study_kind="noise", variants=("CI-A", "CI-classical"))
    report = run_noise_study(cfg)
    report.study_kind = "classical_compare"
    report.metadata["study_kind"] = "classical_compare"
    return report


def run_convergence(config: StudyConfig) -> StudyReport:
    """Error versus truncation order against the forward oracle."""
    if config.study_kind != "convergence":
        raise ValueError("config.study_kind must be 'convergence'")
    variants = config.variants or (
        ("CD-A", "CD-B", "CD-C") if config.geometry == "line" else ("PD-A", "PD-B", "PD-C")
    )
    xs = _compare_grid(config.geometry)
    forward = forward_line if config.geometry == "line" else forward_polar
    truth = forward(config.profile, config.tau, xs, config.quad)
    from .profiles import estimate_scale_line, estimate_scale_polar

    est = estimate_scale_line if config.geometry == "line" else estimate_scale_polar
    scale = est(config.profile)
    rows: list = []
    for variant in variants:
        beta = config.beta_range[0] if config.beta_range else default_beta(variant, scale, config.tau)
        params = KernelParams(tau=config.tau, beta=beta)
        t0 = time.perf_counter()
        for n, vals, diverged, exc in _sweep_orders(
            variant, config.profile, params, config.n_range, xs, config.constants_mode, config.quad
        ):
            if exc is not None:
                err_l2 = err_max = float("nan")
                status = f"error:{type(exc).__name__}"
            else:
                err_l2, err_max = _errors(vals, truth)
                status = "ok"
            rows.append(
                StudyRow(variant, int(n), beta, 0.0, err_l2, err_max, diverged, status,
                         (time.perf_counter() - t0) * 1e3)
            )
            t0 = time.perf_counter()
    metadata = _base_metadata(config)
    return StudyReport("convergence", metadata, rows).finalize()


def run_beta_map(config: StudyConfig) -> StudyReport:
    """Error and divergence flag over an explicit grid of shifts."""
    if config.study_kind != "beta_map":
        raise ValueError("config.study_kind must be 'beta_map'")
    variants = config.variants or (("CD-B",) if config.geometry == "line" else ("PD-B",))
    xs = _compare_grid(config.geometry)
    forward = forward_line if config.geometry == "line" else forward_polar
    n = int(config.n_range[-1])
    rows: list = []
    for variant in variants:
        inverse = variant.startswith(("CI", "PI"))
        if inverse:
            evolve = evolve_line if config.geometry == "line" else evolve_polar
            data = evolve(config.profile, config.tau)
            truth = config.profile(xs)
        else:
            data = config.profile
            truth = forward(config.profile, config.tau, xs, config.quad)
        for beta in config.beta_range:
            params = KernelParams(tau=config.tau, beta=beta)
            t0 = time.perf_counter()
            try:
                vals, diags = _solve(variant, data, params, n, xs, config.constants_mode, config.quad)
                err_l2, err_max = _errors(vals, truth)
                diverged = any(d.flagged for d in diags)
                status = "ok"
            except (OverflowError, ValueError) as exc:
                err_l2 = err_max = float("nan")
                diverged, status = True, f"error:{type(exc).__name__}"
            rows.append(
                StudyRow(variant, n, float(beta), 0.0, err_l2, err_max, diverged, status,
                         (time.perf_counter() - t0) * 1e3)
            )
    metadata = _base_metadata(config)
    return StudyReport("beta_map", metadata, rows).finalize()


_RUNNERS = {
    "audit": run_audit,
    "convergence": run_convergence,
    "beta_map": run_beta_map,
    "noise": run_noise_study,
    "classical_compare": run_classical_compare,
}


def run_study(config: StudyConfig) -> StudyReport:
    return _RUNNERS[config.study_kind](config)
