"""Truncated Hermite-series solvers for the line.

Six shifted-series variants plus the classical derivative-based inverse
baseline, each split into coefficient computation, truncated evaluation and
divergence monitoring.  With s = tau + beta:

* CD-A (direct): moments of f against H_j(xi/(2 sqrt(beta))), evaluated with
  the Gaussian prefactor at scale s.
* CD-B (direct): moments at scale sqrt(s), prefactor at scale 2*tau + beta.
* CD-C (direct): even-order moments in the shifted argument
  (x - xi)/(2 sqrt(beta)); the coefficients depend on the evaluation point.
* CI-A / CI-B / CI-C (inverse): the same structures with the roles of the
  two scales exchanged; CI-B weights its moments with the Gaussian kernel at
  scale beta instead of carrying a prefactor.
* CI-classical (inverse): Maclaurin-type expansion in derivatives of the
  data at 0 - the instability baseline that amplifies noise through
  high-order differentiation.

Every evaluation sums in ascending order (reproducibility), stops early
once three consecutive terms drop below abs_tol, and records term
magnitudes for the divergence diagnostic.

constants_mode selects between the oracle-certified constants
("oracle_validated", default) and the originally published ones
("paper_literal") for the C variants, whose published constants fail the
kernel-oracle certification by documented ratios (see ERRATA.md).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .profiles import Gaussian, Mixture, Sampled1D, profile_support
from .quad import FiniteInterval, QuadSpec, integrate_vec
from .specfun import KernelParams, hermite_batch

__all__ = [
    "DIRECT_VARIANTS",
    "INVERSE_VARIANTS",
    "DivergenceDiag",
    "SeriesSolution",
    "beta_rule",
    "cd_coeffs",
    "cd_eval",
    "ci_classical",
    "ci_coeffs",
    "ci_eval",
    "solve_grid_line",
]

DIRECT_VARIANTS = ("CD-A", "CD-B", "CD-C")
INVERSE_VARIANTS = ("CI-A", "CI-B", "CI-C")
CONSTANTS_MODES = ("oracle_validated", "paper_literal")

DEFAULT_ORDER = 40
EARLY_STOP_RUN = 3  # consecutive sub-threshold terms before stopping
GROWTH_RUN = 5      # consecutive growing terms (from index >= 4) that flag divergence
GROWTH_MIN_INDEX = 4
GROWTH_NOISE_REL = 1e-12  # terms this far under the running max count as zero


@dataclass(frozen=True)
class DivergenceDiag:
    """Empirical growth monitor for one truncated-series evaluation.

    flagged is set when the term magnitudes grow through GROWTH_RUN
    consecutive comparisons starting at or after index GROWTH_MIN_INDEX;
    first_growth_index is the start of the first such run.  Terms more than
    GROWTH_NOISE_REL below the running maximum are numerically zero (parity
    zeros, quadrature noise) and are invisible to the scan.
    """

    term_magnitudes: np.ndarray
    flagged: bool
    first_growth_index: int | None


@dataclass
class SeriesSolution:
    """A truncated expansion as an evaluable record.

    constants_mode travels with the record so that serialized outputs always
    say which constant set produced them.
    """

    variant: str
    tau: float
    beta: float
    order_n: int
    coeffs: np.ndarray
    constants_mode: str = "oracle_validated"
    x_center: float = 0.0
    diagnostics: DivergenceDiag | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.size != self.order_n + 1:
            raise ValueError(
                f"coeffs must have length order_n + 1 = {self.order_n + 1}, got {self.coeffs.size}"
            )
        if self.variant != "CI-classical" and not (self.beta > 0.0):
            raise ValueError("beta must be positive for every shifted series")
        if self.constants_mode not in CONSTANTS_MODES:
            raise ValueError(f"unknown constants_mode {self.constants_mode!r}")

    def evaluate(self, x):
        """Evaluate this record at x; returns (value(s), diagnostics)."""
        params = KernelParams(tau=self.tau, beta=self.beta)
        if self.variant in DIRECT_VARIANTS:
            return cd_eval(self.variant, self.coeffs, params, x, self.constants_mode)
        if self.variant in INVERSE_VARIANTS:
            return ci_eval(self.variant, self.coeffs, params, x, self.constants_mode)
        raise ValueError(f"cannot evaluate variant {self.variant!r} from a record")


def _scan_divergence(mags: np.ndarray) -> tuple[bool, int | None]:
    mags = np.abs(mags)
    running_max = np.maximum.accumulate(np.maximum(mags, 1e-300))
    idx = np.nonzero(mags > GROWTH_NOISE_REL * running_max)[0]
    vals = mags[idx]
    run = 0
    for k in range(1, idx.size):
        run = run + 1 if vals[k] > vals[k - 1] else 0
        if run >= GROWTH_RUN and idx[k - GROWTH_RUN] >= GROWTH_MIN_INDEX:
            return True, int(idx[k - GROWTH_RUN])
    return False, None


def beta_rule(scale_estimate: float, tau: float, alignment: str = "shifted") -> float:
    """Shift choice aligning a variant's moment scale with the data scale.

    alignment "shifted" (moments at sqrt(tau+beta); the B variants and every
    inverse A/C variant): beta = max(scale - tau, tau/2).  alignment "plain"
    (moments at sqrt(beta); the direct A/C variants and PI-B):
    beta = max(scale, tau/2).  Either way the matched scale truncates the
    series exactly for pure Gaussians and the tau/2 floor keeps beta away
    from 0.  Feed the measured data scale: the profile width for a direct
    solve, the evolved width for an inverse one.
    """
    if not (math.isfinite(scale_estimate) and scale_estimate > 0.0):
        raise ValueError(f"scale estimate must be positive and finite, got {scale_estimate}")
    if not (math.isfinite(tau) and tau > 0.0):
        raise ValueError(f"tau must be positive and finite, got {tau}")
    if alignment == "shifted":
        return max(scale_estimate - tau, 0.5 * tau)
    if alignment == "plain":
        return max(scale_estimate, 0.5 * tau)
    raise ValueError(f"unknown alignment {alignment!r}; choose 'shifted' or 'plain'")


# which alignment matches each variant's moment scale
BETA_ALIGNMENT = {
    "CD-A": "plain",
    "CD-B": "shifted",
    "CD-C": "plain",
    "CI-A": "shifted",
    "CI-B": "shifted",
    "CI-C": "shifted",
    "PD-A": "plain",
    "PD-B": "shifted",
    "PD-C": "plain",
    "PI-A": "shifted",
    "PI-B": "plain",
    "PI-C": "shifted",
}


def default_beta(variant: str, scale_estimate: float, tau: float) -> float:
    """beta_rule with the alignment appropriate to the variant."""
    if variant == "CI-classical":
        raise ValueError("CI-classical has no shift parameter")
    try:
        alignment = BETA_ALIGNMENT[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}") from None
    return beta_rule(scale_estimate, tau, alignment)


# --- coefficient integrals --------------------------------------------------

def _moment_window(data, spec: QuadSpec, weight_root: float | None) -> tuple[float, float]:
    lo, hi = profile_support(data, spec.truncation_radius_sigmas)
    if weight_root is not None:
        reach = spec.truncation_radius_sigmas * weight_root * math.sqrt(2.0)
        lo, hi = max(lo, -reach), min(hi, reach)
    return lo, hi


def _hermite_moments(
    data,
    root: float,
    n: int,
    spec: QuadSpec,
    weight_root: float | None = None,
    diff_center: float | None = None,
    even_only: bool = False,
) -> np.ndarray:
    """Moments of the data against Hermite polynomials at the given scale.

    Plain form: int H_j(xi/(2 root)) data(xi) dxi.
    weight_root b: the integrand additionally carries e^{-xi^2/(4b^2)}/(2b sqrt(pi)).
    diff_center x: the polynomial argument becomes (x - xi)/(2 root).
    even_only: return orders 0, 2, ..., 2n (length n+1).
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    lo, hi = _moment_window(data, spec, weight_root)
    if lo >= hi:
        return np.zeros(n + 1)
    top = 2 * n if even_only else n
    breakpoints = data.nodes if isinstance(data, Sampled1D) else None

    def integrand(xi):
        arg = (diff_center - xi) if diff_center is not None else xi
        h = hermite_batch(top, arg / (2.0 * root))
        if even_only:
            h = h[::2]
        vals = h * data(xi)[None, :]
        if weight_root is not None:
            w = np.exp(-(xi * xi) / (4.0 * weight_root * weight_root)) / (
                2.0 * weight_root * math.sqrt(math.pi)
            )
            vals = vals * w[None, :]
        return vals

    vals, _ = integrate_vec(integrand, FiniteInterval(lo, hi), spec, breakpoints=breakpoints)
    return vals


def cd_coeffs(
    variant: str,
    f,
    params: KernelParams,
    n: int,
    x_center: float = 0.0,
    spec: QuadSpec = QuadSpec(),
) -> np.ndarray:
    """Direct-problem moments f_j (f_{2j} for CD-C, which are x-dependent)."""
    s = params.shifted
    if variant == "CD-A":
        return _hermite_moments(f, math.sqrt(params.beta), n, spec)
    if variant == "CD-B":
        return _hermite_moments(f, math.sqrt(s), n, spec)
    if variant == "CD-C":
        return _hermite_moments(
            f, math.sqrt(params.beta), n, spec, diff_center=x_center, even_only=True
        )
    raise ValueError(f"unknown direct variant {variant!r}")


def ci_coeffs(
    variant: str,
    u,
    params: KernelParams,
    n: int,
    x_center: float = 0.0,
    spec: QuadSpec = QuadSpec(),
) -> np.ndarray:
    """Inverse-problem moments u_j; the two scales swap roles versus cd_coeffs."""
    s = params.shifted
    if variant == "CI-A":
        return _hermite_moments(u, math.sqrt(s), n, spec)
    if variant == "CI-B":
        return _hermite_moments(
            u, math.sqrt(params.beta), n, spec, weight_root=math.sqrt(params.beta)
        )
    if variant == "CI-C":
        return _hermite_moments(
            u, math.sqrt(s), n, spec, diff_center=x_center, even_only=True
        )
    raise ValueError(f"unknown inverse variant {variant!r}")


# --- truncated evaluation ---------------------------------------------------

def _hermite_series_terms(
    coeffs: np.ndarray,
    arg_scale: float,
    num_scale: float,
    den_scale: float,
    pref_scale: float | None,
    x: np.ndarray,
) -> np.ndarray:
    """Terms c_j H_j(x/(2 sqrt(arg))) (sqrt(num)/(2 sqrt(den)))^j / j! [* prefactor].

    Returns the term matrix (n+1, len(x)).
    """
    n = coeffs.size - 1
    h = hermite_batch(n, x / (2.0 * math.sqrt(arg_scale)))
    g = math.sqrt(num_scale) / (2.0 * math.sqrt(den_scale))
    w = np.empty(n + 1)
    w[0] = 1.0
    for j in range(n):
        w[j + 1] = w[j] * g / (j + 1)
    terms = coeffs[:, None] * w[:, None] * h
    if pref_scale is not None:
        pref = np.exp(-(x * x) / (4.0 * pref_scale)) / (
            2.0 * math.sqrt(math.pi * pref_scale)
        )
        terms = terms * pref[None, :]
    if not np.all(np.isfinite(terms)):
        raise OverflowError("series terms overflowed double precision")
    return terms


def _even_series_terms(coeffs: np.ndarray, kappa0: float, ratio, x: np.ndarray) -> np.ndarray:
    """Terms kappa_j c_j for the even-only (C) variants; kappa_{j+1} = kappa_j ratio(j)."""
    n = coeffs.size - 1
    kappa = np.empty(n + 1)
    kappa[0] = kappa0
    for j in range(n):
        kappa[j + 1] = kappa[j] * ratio(j)
    terms = (kappa * coeffs)[:, None] * np.ones_like(x)[None, :]
    if not np.all(np.isfinite(terms)):
        raise OverflowError("series terms overflowed double precision")
    return terms


def _early_stop(terms: np.ndarray, abs_tol: float) -> np.ndarray:
    """Truncate the term matrix after EARLY_STOP_RUN consecutive tiny rows."""
    mags = np.max(np.abs(terms), axis=1)
    run = 0
    for j, m in enumerate(mags):
        run = run + 1 if m < abs_tol else 0
        if run >= EARLY_STOP_RUN:
            return terms[: j + 1]
    return terms


def _scales_direct(variant: str, params: KernelParams, mode: str):
    s = params.shifted
    if variant == "CD-A":
        return dict(arg=s, num=params.beta, den=s, pref=s)
    if variant == "CD-B":
        sigma = 2.0 * params.tau + params.beta
        return dict(arg=sigma, num=s, den=sigma, pref=sigma)
    if variant == "CD-C":
        if mode == "paper_literal":
            return dict(kappa0=1.0 / (2.0 * math.sqrt(s)), rho=-params.beta / (8.0 * s), fact="j")
        return dict(kappa0=1.0 / (2.0 * math.sqrt(math.pi * s)), rho=-params.beta / (4.0 * s), fact="j")
    raise ValueError(f"unknown direct variant {variant!r}")


def _scales_inverse(variant: str, params: KernelParams, mode: str):
    s = params.shifted
    if variant == "CI-A":
        return dict(arg=params.beta, num=s, den=params.beta, pref=params.beta)
    if variant == "CI-B":
        return dict(arg=s, num=s, den=params.beta, pref=None)
    if variant == "CI-C":
        if mode == "paper_literal":
            return dict(
                kappa0=1.0 / (2.0 * math.sqrt(math.pi * params.beta)),
                rho=-s / (8.0 * params.beta),
                fact="2j",
            )
        return dict(
            kappa0=1.0 / (2.0 * math.sqrt(math.pi * params.beta)),
            rho=-s / (4.0 * params.beta),
            fact="j",
        )
    raise ValueError(f"unknown inverse variant {variant!r}")


def _c_ratio(rho: float, fact: str):
    if fact == "j":
        return lambda j: rho / (j + 1)
    return lambda j: rho / ((2 * j + 1) * (2 * j + 2))  # 1/(2j)! updates


def _eval_terms(scales: dict, coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    if "kappa0" in scales:
        return _even_series_terms(coeffs, scales["kappa0"], _c_ratio(scales["rho"], scales["fact"]), x)
    return _hermite_series_terms(
        coeffs, scales["arg"], scales["num"], scales["den"], scales["pref"], x
    )


def _eval_series(scales, coeffs, x, abs_tol):
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    terms = _early_stop(_eval_terms(scales, coeffs, x_arr), abs_tol)
    values = np.sum(terms, axis=0)
    diags = []
    for col in range(x_arr.size):
        flagged, idx = _scan_divergence(np.abs(terms[:, col]))
        diags.append(DivergenceDiag(np.abs(terms[:, col]), flagged, idx))
    if np.ndim(x) == 0:
        return float(values[0]), diags[0]
    return values, diags


def cd_eval(
    variant: str,
    coeffs: np.ndarray,
    params: KernelParams,
    x,
    constants_mode: str = "oracle_validated",
    abs_tol: float = 1e-14,
):
    """Evaluate a truncated direct series; returns (value, diagnostics).

    CD-C coefficients are tied to the x they were computed for; pass the
    same point here.
    """
    _check_mode(constants_mode)
    return _eval_series(_scales_direct(variant, params, constants_mode), np.asarray(coeffs, float), x, abs_tol)


def ci_eval(
    variant: str,
    coeffs: np.ndarray,
    params: KernelParams,
    x,
    constants_mode: str = "oracle_validated",
    abs_tol: float = 1e-14,
):
    """Evaluate a truncated inverse series; returns (value, diagnostics)."""
    _check_mode(constants_mode)
    return _eval_series(_scales_inverse(variant, params, constants_mode), np.asarray(coeffs, float), x, abs_tol)


def _check_mode(mode: str) -> None:
    if mode not in CONSTANTS_MODES:
        raise ValueError(f"unknown constants_mode {mode!r}; choose from {CONSTANTS_MODES}")


# --- classical derivative-based inverse baseline -----------------------------

def _analytic_derivs_at_zero(profile, n: int) -> np.ndarray:
    """u^(j)(0) for Gaussian data, via H_j and the chain rule."""
    if isinstance(profile, Gaussian):
        root = 2.0 * math.sqrt(profile.width_a)
        y0 = -profile.center / root
        h = hermite_batch(n, y0)
        scale = profile.amplitude * math.exp(-(y0 * y0))
        out = np.empty(n + 1)
        p = 1.0
        for j in range(n + 1):
            out[j] = scale * p * h[j]
            p *= -1.0 / root
        return out
    if isinstance(profile, Mixture):
        return np.sum([_analytic_derivs_at_zero(g, n) for g in profile.components], axis=0)
    raise TypeError(
        "analytic derivatives are available for Gaussian data only; sample "
        "other profiles onto a grid first"
    )


def _fd_derivs_at_zero(data: Sampled1D, n: int) -> np.ndarray:
    """Central finite differences of orders 0..n at x = 0.

    Order j uses the minimal stencil of width 2*ceil(j/2)+1 at the raw grid
    spacing - deliberately unregularized so that noise amplification shows.
    """
    h = data.spacing
    i0 = int(round((0.0 - data.lo) / h))
    if not (0 <= i0 < data.n_nodes) or abs(data.nodes[i0]) > 0.25 * h:
        raise ValueError("sampled data must contain x = 0 as a grid node")
    vals = data.values
    out = np.empty(n + 1)
    out[0] = vals[i0]
    for j in range(1, n + 1):
        m = j // 2
        if j % 2 == 0:
            # 2m-th central difference over 2m+1 points
            if i0 - m < 0 or i0 + m >= data.n_nodes:
                raise ValueError(f"stencil for order {j} exceeds the grid")
            acc, binom = 0.0, 1.0
            for k in range(2 * m + 1):
                acc += ((-1.0) ** k) * binom * vals[i0 + m - k]
                binom *= (2 * m - k) / (k + 1)
            out[j] = acc / h ** (2 * m)
        else:
            # odd order: first central difference composed with the 2m-th
            if i0 - m - 1 < 0 or i0 + m + 1 >= data.n_nodes:
                raise ValueError(f"stencil for order {j} exceeds the grid")
            acc, binom = 0.0, 1.0
            for k in range(2 * m + 1):
                acc += ((-1.0) ** k) * binom * (vals[i0 + m - k + 1] - vals[i0 + m - k - 1])
                binom *= (2 * m - k) / (k + 1)
            out[j] = acc / (2.0 * h ** (2 * m + 1))
    if not np.all(np.isfinite(out)):
        raise OverflowError("finite-difference derivatives overflowed")
    return out


def ci_classical(u, tau: float, n: int, x, abs_tol: float = 1e-14):
    """Derivative-based inverse baseline.

    f(x) ~= sum_{j<=n} u^(j)(0) tau^{j/2} / j! * H_j(x/(2 sqrt(tau))).
    Derivatives come in closed form for Gaussian data and from raw central
    differences for sampled data.  Returns (value, diagnostics).
    """
    if not (tau > 0.0):
        raise ValueError(f"tau must be positive, got {tau}")
    if n < 0:
        raise ValueError("order must be non-negative")
    if isinstance(u, Sampled1D):
        derivs = _fd_derivs_at_zero(u, n)
    else:
        derivs = _analytic_derivs_at_zero(u, n)
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    hmat = hermite_batch(n, x_arr / (2.0 * math.sqrt(tau)))
    w = np.empty(n + 1)
    w[0] = 1.0
    root = math.sqrt(tau)
    for j in range(n):
        w[j + 1] = w[j] * root / (j + 1)
    terms = (derivs * w)[:, None] * hmat
    if not np.all(np.isfinite(terms)):
        raise OverflowError("classical series terms overflowed double precision")
    terms = _early_stop(terms, abs_tol)
    values = np.sum(terms, axis=0)
    diags = [
        DivergenceDiag(np.abs(terms[:, c]), *(_scan_divergence(np.abs(terms[:, c]))))
        for c in range(x_arr.size)
    ]
    if np.ndim(x) == 0:
        return float(values[0]), diags[0]
    return values, diags


# --- grid driver -------------------------------------------------------------

def solve_grid_line(
    variant: str,
    data,
    params: KernelParams | None,
    n: int,
    xs: np.ndarray,
    constants_mode: str = "oracle_validated",
    spec: QuadSpec = QuadSpec(),
    tau: float | None = None,
) -> tuple[np.ndarray, list[DivergenceDiag]]:
    """Evaluate one line variant on a grid, recomputing per-point coefficients
    where the variant requires it (CD-C / CI-C)."""
    xs = np.asarray(xs, dtype=float)
    if variant == "CI-classical":
        if tau is None:
            tau = params.tau if params is not None else None
        if tau is None:
            raise ValueError("CI-classical needs tau")
        return ci_classical(data, tau, n, xs)
    if params is None:
        raise ValueError(f"{variant} needs KernelParams")
    if variant in ("CD-A", "CD-B"):
        coeffs = cd_coeffs(variant, data, params, n, spec=spec)
        return cd_eval(variant, coeffs, params, xs, constants_mode)
    if variant in ("CI-A", "CI-B"):
        coeffs = ci_coeffs(variant, data, params, n, spec=spec)
        return ci_eval(variant, coeffs, params, xs, constants_mode)
    values = np.empty(xs.size)
    diags: list[DivergenceDiag] = []
    for i, xc in enumerate(xs):
        try:
            if variant == "CD-C":
                coeffs = cd_coeffs(variant, data, params, n, x_center=float(xc), spec=spec)
                val, diag = cd_eval(variant, coeffs, params, float(xc), constants_mode)
            elif variant == "CI-C":
                coeffs = ci_coeffs(variant, data, params, n, x_center=float(xc), spec=spec)
                val, diag = ci_eval(variant, coeffs, params, float(xc), constants_mode)
            else:
                raise ValueError(f"unknown line variant {variant!r}")
        except OverflowError as exc:
            raise OverflowError(f"{variant} at x = {xc:g}: {exc}") from exc
        values[i] = val
        diags.append(diag)
    return values, diags
