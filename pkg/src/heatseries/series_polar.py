"""Truncated radial-series solvers (polar coordinates, radially symmetric).

The same coefficient / evaluate / diagnose structure as the line module,
built on the even polynomials W_j and radial moments with the measure
xi d(xi) on [0, inf).  With s = tau + beta:

* PD-A (direct): moments xi W_j(xi/(2 sqrt(beta))), kernel prefactor at s.
* PD-B (direct): moments at sqrt(s), prefactor at 2*tau + beta.
* PD-C (direct): angular-averaged moments of W_j over the triangle radius
  sqrt(r^2 + xi^2 - 2 r xi cos(phi)) at scale sqrt(beta); r-dependent.
* PI-A / PI-B / PI-C (inverse): scale roles exchanged.  PI-B needs
  beta > tau: its prefactor lives at beta - tau.

The divergence diagnostic and constants_mode behave exactly as in the
Cartesian module; the published C-variant constants fail the oracle
certification by documented ratios (ERRATA.md).
"""

from __future__ import annotations

import math

import numpy as np

from .profiles import Sampled1D, profile_support
from .quad import FiniteInterval, QuadSpec, integrate_vec
from .specfun import KernelParams, w_poly_batch
from .series_cartesian import (
    CONSTANTS_MODES,
    DivergenceDiag,
    _early_stop,
    _scan_divergence,
)
from dataclasses import dataclass

__all__ = [
    "PD_VARIANTS",
    "PI_VARIANTS",
    "PolarSeriesSolution",
    "pd_coeffs",
    "pd_eval",
    "pi_coeffs",
    "pi_eval",
    "solve_grid_polar",
]

PD_VARIANTS = ("PD-A", "PD-B", "PD-C")
PI_VARIANTS = ("PI-A", "PI-B", "PI-C")

_ANGULAR_NODES_START = 64
_ANGULAR_NODES_MAX = 512


@dataclass
class PolarSeriesSolution:
    variant: str
    tau: float
    beta: float
    order_n: int
    coeffs: np.ndarray
    constants_mode: str = "oracle_validated"
    r_center: float = 0.0
    diagnostics: DivergenceDiag | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.size != self.order_n + 1:
            raise ValueError(
                f"coeffs must have length order_n + 1 = {self.order_n + 1}, got {self.coeffs.size}"
            )
        if not (self.beta > 0.0):
            raise ValueError("beta must be positive")
        if self.constants_mode not in CONSTANTS_MODES:
            raise ValueError(f"unknown constants_mode {self.constants_mode!r}")

    def evaluate(self, r):
        params = KernelParams(tau=self.tau, beta=self.beta)
        if self.variant in PD_VARIANTS:
            return pd_eval(self.variant, self.coeffs, params, r, self.constants_mode)
        if self.variant in PI_VARIANTS:
            return pi_eval(self.variant, self.coeffs, params, r, self.constants_mode)
        raise ValueError(f"cannot evaluate variant {self.variant!r} from a record")


def _radial_window(data, spec: QuadSpec) -> tuple[float, float]:
    lo, hi = profile_support(data, spec.truncation_radius_sigmas)
    return max(0.0, lo), hi


def _w_radial_moments(data, root: float, n: int, spec: QuadSpec) -> np.ndarray:
    """int_0^inf xi W_j(xi/(2 root)) data(xi) dxi for j = 0..n."""
    if n < 0:
        raise ValueError("order must be non-negative")
    lo, hi = _radial_window(data, spec)
    if lo >= hi:
        return np.zeros(n + 1)
    breakpoints = data.nodes if isinstance(data, Sampled1D) else None

    def integrand(xi):
        w = w_poly_batch(n, xi / (2.0 * root))
        return w * (xi * data(xi))[None, :]

    vals, _ = integrate_vec(integrand, FiniteInterval(lo, hi), spec, breakpoints=breakpoints)
    return vals


def _angular_average(n: int, r: float, xi: np.ndarray, root: float, rel_tol: float) -> np.ndarray:
    """int_0^pi W_j(sqrt(r^2 + xi^2 - 2 r xi cos phi)/(2 root)) dphi, batched.

    Fixed Gauss-Legendre rule on [0, pi], doubled until stable; the integrand
    is a polynomial of degree <= 2n in cos(phi), so the starting rule is
    already exact for n <= 63 and one doubling certifies it.
    """
    prev = None
    m = _ANGULAR_NODES_START
    while m <= _ANGULAR_NODES_MAX:
        nodes, weights = np.polynomial.legendre.leggauss(m)
        phi = 0.5 * math.pi * (nodes + 1.0)
        wts = 0.5 * math.pi * weights
        rad = np.sqrt(
            np.maximum(r * r + xi[None, :] ** 2 - 2.0 * r * xi[None, :] * np.cos(phi[:, None]), 0.0)
        )
        w = w_poly_batch(n, rad / (2.0 * root))  # (n+1, m, len(xi))
        cur = np.tensordot(wts, np.moveaxis(w, 1, 0), axes=([0], [0]))
        if prev is not None:
            scale = np.maximum(np.max(np.abs(cur), axis=1, keepdims=True), 1e-300)
            if np.max(np.abs(cur - prev) / scale) < rel_tol:
                return cur
        prev = cur
        m *= 2
    return prev


def _w_angular_moments(data, root: float, n: int, r: float, spec: QuadSpec) -> np.ndarray:
    lo, hi = _radial_window(data, spec)
    if lo >= hi:
        return np.zeros(n + 1)
    breakpoints = data.nodes if isinstance(data, Sampled1D) else None

    def integrand(xi):
        ang = _angular_average(n, r, xi, root, spec.rel_tol)
        return ang * (xi * data(xi))[None, :]

    vals, _ = integrate_vec(integrand, FiniteInterval(lo, hi), spec, breakpoints=breakpoints)
    return vals


def pd_coeffs(
    variant: str,
    f,
    params: KernelParams,
    n: int,
    r_center: float = 0.0,
    spec: QuadSpec = QuadSpec(),
) -> np.ndarray:
    """Direct radial moments f_j (r-dependent for PD-C)."""
    s = params.shifted
    if variant == "PD-A":
        return _w_radial_moments(f, math.sqrt(params.beta), n, spec)
    if variant == "PD-B":
        return _w_radial_moments(f, math.sqrt(s), n, spec)
    if variant == "PD-C":
        return _w_angular_moments(f, math.sqrt(params.beta), n, r_center, spec)
    raise ValueError(f"unknown direct polar variant {variant!r}")


def pi_coeffs(
    variant: str,
    u,
    params: KernelParams,
    n: int,
    r_center: float = 0.0,
    spec: QuadSpec = QuadSpec(),
) -> np.ndarray:
    """Inverse radial moments u_j; scales swapped versus pd_coeffs."""
    s = params.shifted
    if variant == "PI-A":
        return _w_radial_moments(u, math.sqrt(s), n, spec)
    if variant == "PI-B":
        return _w_radial_moments(u, math.sqrt(params.beta), n, spec)
    if variant == "PI-C":
        return _w_angular_moments(u, math.sqrt(s), n, r_center, spec)
    raise ValueError(f"unknown inverse polar variant {variant!r}")


# --- evaluation ---------------------------------------------------------------

def _radial_series_terms(
    coeffs: np.ndarray,
    arg_scale: float,
    ratio: float,
    pref_scale: float,
    r: np.ndarray,
) -> np.ndarray:
    """Terms c_j W_j(r/(2 sqrt(arg))) ratio^j j!^2/(2j)!^2 * kernel prefactor."""
    n = coeffs.size - 1
    wmat = w_poly_batch(n, r / (2.0 * math.sqrt(arg_scale)))
    w = np.empty(n + 1)
    w[0] = 1.0
    for j in range(n):
        w[j + 1] = w[j] * ratio / (2.0 * (2 * j + 1)) ** 2
    pref = np.exp(-(r * r) / (4.0 * pref_scale)) / (2.0 * pref_scale)
    terms = (coeffs * w)[:, None] * wmat * pref[None, :]
    if not np.all(np.isfinite(terms)):
        raise OverflowError("series terms overflowed double precision")
    return terms


def _scales_pd(variant: str, params: KernelParams, mode: str):
    s = params.shifted
    if variant == "PD-A":
        return dict(arg=s, ratio=params.beta / s, pref=s)
    if variant == "PD-B":
        sigma = 2.0 * params.tau + params.beta
        return dict(arg=sigma, ratio=s / sigma, pref=sigma)
    if variant == "PD-C":
        if mode == "paper_literal":
            return dict(kappa0=math.sqrt(math.pi) / (2.0 * math.sqrt(s)), rho=-params.beta / s, fact="gamma")
        return dict(kappa0=1.0 / (2.0 * math.pi * s), rho=-params.beta / s, fact="half")
    raise ValueError(f"unknown direct polar variant {variant!r}")


def _scales_pi(variant: str, params: KernelParams, mode: str):
    s = params.shifted
    if variant == "PI-A":
        return dict(arg=params.beta, ratio=s / params.beta, pref=params.beta)
    if variant == "PI-B":
        sigma = params.beta - params.tau
        if sigma <= 0.0:
            raise ValueError(
                f"PI-B requires beta > tau (the shift must exceed the horizon); "
                f"got beta={params.beta}, tau={params.tau}"
            )
        return dict(arg=sigma, ratio=params.beta / sigma, pref=sigma)
    if variant == "PI-C":
        if mode == "paper_literal":
            return dict(kappa0=math.sqrt(math.pi) / (2.0 * math.sqrt(params.tau)), rho=-s / params.tau, fact="gamma")
        return dict(kappa0=1.0 / (2.0 * math.pi * params.beta), rho=-s / params.beta, fact="half")
    raise ValueError(f"unknown inverse polar variant {variant!r}")


def _polar_c_ratio(rho: float, fact: str):
    # "half": kappa_{j+1}/kappa_j = rho j!/(2j)! updates -> rho/(2(2j+1))
    # "gamma": published Gamma(j+1/2) form -> rho/(4(j+1))
    if fact == "half":
        return lambda j: rho / (2.0 * (2 * j + 1))
    return lambda j: rho / (4.0 * (j + 1))


def _eval_polar(scales: dict, coeffs: np.ndarray, r, abs_tol: float):
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r_arr < 0.0):
        raise ValueError("radius must be non-negative")
    if "kappa0" in scales:
        n = coeffs.size - 1
        kappa = np.empty(n + 1)
        kappa[0] = scales["kappa0"]
        ratio = _polar_c_ratio(scales["rho"], scales["fact"])
        for j in range(n):
            kappa[j + 1] = kappa[j] * ratio(j)
        terms = (kappa * coeffs)[:, None] * np.ones_like(r_arr)[None, :]
        if not np.all(np.isfinite(terms)):
            raise OverflowError("series terms overflowed double precision")
    else:
        terms = _radial_series_terms(coeffs, scales["arg"], scales["ratio"], scales["pref"], r_arr)
    terms = _early_stop(terms, abs_tol)
    values = np.sum(terms, axis=0)
    diags = [
        DivergenceDiag(np.abs(terms[:, c]), *(_scan_divergence(np.abs(terms[:, c]))))
        for c in range(r_arr.size)
    ]
    if np.ndim(r) == 0:
        return float(values[0]), diags[0]
    return values, diags


def pd_eval(
    variant: str,
    coeffs: np.ndarray,
    params: KernelParams,
    r,
    constants_mode: str = "oracle_validated",
    abs_tol: float = 1e-14,
):
    """Evaluate a truncated direct polar series; returns (value, diagnostics)."""
    if constants_mode not in CONSTANTS_MODES:
        raise ValueError(f"unknown constants_mode {constants_mode!r}")
    return _eval_polar(_scales_pd(variant, params, constants_mode), np.asarray(coeffs, float), r, abs_tol)


def pi_eval(
    variant: str,
    coeffs: np.ndarray,
    params: KernelParams,
    r,
    constants_mode: str = "oracle_validated",
    abs_tol: float = 1e-14,
):
    """Evaluate a truncated inverse polar series; returns (value, diagnostics)."""
    if constants_mode not in CONSTANTS_MODES:
        raise ValueError(f"unknown constants_mode {constants_mode!r}")
    return _eval_polar(_scales_pi(variant, params, constants_mode), np.asarray(coeffs, float), r, abs_tol)


def solve_grid_polar(
    variant: str,
    data,
    params: KernelParams,
    n: int,
    rs: np.ndarray,
    constants_mode: str = "oracle_validated",
    spec: QuadSpec = QuadSpec(),
) -> tuple[np.ndarray, list[DivergenceDiag]]:
    """Evaluate one polar variant on a grid of radii."""
    rs = np.asarray(rs, dtype=float)
    if variant in ("PD-A", "PD-B"):
        coeffs = pd_coeffs(variant, data, params, n, spec=spec)
        return pd_eval(variant, coeffs, params, rs, constants_mode)
    if variant in ("PI-A", "PI-B"):
        coeffs = pi_coeffs(variant, data, params, n, spec=spec)
        return pi_eval(variant, coeffs, params, rs, constants_mode)
    values = np.empty(rs.size)
    diags: list[DivergenceDiag] = []
    for i, rc in enumerate(rs):
        try:
            if variant == "PD-C":
                coeffs = pd_coeffs(variant, data, params, n, r_center=float(rc), spec=spec)
                val, diag = pd_eval(variant, coeffs, params, float(rc), constants_mode)
            elif variant == "PI-C":
                coeffs = pi_coeffs(variant, data, params, n, r_center=float(rc), spec=spec)
                val, diag = pi_eval(variant, coeffs, params, float(rc), constants_mode)
            else:
                raise ValueError(f"unknown polar variant {variant!r}")
        except OverflowError as exc:
            raise OverflowError(f"{variant} at r = {rc:g}: {exc}") from exc
        values[i] = val
        diags.append(diag)
    return values, diags
