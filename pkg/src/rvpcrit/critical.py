"""Closed-form algebra mapping the exponent beta to the critical constant.

For beta in (3/2, inf) the minimizing phase-space density reduces to a
rescaled standard polytrope of index n = (3 beta - 2)/(beta - 1), and the
critical constant follows from the polytrope's first zero xi_n and slope
there.  This module collects the index maps, the semilinear coefficient
c(beta), the rescaling constants, the support radius R_beta, both
formulas for C_beta, the lower/upper bounds, the convex-hull improvement
of the upper bound, and the endpoint/asymptotic expressions near
beta = 3/2 and beta = infinity.

All functions are pure; grid sweeps may run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import NumericsError, Tolerances
from .polytrope import Polytrope, solve_polytrope

__all__ = [
    "ConsistencyError",
    "ScalingConstants",
    "CriticalReport",
    "EXACT_MIN_BETA",
    "n_of_beta",
    "beta_of_n",
    "c_of_beta",
    "scaling_constants",
    "critical_constant",
    "bounds_kz",
    "improved_upper_bound",
    "improved_bound_plateau",
    "critical_at_three_halves",
    "critical_at_infinity",
    "asymptotic_critical",
    "asymptotic_radius",
    "asymptotic_first_zero",
    "critical_report",
]

# Below this exponent the first zero grows so large that direct integration
# is not worthwhile; the near-critical asymptotics take over.
EXACT_MIN_BETA = 1.505

_PI2 = math.pi * math.pi
# Value of the common lower bound base ((3/8)^3 * 15/16) = 405/8192.
_LOWER_BASE = 405.0 / 8192.0


class ConsistencyError(NumericsError):
    """Two routes to the same quantity disagree beyond tolerance."""


def n_of_beta(beta):
    """Polytropic index n(beta) = (3 beta - 2)/(beta - 1); 3 at infinity."""
    beta = float(beta)
    if math.isinf(beta):
        return 3.0
    if beta <= 1.0:
        raise ValueError(f"index map requires beta > 1, got {beta}")
    return (3.0 * beta - 2.0) / (beta - 1.0)


def beta_of_n(n):
    """Inverse index map beta(n) = (n - 2)/(n - 3); n = 3 maps to infinity."""
    n = float(n)
    if n == 3.0:
        return math.inf
    if not 3.0 < n <= 5.0:
        raise ValueError(f"inverse index map requires n in (3, 5] or n = 3, got {n}")
    return (n - 2.0) / (n - 3.0)


def c_of_beta(beta):
    """Semilinear coefficient c(beta) = 32 pi^2 (beta-1)^3 / (beta (2beta-1)(3beta-2))."""
    beta = float(beta)
    if math.isinf(beta):
        return 16.0 * _PI2 / 3.0
    if beta <= 1.0:
        raise ValueError(f"c(beta) requires beta > 1, got {beta}")
    bm1 = beta - 1.0
    return 32.0 * _PI2 * bm1**3 / (beta * (2.0 * beta - 1.0) * (3.0 * beta - 2.0))


def _require_finite_range(beta):
    beta = float(beta)
    if math.isinf(beta):
        raise ValueError("use the dedicated infinity endpoint for beta = inf")
    if not beta > 1.5:
        raise ValueError(f"the generic pipeline requires beta > 3/2, got {beta}")
    return beta

def _check_index(beta, p: Polytrope):
    n = n_of_beta(beta)
    if abs(p.n - n) > 1e-9 * max(1.0, abs(n)):
        raise ConsistencyError(
            f"polytrope index {p.n} does not match n(beta) = {n} for beta = {beta}"
        )
    return n


def _exp_or_inf(x):
    return math.exp(x) if x < 709.0 else math.inf


@dataclass(frozen=True)
class ScalingConstants:
    """Rescaling data tying the standard polytrope to the minimizer.

    ``log_A_n`` and ``log_R_beta`` stay finite even when the direct values
    overflow for very large beta; downstream formulas use the logs.
    """

    n: float
    c_beta: float
    alpha_n: float
    A_n: float
    R_beta: float
    log_A_n: float
    log_R_beta: float


def scaling_constants(beta, p: Polytrope):
    """Compute (n, c, alpha_n, A_n, R_beta) from a solved polytrope.

    alpha_n = c^(1/(n-1)) fixes the ODE coefficient; the dilation
    A_n = (-xi^2 theta' / alpha)^(2 beta - 1) follows from the surface
    slope condition phi'(R) = -1/R^2, and R_beta = xi_n / A_n, equivalently
    R_beta = xi_n (-xi^2 theta')^(1-2beta) c^(beta-1).
    """
    beta = _require_finite_range(beta)
    n = _check_index(beta, p)
    c = c_of_beta(beta)
    s = p.slope_product
    log_c = math.log(c)
    log_s = math.log(s)
    log_alpha = log_c * (beta - 1.0) / (2.0 * beta - 1.0)
    alpha = math.exp(log_alpha)
    log_A = (2.0 * beta - 1.0) * (log_s - log_alpha)
    log_R = math.log(p.xi_n) + (1.0 - 2.0 * beta) * log_s + (beta - 1.0) * log_c
    return ScalingConstants(
        n=n,
        c_beta=c,
        alpha_n=alpha,
        A_n=_exp_or_inf(log_A),
        R_beta=_exp_or_inf(log_R),
        log_A_n=log_A,
        log_R_beta=log_R,
    )


def _dual_formulas(beta, p: Polytrope):
    """C_beta by the support-radius route and by the Lane-Emden-data route."""
    beta = _require_finite_range(beta)
    sc = scaling_constants(beta, p)
    log_num = math.log(beta) - math.log(2.0 * beta - 3.0)
    if math.isfinite(sc.R_beta):
        c_simple = (beta / (sc.R_beta * (2.0 * beta - 3.0))) ** (1.0 / beta)
    else:
        c_simple = math.exp((log_num - sc.log_R_beta) / beta)
    # The cumbersome form, assembled in log space: overflow-safe for the
    # (-xi^2 theta')^(2beta-1) and c^(beta-1) factors at large beta.
    log_cumb = (
        math.log(beta)
        + (2.0 * beta - 1.0) * math.log(p.slope_product)
        - math.log(2.0 * beta - 3.0)
        - math.log(p.xi_n)
        - (beta - 1.0) * math.log(sc.c_beta)
    ) / beta
    return c_simple, math.exp(log_cumb)


def critical_constant(beta, p: Polytrope):
    """The critical constant C_beta = (beta / (R_beta (2 beta - 3)))^(1/beta).

    Evaluates both the support-radius form and the Lane-Emden-data form and
    requires them to agree to a relative 1e-10 (a disagreement signals a
    polytrope or algebra bug).
    """
    c_simple, c_cumb = _dual_formulas(beta, p)
    if abs(c_simple - c_cumb) > 1e-10 * c_simple:
        raise ConsistencyError(
            f"C_beta formulas disagree at beta = {beta}: {c_simple} vs {c_cumb}"
        )
    return c_simple


def bounds_kz(beta):
    """Known lower/upper bounds for C_beta, valid for beta >= 3/2.

    lower = ((3/8)^3 15/16)^(1 - 1/beta);
    upper = 45/(8 pi^2) (8 pi^(5/2) Gamma(beta) /
            ((1+2b)(2+2b)(3+2b) Gamma(beta+3/2)))^(1/beta).
    Both endpoints coincide with the explicit constant at beta = 3/2; the
    gamma-function ratio is evaluated with log-gamma so large beta is safe.
    """
    beta = float(beta)
    if math.isinf(beta):
        return _LOWER_BASE, 45.0 / (8.0 * _PI2)
    if beta < 1.5:
        raise ValueError(f"bounds require beta >= 3/2, got {beta}")
    lower = _LOWER_BASE ** (1.0 - 1.0 / beta)
    return lower, _upper_kz(beta)


def _upper_kz(beta):
    log_inner = (
        math.log(8.0)
        + 2.5 * math.log(math.pi)
        + math.lgamma(beta)
        - math.log((1.0 + 2.0 * beta) * (2.0 + 2.0 * beta) * (3.0 + 2.0 * beta))
        - math.lgamma(beta + 1.5)
    )
    return 45.0 / (8.0 * _PI2) * math.exp(log_inner / beta)


def _golden_minimize(f, lo, hi, tol=1e-11):
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


@lru_cache(maxsize=1)
def improved_bound_plateau():
    """Location and value of the upper bound's minimum, ``(beta*, u*)``.

    The upper bound decreases, bottoms out, then increases towards
    45/(8 pi^2); since C_beta itself is decreasing, the bound stays valid
    when frozen at its minimum beyond beta*.  A coarse scan brackets the
    minimum and golden-section refines it.
    """
    grid = 1.5 + np.logspace(-4, math.log10(10.5), 600)
    vals = np.array([_upper_kz(b) for b in grid])
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    return _golden_minimize(_upper_kz, lo, hi)


def _lower_convex_envelope(x, y):
    """Vertices of the lower convex hull of the points (x_i, y_i)."""
    hx: list[float] = []
    hy: list[float] = []
    for px, py in zip(x, y):
        while len(hx) >= 2 and (
            (hx[-1] - hx[-2]) * (py - hy[-2]) - (hy[-1] - hy[-2]) * (px - hx[-2])
        ) <= 0.0:
            hx.pop()
            hy.pop()
        hx.append(float(px))
        hy.append(float(py))
    return np.array(hx), np.array(hy)


def improved_upper_bound(betas):
    """Convex-hull improvement of the upper bound on a grid of exponents.

    Freezes the bound at its minimum beyond the minimizer beta* and takes
    the lower convex envelope of the resulting curve; returns the envelope
    evaluated at the input grid points.
    """
    b = np.asarray(betas, dtype=float)
    if b.ndim != 1 or b.size < 50:
        raise ValueError(f"grid too coarse: need at least 50 points, got {b.size}")
    if np.any(np.diff(b) <= 0.0):
        raise ValueError("grid must be strictly increasing")
    if b[0] < 1.5 - 1e-12:
        raise ValueError("grid must start at or above beta = 3/2")
    beta_star, u_star = improved_bound_plateau()
    u = np.array([_upper_kz(x) for x in b])
    v = np.where(b <= beta_star, u, u_star)
    hx, hy = _lower_convex_envelope(b, v)
    return np.interp(b, hx, hy)


@lru_cache(maxsize=1)
def _canonical_envelope():
    grid = np.concatenate(([1.5], 1.5 + np.logspace(-6, math.log10(10.5), 480)))
    beta_star, u_star = improved_bound_plateau()
    vals = np.array([_upper_kz(b) for b in grid])
    vals = np.where(grid <= beta_star, vals, u_star)
    return _lower_convex_envelope(grid, vals)


def _improved_at(beta):
    hx, hy = _canonical_envelope()
    if math.isinf(beta) or beta >= hx[-1]:
        return float(hy[-1])
    return float(np.interp(beta, hx, hy))


def critical_at_three_halves():
    """The explicit endpoint constant (3/8) (15/16)^(1/3)."""
    return 0.375 * (15.0 / 16.0) ** (1.0 / 3.0)


def critical_at_infinity(p3: Polytrope):
    """C_infinity = 3 (-xi_3^2 theta'_3)^2 / (16 pi^2) from the n = 3 polytrope."""
    if abs(p3.n - 3.0) > 1e-9:
        raise ConsistencyError(f"the infinity endpoint needs the n = 3 polytrope, got n = {p3.n}")
    s = p3.slope_product
    return 3.0 * s * s / (16.0 * _PI2)


def asymptotic_first_zero(n):
    """Near-critical growth of the first zero, 16(n+1)/(pi sqrt(3) (5-n))."""
    n = float(n)
    if not 0.0 <= n < 5.0:
        raise ValueError(f"first-zero asymptotics need 0 <= n < 5, got {n}")
    return 16.0 * (n + 1.0) / (math.pi * math.sqrt(3.0) * (5.0 - n))


def asymptotic_radius(beta):
    """Near-critical support radius
    (16/(3 pi)) ((4b-3)/(2b-3)) (32 pi^2 (b-1)^3 / (3b(2b-1)(3b-2)))^(b-1)."""
    beta = float(beta)
    if math.isinf(beta) or not beta > 1.5:
        raise ValueError(f"radius asymptotics need finite beta > 3/2, got {beta}")
    base = c_of_beta(beta) / 3.0
    return (
        16.0
        / (3.0 * math.pi)
        * (4.0 * beta - 3.0)
        / (2.0 * beta - 3.0)
        * base ** (beta - 1.0)
    )


def asymptotic_critical(beta):
    """Near-critical expansion of C_beta; exact at the endpoint beta = 3/2.

    C_beta ~ (3 pi/16 * beta/(4b-3))^(1/beta)
             * (3b(2b-1)(3b-2)/(32 pi^2 (b-1)^3))^(1-1/beta).
    """
    beta = float(beta)
    if math.isinf(beta) or beta < 1.5:
        raise ValueError(f"critical asymptotics need finite beta >= 3/2, got {beta}")
    first = (3.0 * math.pi / 16.0) * beta / (4.0 * beta - 3.0)
    second = 3.0 / c_of_beta(beta)
    return first ** (1.0 / beta) * second ** (1.0 - 1.0 / beta)


@dataclass(frozen=True)
class CriticalReport:
    """Everything computed for one exponent.

    ``source`` records provenance: "exact" (solved polytrope), "asymptotic"
    (near-critical expansion, beta < 1.505) or "endpoint" (beta = 3/2 or
    infinity).
    """

    beta: float
    n: float
    xi_n: float
    slope: float
    slope_product: float
    c_beta: float
    alpha_n: float
    A_n: float
    R_beta: float
    C_beta: float
    lower_kz: float
    upper_kz: float
    upper_improved: float
    source: str


def critical_report(beta, tol=None):
    """Full critical-constant report for one exponent (inf accepted)."""
    tol = tol if tol is not None else Tolerances()
    beta = float(beta)
    if beta < 1.5:
        raise ValueError(
            f"C_beta = 0 for beta < 3/2; no report is produced for beta = {beta}"
        )
    lower, upper = bounds_kz(beta)
    improved = _improved_at(beta)

    if math.isinf(beta):
        p3 = solve_polytrope(3.0, tol)
        c = c_of_beta(beta)
        alpha = math.sqrt(c)
        return CriticalReport(
            beta=beta, n=3.0, xi_n=p3.xi_n, slope=p3.slope_at_zero,
            slope_product=p3.slope_product, c_beta=c, alpha_n=alpha,
            A_n=math.inf, R_beta=math.inf,
            C_beta=critical_at_infinity(p3),
            lower_kz=lower, upper_kz=upper, upper_improved=improved,
            source="endpoint",
        )
    if beta == 1.5:
        c = c_of_beta(beta)
        alpha = c**0.25
        s = math.sqrt(3.0)
        return CriticalReport(
            beta=beta, n=5.0, xi_n=math.inf, slope=0.0, slope_product=s,
            c_beta=c, alpha_n=alpha, A_n=(s / alpha) ** 2,
            R_beta=math.inf, C_beta=critical_at_three_halves(),
            lower_kz=lower, upper_kz=upper, upper_improved=improved,
            source="endpoint",
        )
    if beta < EXACT_MIN_BETA:
        n = n_of_beta(beta)
        c = c_of_beta(beta)
        xi = asymptotic_first_zero(n)
        r = asymptotic_radius(beta)
        alpha = c ** ((beta - 1.0) / (2.0 * beta - 1.0))
        return CriticalReport(
            beta=beta, n=n, xi_n=xi, slope=-math.sqrt(3.0) / (xi * xi),
            slope_product=math.sqrt(3.0), c_beta=c, alpha_n=alpha,
            A_n=xi / r, R_beta=r, C_beta=asymptotic_critical(beta),
            lower_kz=lower, upper_kz=upper, upper_improved=improved,
            source="asymptotic",
        )

    p = solve_polytrope(n_of_beta(beta), tol)
    sc = scaling_constants(beta, p)
    return CriticalReport(
        beta=beta, n=sc.n, xi_n=p.xi_n, slope=p.slope_at_zero,
        slope_product=p.slope_product, c_beta=sc.c_beta, alpha_n=sc.alpha_n,
        A_n=sc.A_n, R_beta=sc.R_beta, C_beta=critical_constant(beta, p),
        lower_kz=lower, upper_kz=upper, upper_improved=improved,
        source="exact",
    )
