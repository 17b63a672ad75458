"""Standard Lane-Emden polytropes.

Solves theta'' + (2/xi) theta' + theta_+^n = 0 with theta(0) = 1,
theta'(0) = 0 for index 0 <= n < 5, locating the first zero xi_n and the
slope there.  The coordinate singularity at the origin is avoided by
starting from a series expansion at a small radius; the returned profile
is evaluable on all of [0, xi_n] (series below the start radius, dense
integrator output above).  Closed forms for n = 0, 1, 5 are provided for
cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import DenseTrajectory, Tolerances, integrate_adaptive, integrate_ivp

__all__ = [
    "Polytrope",
    "solve_polytrope",
    "theta_closed_form",
    "series_start",
    "mass_integral",
    "SERIES_RADIUS",
]

SERIES_RADIUS = 1e-3
_SQRT3 = math.sqrt(3.0)


def _series_terms(n, xi):
    """theta, theta', theta'' of the origin expansion, term by term.

    theta = 1 - xi^2/6 + n xi^4/120 - n(8n-5) xi^6/15120 + O(xi^8); the
    truncation error at xi = 1e-3 is far below machine epsilon.
    """
    c2 = -1.0 / 6.0
    c4 = n / 120.0
    c6 = -n * (8.0 * n - 5.0) / 15120.0
    x2 = xi * xi
    theta = 1.0 + x2 * (c2 + x2 * (c4 + x2 * c6))
    dtheta = xi * (2.0 * c2 + x2 * (4.0 * c4 + x2 * 6.0 * c6))
    d2theta = 2.0 * c2 + x2 * (12.0 * c4 + x2 * 30.0 * c6)
    return theta, dtheta, d2theta


def series_start(n, xi_start):
    """Origin expansion of the standard polytrope at a small radius.

    Returns ``(theta, dtheta)``.  Valid for 0 < xi_start <= 0.01 where the
    truncated terms are below 1e-16.
    """
    if not 0.0 < xi_start <= 0.01:
        raise ValueError(f"series start must satisfy 0 < xi <= 0.01, got {xi_start}")
    theta, dtheta, _ = _series_terms(float(n), float(xi_start))
    return theta, dtheta


def theta_closed_form(n, xi):
    """Exact (theta, theta') for the three explicitly solvable indices.

    n = 0: 1 - xi^2/6;  n = 1: sin(xi)/xi;  n = 5: (1 + xi^2/3)^(-1/2).
    Accepts scalars or arrays; the removable singularity of the n = 1
    profile at xi = 0 evaluates to (1, 0).
    """
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("xi must be non-negative")
    if n == 0:
        theta = 1.0 - x * x / 6.0
        dtheta = -x / 3.0
    elif n == 1:
        # Maclaurin branch avoids the 0/0 at the origin and the
        # cancellation in (xi cos xi - sin xi)/xi^2 for tiny xi.
        small = np.abs(x) <= 0.01
        xs = np.where(small, 0.0, x)
        x2 = x * x
        theta_s = 1.0 + x2 * (-1.0 / 6.0 + x2 * (1.0 / 120.0 - x2 / 5040.0))
        dtheta_s = x * (-1.0 / 3.0 + x2 * (1.0 / 30.0 - x2 / 840.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            theta_d = np.sin(xs) / xs
            dtheta_d = (xs * np.cos(xs) - np.sin(xs)) / (xs * xs)
        theta = np.where(small, theta_s, theta_d)
        dtheta = np.where(small, dtheta_s, dtheta_d)
    elif n == 5:
        root = np.sqrt(1.0 + x * x / 3.0)
        theta = 1.0 / root
        dtheta = -(x / 3.0) / root**3
    else:
        raise ValueError(f"closed forms exist only for n in {{0, 1, 5}}, got {n}")
    if np.ndim(xi) == 0:
        return float(theta), float(dtheta)
    return theta, dtheta


def _xi_upper_estimate(n):
    # First-zero growth estimate 16(n+1)/(pi sqrt(3) (5-n)); generous
    # multiple plus a floor covers every index in [0, 5).
    return max(10.0, 3.0 * 16.0 * (n + 1.0) / (math.pi * _SQRT3 * (5.0 - n)))


@dataclass(frozen=True)
class Polytrope:
    """A solved standard polytrope.

    ``profile`` holds the dense (theta, theta') trajectory on
    [series_radius, xi_n]; the evaluation methods extend it down to the
    origin through the series expansion.  Instances are immutable and safe
    to share between threads.
    """

    n: float
    xi_n: float
    slope_at_zero: float
    profile: DenseTrajectory
    series_radius: float = SERIES_RADIUS

    @property
    def slope_product(self) -> float:
        """-xi_n^2 theta'(xi_n), the mass-like combination (positive)."""
        return -self.xi_n * self.xi_n * self.slope_at_zero

    def _split(self, xi):
        x = np.asarray(xi, dtype=float)
        scalar = x.ndim == 0
        xv = np.atleast_1d(x).astype(float)
        if np.any(xv < 0.0):
            raise ValueError("xi must be non-negative")
        small = xv < self.series_radius
        return xv, small, scalar

    def theta(self, xi):
        """theta(xi) anywhere on [0, xi_n] (may be ~ -1e-13 right at xi_n)."""
        xv, small, scalar = self._split(xi)
        out = np.empty_like(xv)
        if small.any():
            out[small] = _series_terms(self.n, xv[small])[0]
        if (~small).any():
            out[~small] = self.profile.value(xv[~small], component=0)
        return float(out[0]) if scalar else out

    def dtheta(self, xi):
        """theta'(xi) anywhere on [0, xi_n]."""
        xv, small, scalar = self._split(xi)
        out = np.empty_like(xv)
        if small.any():
            out[small] = _series_terms(self.n, xv[small])[1]
        if (~small).any():
            out[~small] = self.profile.value(xv[~small], component=1)
        return float(out[0]) if scalar else out

    def d2theta(self, xi):
        """theta''(xi) via a quintic Hermite reconstruction.

        Node curvature data comes for free from the ODE right-hand side, so
        the reconstruction is C^2 and one order more accurate than
        differentiating the cubic dense output.
        """
        xv, small, scalar = self._split(xi)
        out = np.empty_like(xv)
        if small.any():
            out[small] = _series_terms(self.n, xv[small])[2]
        big = ~small
        if big.any():
            out[big] = self._quintic_second(xv[big])
        return float(out[0]) if scalar else out

    def _quintic_second(self, xv):
        traj = self.profile
        idx, tv, _ = traj._locate(xv)
        x0 = traj.nodes[idx]
        h = traj.nodes[idx + 1] - x0
        s = (tv - x0) / h
        y0 = traj.states[idx, 0]
        y1 = traj.states[idx + 1, 0]
        m0 = traj.states[idx, 1]
        m1 = traj.states[idx + 1, 1]
        c0 = traj.derivs[idx, 1]
        c1 = traj.derivs[idx + 1, 1]
        b0 = s * (-60.0 + s * (180.0 - 120.0 * s))
        b1 = s * (-36.0 + s * (96.0 - 60.0 * s))
        b2 = 1.0 + s * (-9.0 + s * (18.0 - 10.0 * s))
        b4 = s * (-24.0 + s * (84.0 - 60.0 * s))
        b5 = s * (3.0 + s * (-12.0 + 10.0 * s))
        num = (
            b0 * (y0 - y1)
            + h * (b1 * m0 + b4 * m1)
            + h * h * (b2 * c0 + b5 * c1)
        )
        return num / (h * h)


def solve_polytrope(n, tol=None, max_step=math.inf):
    """Solve the Lane-Emden IVP for index ``n`` up to the first zero.

    Integration starts from the series expansion at ``SERIES_RADIUS`` and
    stops at the first sign change of theta, located on the dense
    interpolant.  The positive part theta_+ is used in the right-hand side
    so fractional indices never see a negative base while the event
    locator brackets the zero.

    Raises ``ValueError`` for n >= 5 (no finite first zero; use
    ``theta_closed_form(5, .)`` or the near-critical asymptotics instead).
    """
    n = float(n)
    if n < 0.0:
        raise ValueError(f"polytropic index must be non-negative, got {n}")
    if n >= 5.0:
        raise ValueError(
            f"n = {n} has no finite first zero; use theta_closed_form(5, xi) "
            "or the near-critical asymptotics"
        )
    tol = tol if tol is not None else Tolerances()

    def rhs(x, y):
        th = y[0] if y[0] > 0.0 else 0.0
        return np.array([y[1], -2.0 * y[1] / x - th**n])

    theta0, dtheta0 = series_start(n, SERIES_RADIUS)
    result = integrate_ivp(
        rhs,
        np.array([theta0, dtheta0]),
        SERIES_RADIUS,
        _xi_upper_estimate(n),
        tol=tol,
        event=lambda x, y: y[0],
        max_step=max_step,
    )
    if result.event_time is None:
        raise ValueError(f"no first zero found for n = {n} within the search span")
    traj = result.trajectory
    xi_n = float(result.event_time)
    slope = float(traj.states[-1, 1])
    if not slope < 0.0:
        raise ValueError(f"non-negative slope {slope} at the first zero for n = {n}")
    return Polytrope(n=n, xi_n=xi_n, slope_at_zero=slope, profile=traj)


def mass_integral(p, tol=None):
    """Integral of theta^(n+1) r^2 over [0, xi_n] for a solved polytrope.

    This is the numerator of the first-zero identity; negative interpolant
    noise at the surface is clamped before the fractional power.
    """
    tol = tol if tol is not None else Tolerances()
    power = p.n + 1.0

    def integrand(r):
        th = np.maximum(p.theta(r), 0.0)
        return th**power * r * r

    return integrate_adaptive(integrand, 0.0, p.xi_n, tol)
