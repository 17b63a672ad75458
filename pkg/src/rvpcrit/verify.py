"""Independent quadrature checks on the reconstructed minimizer.

The minimizer's spatial potential is a rescaled polytrope,
phi(r) = alpha^(-1) A^(2/(n-1)) theta(A r) on [0, R], and every
phase-space functional of the minimizer reduces to a radial integral of a
power of phi (the momentum integrals are exact).  Each check below
recomputes one such integral by adaptive quadrature over the dense
profile and compares it against the closed form it must equal:

* mass          total mass 4 pi int rho r^2 dr = 1,
* lbeta         the L^beta norm identity,
* kinetic       the ultra-relativistic kinetic energy identity,
* potential     the interaction energy via the spherical-shell potential
                (an independent double quadrature),
* pohozaev      the Dirichlet-integral identity, both variants,
* exterior      K(r) = 1/r outside the support,
* boundary      phi'(R) = -1/R^2.

Residuals are dimensionless relative deviations; at default tolerances
the thresholds leave two orders of magnitude of headroom over observed
kernel error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .critical import ConsistencyError, c_of_beta, n_of_beta, scaling_constants
from .numerics import Tolerances, integrate_adaptive
from .polytrope import Polytrope, solve_polytrope

__all__ = [
    "MinimizerProfile",
    "VerificationReport",
    "build_minimizer_profile",
    "potential_K",
    "check_mass",
    "check_lbeta_norm",
    "check_kinetic",
    "check_potential",
    "check_pohozaev",
    "check_exterior",
    "check_boundary",
    "ode_residual",
    "run_full_verification",
    "THRESHOLD_FACTORS",
]

_4PI = 4.0 * math.pi

# Residual thresholds as multiples of tol.rel.  At the default
# tol.rel = 1e-10 these give {1e-6, 1e-6, 1e-6, 1e-5, 1e-6, 1e-7, 1e-6}:
# looser for the double-quadrature potential check, tighter for the
# exterior check whose only error source is the mass quadrature.
THRESHOLD_FACTORS = {
    "mass": 1e4,
    "lbeta": 1e4,
    "kinetic": 1e4,
    "potential": 1e5,
    "pohozaev": 1e4,
    "exterior": 1e3,
    "boundary": 1e4,
}


@dataclass(frozen=True)
class MinimizerProfile:
    """Rescaled physical minimizer profile on [0, R_beta].

    phi is the potential (zero at the support boundary), rho the spatial
    density rho = (c/4pi) phi_+^n; the phase-space density itself is
    represented implicitly through phi.
    """

    beta: float
    n: float
    c_beta: float
    R_beta: float
    amplitude: float  # phi(0) = alpha^(-1) A^(2/(n-1)) = (s^2/c)^(beta-1)
    dilation: float   # A = xi_n / R_beta
    polytrope: Polytrope

    def phi(self, r):
        return self.amplitude * self.polytrope.theta(self.dilation * np.asarray(r, float))

    def dphi(self, r):
        return (
            self.amplitude
            * self.dilation
            * self.polytrope.dtheta(self.dilation * np.asarray(r, float))
        )

    def d2phi(self, r):
        return (
            self.amplitude
            * self.dilation**2
            * self.polytrope.d2theta(self.dilation * np.asarray(r, float))
        )

    def phi_pos(self, r):
        return np.maximum(self.phi(r), 0.0)

    def rho(self, r):
        return self.c_beta / _4PI * self.phi_pos(r) ** self.n


def build_minimizer_profile(beta, p: Polytrope, s=None):
    """Assemble the minimizer profile from a solved polytrope.

    ``s`` are the scaling constants; recomputed when omitted.  Inconsistent
    (beta, polytrope, scaling) triples raise :class:`ConsistencyError`.
    """
    beta = float(beta)
    if s is None:
        s = scaling_constants(beta, p)
    n = n_of_beta(beta)
    if abs(p.n - n) > 1e-9 * max(1.0, n):
        raise ConsistencyError(f"polytrope index {p.n} does not match beta = {beta}")
    log_r = (
        math.log(p.xi_n)
        + (1.0 - 2.0 * beta) * math.log(p.slope_product)
        + (beta - 1.0) * math.log(s.c_beta)
    )
    if not math.isfinite(s.R_beta) or abs(log_r - s.log_R_beta) > 1e-9:
        raise ConsistencyError("scaling constants are inconsistent with the polytrope")
    amplitude = (p.slope_product**2 / s.c_beta) ** (beta - 1.0)
    return MinimizerProfile(
        beta=beta,
        n=n,
        c_beta=s.c_beta,
        R_beta=s.R_beta,
        amplitude=amplitude,
        dilation=p.xi_n / s.R_beta,
        polytrope=p,
    )


def potential_K(m: MinimizerProfile, r, tol=None):
    """Spherical-shell potential K(r) = (4pi/r) int_0^r rho s^2 ds
    + 4pi int_r^R rho s ds (the tail vanishes beyond the support)."""
    tol = tol if tol is not None else Tolerances()
    r = float(r)
    if r <= 0.0:
        raise ValueError(f"the shell potential needs r > 0, got {r}")
    inner = integrate_adaptive(lambda x: m.rho(x) * x * x, 0.0, min(r, m.R_beta), tol)
    outer = 0.0
    if r < m.R_beta:
        outer = integrate_adaptive(lambda x: m.rho(x) * x, r, m.R_beta, tol)
    return _4PI * (inner / r + outer)


def check_mass(m: MinimizerProfile, tol=None):
    """|4 pi int rho r^2 dr - 1|: the unit-mass normalization."""
    tol = tol if tol is not None else Tolerances()
    total = _4PI * integrate_adaptive(
        lambda r: m.rho(r) * r * r, 0.0, m.R_beta, tol
    )
    return abs(total - 1.0)


def _phi_power_integral(m: MinimizerProfile, tol):
    """4 pi int phi_+^((4b-3)/(b-1)) r^2 dr, shared by several identities."""
    expo = (4.0 * m.beta - 3.0) / (m.beta - 1.0)
    return _4PI * integrate_adaptive(
        lambda r: m.phi_pos(r) ** expo * r * r, 0.0, m.R_beta, tol
    )


def check_lbeta_norm(m: MinimizerProfile, tol=None):
    """Relative residual of ||f||_beta^beta = beta / (R (2 beta - 3))."""
    tol = tol if tol is not None else Tolerances()
    b = m.beta
    coeff = (
        8.0 * math.pi * (b - 1.0) ** 3
        / ((2.0 * b - 1.0) * (3.0 * b - 2.0) * (4.0 * b - 3.0))
    )
    value = coeff / _4PI * _phi_power_integral(m, tol)
    target = b / (m.R_beta * (2.0 * b - 3.0))
    return abs(value - target) / target


def check_kinetic(m: MinimizerProfile, tol=None):
    """Relative residual of E_p^u = 3 (beta - 1) / (R (2 beta - 3))."""
    tol = tol if tol is not None else Tolerances()
    b = m.beta
    coeff = (
        24.0 * math.pi * (b - 1.0) ** 4
        / (b * (2.0 * b - 1.0) * (3.0 * b - 2.0) * (4.0 * b - 3.0))
    )
    value = coeff / _4PI * _phi_power_integral(m, tol)
    target = 3.0 * (b - 1.0) / (m.R_beta * (2.0 * b - 3.0))
    return abs(value - target) / target


def check_potential(m: MinimizerProfile, tol=None):
    """Relative residual of -E_q = 3 (beta - 1) / (R (2 beta - 3)).

    Uses the shell formula for K at every outer abscissa rather than the
    Green-identity shortcut, so the double quadrature is independent of
    the identity being verified.
    """
    tol = tol if tol is not None else Tolerances()

    def integrand(r):
        rv = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.zeros_like(rv)
        pos = rv > 0.0
        ks = np.array([potential_K(m, x, tol) for x in rv[pos]])
        out[pos] = m.rho(rv[pos]) * ks * rv[pos] ** 2
        return out if np.ndim(r) else float(out[0])

    value = 0.5 * _4PI * integrate_adaptive(integrand, 0.0, m.R_beta, tol)
    target = 3.0 * (m.beta - 1.0) / (m.R_beta * (2.0 * m.beta - 3.0))
    return abs(value - target) / target


def check_pohozaev(m: MinimizerProfile, tol=None):
    """Residual of the dilation identity: both the Dirichlet integral and
    c(beta) times the phi-power integral must equal
    (4 pi / R) (4 beta - 3)/(2 beta - 3)."""
    tol = tol if tol is not None else Tolerances()
    dirichlet = _4PI * integrate_adaptive(
        lambda r: m.dphi(r) ** 2 * r * r, 0.0, m.R_beta, tol
    )
    semilinear = m.c_beta * _phi_power_integral(m, tol)
    target = _4PI / m.R_beta * (4.0 * m.beta - 3.0) / (2.0 * m.beta - 3.0)
    return max(abs(dirichlet - target), abs(semilinear - target)) / target


def check_exterior(m: MinimizerProfile, radii=None, tol=None):
    """max over sample radii >= R of |K(r) - 1/r| relative to 1/r."""
    tol = tol if tol is not None else Tolerances()
    if radii is None:
        radii = m.R_beta * np.array([1.0, 2.0, 10.0])
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.any(radii < m.R_beta * (1.0 - 1e-12)):
        raise ValueError("exterior samples must lie at or beyond R_beta")
    worst = 0.0
    for r in radii:
        worst = max(worst, abs(potential_K(m, float(r), tol) * r - 1.0))
    return worst


def check_boundary(m: MinimizerProfile):
    """|R^2 phi'(R) + 1|: the surface slope condition phi'(R) = -1/R^2."""
    return abs(m.R_beta**2 * float(m.dphi(m.R_beta)) + 1.0)


def ode_residual(m: MinimizerProfile, r):
    """Pointwise residual of phi'' + (2/r) phi' + c phi_+^n = 0,
    normalized by the semilinear term c phi_+^n."""
    rv = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rv <= 0.0) or np.any(rv >= m.R_beta):
        raise ValueError("sample radii must lie strictly inside (0, R_beta)")
    source = m.c_beta * m.phi_pos(rv) ** m.n
    res = m.d2phi(rv) + 2.0 / rv * m.dphi(rv) + source
    out = np.abs(res) / source
    return out if np.ndim(r) else float(out[0])


@dataclass(frozen=True)
class VerificationReport:
    """Named relative residuals with their pass thresholds."""

    beta: float
    residuals: dict[str, float]
    thresholds: dict[str, float]

    @property
    def passed_checks(self) -> dict[str, bool]:
        return {k: v <= self.thresholds[k] for k, v in self.residuals.items()}

    @property
    def passed(self) -> bool:
        return all(self.passed_checks.values())

    def to_json_dict(self) -> dict:
        return {
            "beta": self.beta,
            "residuals": dict(self.residuals),
            "pass": self.passed,
        }


def run_full_verification(beta, tol=None):
    """Solve, rescale and run every identity check for one exponent.

    The polytrope is solved two orders of magnitude tighter than ``tol``
    and the quadratures two orders looser, so the reported residuals
    measure quadrature discretization, not modeling error; thresholds
    scale with ``tol.rel`` accordingly.
    """
    tol = tol if tol is not None else Tolerances()
    beta = float(beta)
    if math.isinf(beta) or beta < 1.505:
        raise ValueError(
            f"verification runs on finite beta >= 1.505 (validity needs beta > 3/2, "
            f"and nearer the endpoint the support radius diverges); got {beta}"
        )
    solver_tol = Tolerances(
        rel=max(tol.rel * 1e-2, 1e-13),
        abs=max(tol.abs * 1e-2, 1e-15),
        max_steps=tol.max_steps,
    )
    quad_tol = Tolerances(
        rel=min(tol.rel * 1e2, 1e-3),
        abs=min(tol.abs * 1e2, 1e-3),
        max_steps=tol.max_steps,
    )
    p = solve_polytrope(n_of_beta(beta), solver_tol)
    sc = scaling_constants(beta, p)
    m = build_minimizer_profile(beta, p, sc)
    residuals = {
        "mass": check_mass(m, quad_tol),
        "lbeta": check_lbeta_norm(m, quad_tol),
        "kinetic": check_kinetic(m, quad_tol),
        "potential": check_potential(m, quad_tol),
        "pohozaev": check_pohozaev(m, quad_tol),
        "exterior": check_exterior(m, tol=quad_tol),
        "boundary": check_boundary(m),
    }
    thresholds = {k: f * tol.rel for k, f in THRESHOLD_FACTORS.items()}
    return VerificationReport(beta=beta, residuals=residuals, thresholds=thresholds)
