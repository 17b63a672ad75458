"""Double-precision numerical kernels.

Three building blocks used everywhere else in the package:

* :func:`integrate_ivp` -- explicit embedded Runge-Kutta 5(4) integration
  (Dormand-Prince pair) with proportional-integral step control, cubic
  Hermite dense output and sign-change event detection,
* :func:`find_root_bracketed` -- Brent-style bracketed root refinement
  (inverse quadratic interpolation safeguarded by bisection),
* :func:`integrate_adaptive` -- adaptive Simpson quadrature with a
  Richardson error estimate and batched integrand evaluation.

All kernels are pure functions of their inputs and hold no shared mutable
state, so they are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerances",
    "DenseTrajectory",
    "IvpResult",
    "NumericsError",
    "BudgetError",
    "StiffnessError",
    "BracketError",
    "integrate_ivp",
    "find_root_bracketed",
    "integrate_adaptive",
]

_EPS = float(np.finfo(float).eps)


class NumericsError(Exception):
    """Base class for numerical-kernel failures."""


class BudgetError(NumericsError):
    """A step or subdivision budget was exhausted before convergence."""


class StiffnessError(NumericsError):
    """The step size underflowed, typically near a singularity."""


class BracketError(NumericsError):
    """A root bracket does not contain a sign change."""


@dataclass(frozen=True)
class Tolerances:
    """Error targets shared by all kernels.

    ``rel`` and ``abs`` are the usual mixed relative/absolute local error
    targets; ``max_steps`` bounds integrator steps, quadrature evaluations
    and root-refinement iterations.
    """

    rel: float = 1e-10
    abs: float = 1e-12
    max_steps: int = 10**6

    def __post_init__(self) -> None:
        if not (self.rel > 0.0 and math.isfinite(self.rel)):
            raise ValueError(f"rel must be positive and finite, got {self.rel!r}")
        if not (self.abs > 0.0 and math.isfinite(self.abs)):
            raise ValueError(f"abs must be positive and finite, got {self.abs!r}")
        if int(self.max_steps) < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps!r}")


class DenseTrajectory:
    """Dense output of an ODE solution.

    Stores strictly increasing node abscissae together with the state and
    state derivative at every node.  Evaluation between nodes uses a cubic
    Hermite interpolant per component, so values and slopes at the nodes
    are reproduced exactly and the interpolant is C^1 across the whole
    span.  Instances are immutable once built and may be shared between
    threads.
    """

    def __init__(self, nodes, states, derivs):
        nodes = np.ascontiguousarray(nodes, dtype=float)
        states = np.ascontiguousarray(states, dtype=float)
        derivs = np.ascontiguousarray(derivs, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a trajectory needs at least two nodes")
        if states.ndim != 2 or states.shape[0] != nodes.size:
            raise ValueError("states must have one row per node")
        if derivs.shape != states.shape:
            raise ValueError("derivs must have the same shape as states")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing")
        self.nodes = nodes
        self.states = states
        self.derivs = derivs
        self.nodes.setflags(write=False)
        self.states.setflags(write=False)
        self.derivs.setflags(write=False)

    @property
    def t0(self) -> float:
        return float(self.nodes[0])

    @property
    def t_end(self) -> float:
        return float(self.nodes[-1])

    @property
    def n_components(self) -> int:
        return self.states.shape[1]

    def _locate(self, t):
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        tv = np.atleast_1d(arr).astype(float, copy=True)
        span = self.t_end - self.t0
        slack = 1e-9 * span + 1e-12
        if np.any(tv < self.t0 - slack) or np.any(tv > self.t_end + slack):
            raise ValueError(
                f"evaluation point outside trajectory range [{self.t0}, {self.t_end}]"
            )
        np.clip(tv, self.t0, self.t_end, out=tv)
        idx = np.searchsorted(self.nodes, tv, side="right") - 1
        np.clip(idx, 0, self.nodes.size - 2, out=idx)
        return idx, tv, scalar

    def _pieces(self, idx, tv, component):
        x0 = self.nodes[idx]
        h = self.nodes[idx + 1] - x0
        s = (tv - x0) / h
        if component is None:
            h = h[:, None]
            s = s[:, None]
            y0 = self.states[idx]
            y1 = self.states[idx + 1]
            f0 = self.derivs[idx]
            f1 = self.derivs[idx + 1]
        else:
            y0 = self.states[idx, component]
            y1 = self.states[idx + 1, component]
            f0 = self.derivs[idx, component]
            f1 = self.derivs[idx + 1, component]
        return h, s, y0, f0, y1, f1

    def value(self, t, component=None):
        """Interpolated state at ``t`` (full vector or one component)."""
        idx, tv, scalar = self._locate(t)
        h, s, y0, f0, y1, f1 = self._pieces(idx, tv, component)
        oms = 1.0 - s
        h00 = (1.0 + 2.0 * s) * oms * oms
        h10 = s * oms * oms
        h01 = s * s * (3.0 - 2.0 * s)
        h11 = s * s * (s - 1.0)
        out = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
        return out[0] if scalar else out

    def slope(self, t, component=None):
        """Derivative of the interpolant at ``t``."""
        idx, tv, scalar = self._locate(t)
        h, s, y0, f0, y1, f1 = self._pieces(idx, tv, component)
        d00 = 6.0 * s * (s - 1.0) / h
        d10 = 3.0 * s * s - 4.0 * s + 1.0
        d01 = -d00
        d11 = 3.0 * s * s - 2.0 * s
        out = d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1
        return out[0] if scalar else out

    __call__ = value


@dataclass(frozen=True)
class IvpResult:
    """Integration result: the dense trajectory and, when an event fired,
    the abscissa where it crossed zero (the trajectory ends there)."""

    trajectory: DenseTrajectory
    event_time: float | None


# Dormand-Prince 5(4) tableau.  The propagated solution is the fifth-order
# one; the last row of _DP_A equals its weights so stage 7 is the FSAL
# evaluation at (t + h, y_new).
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
# PI step control (Hairer's beta = 0.08 stabilisation for a 5th order pair).
_PI_ALPHA = 0.7 / 5.0
_PI_BETA = 0.4 / 5.0


def _eval_rhs(rhs, t, y, shape):
    f = np.asarray(rhs(t, y), dtype=float)
    if f.shape != shape:
        raise ValueError(f"rhs returned shape {f.shape}, expected {shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError(f"rhs returned a non-finite value at t={t}")
    return f


def _initial_step(rhs, t0, y0, f0, tol, h_cap):
    scale = tol.abs + tol.rel * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, h_cap)
    y1 = y0 + h0 * f0
    f1 = _eval_rhs(rhs, t0 + h0, y1, y0.shape)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    dm = max(d1, d2)
    h1 = (0.01 / dm) ** 0.2 if dm > 1e-15 else max(1e-6, h0 * 1e-3)
    return min(100.0 * h0, h1, h_cap)


def integrate_ivp(rhs, y0, t0, t_max, tol=None, event=None, max_step=math.inf):
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t_max``.

    Local error per step is bounded by ``tol`` through the embedded
    fourth-order estimate.  If ``event`` (a scalar function of ``(t, y)``)
    changes sign across an accepted step, the crossing is located on the
    dense interpolant of that step with :func:`find_root_bracketed`,
    integration stops there, and the crossing abscissa is returned.

    Raises :class:`BudgetError` when ``tol.max_steps`` is exhausted,
    :class:`StiffnessError` when the step size underflows and
    :class:`ValueError` when the right-hand side produces non-finite
    values.
    """
    tol = tol if tol is not None else Tolerances()
    t0 = float(t0)
    t_max = float(t_max)
    if not t_max > t0:
        raise ValueError(f"t_max ({t_max}) must exceed t0 ({t0})")
    if not max_step > 0.0:
        raise ValueError("max_step must be positive")
    y = np.array(y0, dtype=float, copy=True)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("y0 must be a non-empty 1-d state vector")

    f = _eval_rhs(rhs, t0, y, y.shape)
    g_prev = float(event(t0, y)) if event is not None else 0.0

    nodes = [t0]
    states = [y.copy()]
    derivs = [f.copy()]
    event_time: float | None = None

    h = _initial_step(rhs, t0, y, f, tol, min(max_step, t_max - t0))
    err_prev = 1e-4
    t = t0
    n_steps = 0
    ks = np.empty((7, y.size))

    while True:
        remaining = t_max - t
        tiny = 16.0 * _EPS * max(abs(t), 1.0)
        if remaining <= tiny:
            break
        if n_steps >= tol.max_steps:
            raise BudgetError(f"step budget {tol.max_steps} exhausted at t={t}")
        n_steps += 1

        h = min(h, max_step, remaining)
        if h < tiny:
            raise StiffnessError(f"step size underflow (h={h}) at t={t}")

        ks[0] = f
        for i in range(1, 7):
            yi = y + h * (np.asarray(_DP_A[i]) @ ks[:i])
            ks[i] = _eval_rhs(rhs, t + _DP_C[i] * h, yi, y.shape)
        y_new = y + h * (np.asarray(_DP_A[6]) @ ks[:6])
        # FSAL: stage 7 already evaluated rhs at (t + h, y_new).
        err_vec = h * (_DP_E @ ks)
        scale = tol.abs + tol.rel * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))

        if err > 1.0:
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-0.2))
            continue

        t_new = t + h
        f_new = ks[6].copy()

        if event is not None:
            g_new = float(event(t_new, y_new))
            crossed = (g_prev > 0.0 > g_new) or (g_prev < 0.0 < g_new)
            if crossed or (g_prev != 0.0 and g_new == 0.0):
                if g_new == 0.0:
                    t_e, y_e, f_e = t_new, y_new, f_new
                else:
                    step = DenseTrajectory(
                        [t, t_new], [y, y_new], [ks[0].copy(), f_new]
                    )
                    t_e = find_root_bracketed(
                        lambda x: float(event(x, step.value(x))), t, t_new, tol
                    )
                    y_e = step.value(t_e)
                    f_e = _eval_rhs(rhs, t_e, y_e, y.shape)
                if t_e > t:
                    nodes.append(t_e)
                    states.append(np.asarray(y_e, dtype=float))
                    derivs.append(f_e)
                event_time = float(t_e)
                break
            g_prev = g_new

        nodes.append(t_new)
        states.append(y_new.copy())
        derivs.append(f_new)
        t, y, f = t_new, y_new, f_new

        if err == 0.0:
            factor = _MAX_FACTOR
        else:
            factor = _SAFETY * err ** (-_PI_ALPHA) * err_prev**_PI_BETA
            factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        err_prev = max(err, 1e-10)
        h *= factor

    traj = DenseTrajectory(np.array(nodes), np.array(states), np.array(derivs))
    return IvpResult(trajectory=traj, event_time=event_time)


def find_root_bracketed(g, a, b, tol=None):
    """Refine a root of ``g`` inside the bracket ``[a, b]``.

    ``g(a)`` and ``g(b)`` must have opposite signs.  Uses Brent's method
    (inverse quadratic interpolation / secant, safeguarded by bisection),
    so convergence is guaranteed.  Returns ``x`` once ``|g(x)| <= tol.abs``
    or the bracket has shrunk below ``tol.rel * |x| + tol.abs``.
    """
    tol = tol if tol is not None else Tolerances()
    a = float(a)
    b = float(b)
    fa = float(g(a))
    fb = float(g(b))
    if not (math.isfinite(fa) and math.isfinite(fb)):
        raise ValueError("g is not finite at the bracket endpoints")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise BracketError(f"no sign change on [{a}, {b}]: g(a)={fa}, g(b)={fb}")

    c, fc = a, fa
    d = e = b - a
    for _ in range(int(tol.max_steps)):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        half_tol = 0.5 * (tol.rel * abs(b) + tol.abs) + 2.0 * _EPS * abs(b)
        m = 0.5 * (c - b)
        if abs(m) <= half_tol or fb == 0.0 or abs(fb) <= tol.abs:
            return b
        if abs(e) < half_tol or abs(fa) <= abs(fb):
            d = e = m
        else:
            s = fb / fa
            if a == c:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            s_prev, e = e, d
            if 2.0 * p < 3.0 * m * q - abs(half_tol * q) and p < abs(0.5 * s_prev * q):
                d = p / q
            else:
                d = e = m
        a, fa = b, fb
        if abs(d) > half_tol:
            b += d
        elif m > 0.0:
            b += half_tol
        else:
            b -= half_tol
        fb = float(g(b))
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            d = e = b - a
    raise BudgetError(f"root refinement did not converge in {tol.max_steps} iterations")


class _BatchIntegrand:
    """Adapter that evaluates an integrand on abscissa arrays, falling back
    to a scalar loop for integrands that cannot broadcast."""

    def __init__(self, h):
        self._h = h
        self._vectorized: bool | None = None

    def __call__(self, xs: np.ndarray) -> np.ndarray:
        if self._vectorized is not False:
            try:
                out = np.asarray(self._h(xs), dtype=float)
                if out.shape == xs.shape:
                    self._vectorized = True
                    self._check(out, xs)
                    return out
            except (TypeError, ValueError):
                pass
            self._vectorized = False
        out = np.fromiter((float(self._h(float(x))) for x in xs), float, count=xs.size)
        self._check(out, xs)
        return out

    @staticmethod
    def _check(out: np.ndarray, xs: np.ndarray) -> None:
        if not np.all(np.isfinite(out)):
            bad = xs[~np.isfinite(out)]
            raise ValueError(f"integrand is not finite at x={bad[:3]}")


def integrate_adaptive(h, a, b, tol=None):
    """Integrate ``h`` over ``[a, b]`` by adaptive Simpson subdivision.

    The error on each subinterval is estimated by Richardson comparison of
    the one-panel and two-panel Simpson rules and the accepted value keeps
    the extrapolated correction, so polynomials up to degree three are
    integrated exactly (up to roundoff).  The integrand is evaluated in
    batches: it may accept numpy arrays, and scalar-only callables are
    handled with a fallback loop.
    """
    tol = tol if tol is not None else Tolerances()
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration endpoints must be finite")
    if a > b:
        raise ValueError(f"need a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0

    fn = _BatchIntegrand(h)
    span = b - a
    first = fn(np.array([a, 0.5 * (a + b), b]))
    n_eval = 3

    # Pending subintervals: left edge, width, f(left), f(mid), f(right),
    # one-panel Simpson value.
    x0 = np.array([a])
    w = np.array([span])
    f0 = first[:1]
    f1 = first[1:2]
    f2 = first[2:]
    s_one = w / 6.0 * (f0 + 4.0 * f1 + f2)

    accepted_parts: list[float] = []
    accepted = 0.0

    while x0.size:
        if n_eval > tol.max_steps:
            raise BudgetError(
                f"quadrature budget {tol.max_steps} exhausted with "
                f"{x0.size} intervals pending"
            )
        xl = x0 + 0.25 * w
        xr = x0 + 0.75 * w
        fl = fn(xl)
        fr = fn(xr)
        n_eval += xl.size + xr.size

        s_left = w / 12.0 * (f0 + 4.0 * fl + f1)
        s_right = w / 12.0 * (f1 + 4.0 * fr + f2)
        s_two = s_left + s_right
        better = s_two + (s_two - s_one) / 15.0
        err = np.abs(s_two - s_one) / 15.0

        estimate = accepted + float(np.sum(better))
        budget = max(tol.abs, tol.rel * abs(estimate))
        ok = err <= budget * (w / span)
        # Intervals too narrow to split further are accepted as-is.
        exhausted = w <= 8.0 * np.spacing(np.abs(x0) + w)
        take = ok | exhausted

        if np.any(take):
            part = float(np.sum(better[take]))
            accepted_parts.append(part)
            accepted += part

        keep = ~take
        x0 = np.concatenate([x0[keep], x0[keep] + 0.5 * w[keep]])
        f0, f1, f2, s_one = (
            np.concatenate([f0[keep], f1[keep]]),
            np.concatenate([fl[keep], fr[keep]]),
            np.concatenate([f1[keep], f2[keep]]),
            np.concatenate([s_left[keep], s_right[keep]]),
        )
        w = np.concatenate([0.5 * w[keep], 0.5 * w[keep]])

    return math.fsum(accepted_parts)
