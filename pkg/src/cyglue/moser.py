"""Radial primitives and Moser flow charts over cone annuli.

Closed perturbations of the cone Kaehler form are trivialized in three
steps: a radial homotopy produces a primitive with controlled decay, a
pointwise linear solve produces the time-dependent vector field, and a
fixed-step fourth-order flow produces the chart. The pullback residual of
the integrated chart is the module's own quality measure, so every run
reports it.

Form fields are plain callables mapping sample points (..., 6) to KForm
batches over the same leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad_vec

from .analysis import fd_exterior_derivative
from .errors import (ConfigInvalid, Degenerate, DomainEscape, NotClosed,
                     RateOutOfRange)
from .forms import KForm, LinearMap, contract, form_norm, pullback, wedge

__all__ = [
    "SplitForm", "RadialPrimitive", "MoserResult",
    "split_form", "radial_primitive", "moser_vector_field", "moser_integrate",
]

_DEGENERACY_RATIO = 1e-6


@dataclass(frozen=True)
class SplitForm:
    """Radial splitting eta = eta0 + dr ^ eta1 at common sample points.

    eta0 is tangential (contracting the unit radial direction gives zero)
    and eta1 carries the dr part. closure_residual is the finite-difference
    |d eta| that gated the split; compatibility_residual is the identity
    |d eta0 - dr ^ d eta1| linking the radial derivative of eta0 to the
    link differential of eta1.
    """

    eta0: KForm
    eta1: KForm
    closure_residual: float
    compatibility_residual: float

    def __iter__(self):
        return iter((self.eta0, self.eta1))


@dataclass(frozen=True)
class RadialPrimitive:
    """Primitive sigma with d sigma = eta from a radial homotopy.

    direction "from_zero" integrates along rays from the tip (conical
    data, positive rate); "from_infinity" integrates from the far end (AC
    data, rate below -degree). The evaluator maps points to KForm batches
    of one degree less than the input form.
    """

    evaluator: Callable
    degree: int
    decay_rate: float
    direction: str

    def __call__(self, x):
        return self.evaluator(x)


@dataclass(frozen=True)
class MoserResult:
    """Integrated Moser chart on a sample grid."""

    points: np.ndarray
    images: np.ndarray
    pullback_residual: float
    shrunk_domain: tuple
    steps: int
    halvings: int


def _radial_split(eta: KForm, x: np.ndarray):
    x = np.asarray(x, float)
    r = np.linalg.norm(x, axis=-1)
    xhat = x / r[..., None]
    eta1 = contract(xhat, eta)
    dr = KForm(eta.dim, 1, xhat)
    eta0 = eta - wedge(dr, eta1)
    return eta0, eta1, dr


def split_form(eta_field, x: np.ndarray, h=None, tol: float = 1e-6) -> SplitForm:
    """Split a closed form field into tangential and radial parts at x.

    Closedness is probed by finite differences at the sample points and
    the split components must satisfy d eta0 = dr ^ d eta1, the ambient
    form of the statement that the radial derivative of eta0 balances the
    link differential of eta1.
    """
    x = np.asarray(x, float)
    eta = eta_field(x)
    d_eta = fd_exterior_derivative(eta_field, x, h)
    closure = float(np.max(np.abs(d_eta.coeffs)))
    if closure > tol:
        raise NotClosed(f"|d eta| = {closure:.3e} exceeds {tol:.1e}")
    eta0, eta1, _ = _radial_split(eta, x)

    def eta0_field(y):
        return _radial_split(eta_field(y), y)[0]

    def eta1_dr_field(y):
        e0, e1, dr = _radial_split(eta_field(y), y)
        return wedge(dr, e1)

    d0 = fd_exterior_derivative(eta0_field, x, h)
    d1 = fd_exterior_derivative(eta1_dr_field, x, h)
    compat = float(np.max(np.abs(d0.coeffs + d1.coeffs)))
    return SplitForm(eta0=eta0, eta1=eta1, closure_residual=closure,
                     compatibility_residual=compat)


def _default_check_points(seed: int = 0, n: int = 6, radius: float = 1.0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 6))
    return radius * v / np.linalg.norm(v, axis=-1, keepdims=True)


def radial_primitive(eta_field, direction: str, decay_rate: float,
                     check_points: Optional[np.ndarray] = None,
                     fd_tol: float = 1e-6, fd_h=None,
                     quad_tol: float = 1e-12) -> RadialPrimitive:
    """Primitive of a closed form field by integrating contractions along
    rays: sigma(x) = int_0^1 u^(k-1) [iota_x eta](u x) du, or minus the
    same integral over [1, inf) for data decaying from infinity.

    Rate hypotheses: from_zero needs decay_rate > 0; from_infinity needs
    decay_rate + degree < 0, which for 2-forms is the rate < -2 condition
    of the asymptotically conical statement. Rates in [-2, 0) are refused,
    there is no convergent variant to integrate.
    """
    if direction not in ("from_zero", "from_infinity"):
        raise ConfigInvalid(f"unknown direction {direction!r}")
    pts = _default_check_points() if check_points is None else \
        np.asarray(check_points, float)
    probe = eta_field(pts)
    k = probe.degree
    if direction == "from_zero":
        if decay_rate <= 0:
            raise RateOutOfRange("from_zero needs a positive conical rate")
    else:
        if decay_rate + k >= 0:
            raise RateOutOfRange(
                f"from_infinity needs rate < {-k} for degree {k}, "
                f"got {decay_rate}")
    d_eta = fd_exterior_derivative(eta_field, pts, fd_h)
    resid = float(np.max(np.abs(d_eta.coeffs)))
    if resid > fd_tol:
        raise NotClosed(f"|d eta| = {resid:.3e} exceeds {fd_tol:.1e}")

    def sigma(x):
        x = np.asarray(x, float)

        def integrand(u):
            return (u ** (k - 1)) * contract(x, eta_field(u * x)).coeffs

        if direction == "from_zero":
            val, _ = quad_vec(integrand, 0.0, 1.0,
                              epsabs=quad_tol, epsrel=1e-12)
        else:
            val, _ = quad_vec(integrand, 1.0, np.inf,
                              epsabs=quad_tol, epsrel=1e-12)
            val = -val
        return KForm(6, k - 1, val)

    return RadialPrimitive(evaluator=sigma, degree=k,
                           decay_rate=decay_rate, direction=direction)


def moser_vector_field(sigma: KForm, omega_t: KForm) -> np.ndarray:
    """Solve sigma + iota(X) omega_t = 0 pointwise for X.

    Both forms are batches at common sample points; with the first-slot
    interior product the equation reads W^T X = -sigma for the component
    matrix W of omega_t. Near-singular W (smallest singular value under
    1e-6 of the largest) raises Degenerate, the caller's cue to shrink
    the domain.
    """
    W = omega_t.as_tensor()
    sv = np.linalg.svd(W, compute_uv=False)
    ratio = sv[..., -1] / sv[..., 0]
    if np.any(ratio < _DEGENERACY_RATIO):
        raise Degenerate(
            f"omega_t singular value ratio {float(np.min(ratio)):.2e}")
    X = np.linalg.solve(np.swapaxes(W, -1, -2), -sigma.coeffs[..., None])
    return X[..., 0]


def _sample_grid(r_lo, r_hi, n_dirs, n_radii, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n_dirs, 6))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    t, _ = np.polynomial.legendre.leggauss(n_radii)
    r = 0.5 * (r_hi - r_lo) * t + 0.5 * (r_hi + r_lo)
    return (r[:, None, None] * v[None, :, :]).reshape(-1, 6)


def moser_integrate(cone, eta_field, decay_rate: float, r_bounds: tuple,
                    steps: int = 64, n_dirs: int = 8, n_radii: int = 4,
                    seed: int = 0, direction: str = "from_zero",
                    jac_h: float = 1e-5, max_halvings: int = 8,
                    fd_tol: float = 1e-6, fd_h=None,
                    quad_tol: float = 1e-12) -> MoserResult:
    """Integrate the Moser flow of omega_t = omega_V + t eta from t=0 to 1
    and report the pullback residual sup |psi_1^*(omega_V + eta) - omega_V|.

    The flow runs on a seeded grid of directions times Gauss radii inside
    r_bounds, all trajectories advanced together by the classical
    fourth-order scheme with fixed steps. Jacobians of the chart come from
    central differences of neighbouring trajectories. A trajectory leaving
    the chart annulus triggers a retry on a radially shrunk grid, at most
    max_halvings times, after which DomainEscape propagates.
    """
    a, b = float(r_bounds[0]), float(r_bounds[1])
    if not (0.0 < a < b):
        raise ConfigInvalid("need 0 < r_min < r_max")
    prim = radial_primitive(eta_field, direction, decay_rate,
                            check_points=_sample_grid(a, b, 4, 2, seed),
                            fd_tol=fd_tol, fd_h=fd_h, quad_tol=quad_tol)

    def omega_v(y):
        return cone.fields_at(y).omega

    def velocity(t, y):
        om_t = omega_v(y) + eta_field(y) * t
        return moser_vector_field(prim(y), om_t)

    lo_bound, hi_bound = 0.5 * a, b

    def flow(y0):
        y = np.array(y0, float)
        dt = 1.0 / steps
        for n in range(steps):
            t = n * dt
            k1 = velocity(t, y)
            k2 = velocity(t + 0.5 * dt, y + 0.5 * dt * k1)
            k3 = velocity(t + 0.5 * dt, y + 0.5 * dt * k2)
            k4 = velocity(t + dt, y + dt * k3)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            r = np.linalg.norm(y, axis=-1)
            if np.any(r < lo_bound) or np.any(r > hi_bound):
                return None
        return y

    for halving in range(max_halvings + 1):
        b_cur = a + (b - a) * 0.5 ** halving
        pts = _sample_grid(a, b_cur, n_dirs, n_radii, seed)
        stencil = [pts]
        for i in range(6):
            e = np.zeros(6)
            e[i] = 1.0
            stencil.append(pts + jac_h * e)
            stencil.append(pts - jac_h * e)
        batch = np.concatenate(stencil, axis=0)
        out = flow(batch)
        if out is not None:
            break
    else:
        raise DomainEscape(
            f"trajectories kept leaving ({a}, {b}) after "
            f"{max_halvings} domain halvings")

    n = len(pts)
    images = out[:n]
    jac = np.empty((n, 6, 6))
    for i in range(6):
        plus = out[(1 + 2 * i) * n:(2 + 2 * i) * n]
        minus = out[(2 + 2 * i) * n:(3 + 2 * i) * n]
        jac[:, :, i] = (plus - minus) / (2.0 * jac_h)
    omega_end = omega_v(images) + eta_field(images)
    pulled = pullback(LinearMap(jac), omega_end)
    base = cone.fields_at(pts)
    resid = float(np.max(form_norm(base.g, pulled - base.omega)))
    return MoserResult(points=pts, images=images, pullback_residual=resid,
                       shrunk_domain=(a, b_cur), steps=steps,
                       halvings=halving)
