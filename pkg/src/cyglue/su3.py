"""Recovery of an SU(3)-structure from a pointwise (2-form, 3-form) pair.

Given a real 2-form omega and a complex 3-form Omega = theta1 + i theta2 on
R^6, the pipeline extracts the almost complex structure determined by theta1
(when its quartic invariant is negative), the compatible normalized Kaehler
form, and the induced metric, together with the defect numbers measuring how
far the pair is from a genuine Calabi-Yau structure at the point.

Sign convention: theta2_prime(J, theta)(u, v, w) = -theta(Ju, v, w), with the
sign of J itself fixed so that theta1 ^ theta2_prime is positively oriented.
This is the unique choice under which the flat pair (omega0, Omega0) recovers
the standard complex structure, theta2_prime = Im(Omega0), and a positive
metric simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _multiindex as mi
from .errors import DimensionMismatch, NotPositive, NotStable
from .forms import KForm, LinearMap, MetricTensor, form_norm, pullback, wedge

__all__ = [
    "SU3Structure", "NearlyCYReport", "Prop32Record",
    "stable_invariant", "acs_from_theta1", "theta2_prime", "omega_11",
    "recover_su3", "check_prop32",
]

_STABLE_RTOL = 1e-13
_POS_RTOL = 1e-12


@dataclass(frozen=True)
class SU3Structure:
    """Pointwise SU(3)-structure data recovered from (omega, Omega)."""

    J_prime: LinearMap
    omega_prime: KForm
    theta2_prime: KForm
    g_M: MetricTensor
    f: np.ndarray


@dataclass(frozen=True)
class NearlyCYReport:
    """Defect numbers for a pointwise (omega, Omega) pair.

    All norms are taken with the recovered metric g_M.  ``stable`` records
    that the construction itself succeeded; ``within_eps0`` compares the
    defects against the configured nearly-Calabi-Yau threshold.
    """

    defect_theta2: np.ndarray
    defect_omega20: np.ndarray
    defect_normalization: np.ndarray
    f_deviation: np.ndarray
    stable: bool
    within_eps0: bool
    eps0: float = 0.2


@dataclass(frozen=True)
class Prop32Record:
    """Metric comparison of a perturbed pair against a reference structure."""

    metric_diff: np.ndarray
    inverse_diff: np.ndarray
    eps: np.ndarray
    ratio: np.ndarray


def _check_theta(theta: KForm):
    if theta.dim != 6 or theta.degree != 3:
        raise DimensionMismatch("expected a 3-form on R^6")
    if theta.is_complex:
        raise DimensionMismatch("expected a real 3-form")


def _k_endomorphism(coeffs: np.ndarray) -> np.ndarray:
    """K with iota_{K(v)} vol = iota_v theta ^ theta, batched over leading axes."""
    C = mi.contraction_tensor(6, 3)          # (6, 20, 15)
    W = mi.wedge_tensor(6, 2, 3)             # (15, 20, 6)
    # mu[..., a, m] = coefficients of iota_{e_a} theta ^ theta,
    # assembled as two vector-matrix products and a batched matmul
    lead = coeffs.shape[:-1]
    t1 = (coeffs @ C.transpose(1, 0, 2).reshape(20, 90)).reshape(lead + (6, 15))
    t2 = (coeffs @ W.transpose(1, 0, 2).reshape(20, 90)).reshape(lead + (15, 6))
    mu = t1 @ t2
    rank5 = mi.index_rank(6, 5)
    K = np.empty(coeffs.shape[:-1] + (6, 6), dtype=coeffs.dtype)
    for i in range(6):
        comp = tuple(j for j in range(6) if j != i)
        sign = -1.0 if i % 2 else 1.0
        K[..., i, :] = sign * mu[..., :, rank5[comp]]
    return K


def stable_invariant(theta1: KForm) -> np.ndarray:
    """Quartic invariant lambda(theta1); negative on the stable orbit that
    carries an almost complex structure."""
    _check_theta(theta1)
    K = _k_endomorphism(theta1.coeffs)
    return np.einsum("...ij,...ji->...", K, K) / 6.0


def _theta2_tensor(J: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    T = mi.coeffs_to_tensor(coeffs, 6, 3)
    lead = T.shape[:-3]
    U = (np.swapaxes(J, -1, -2) @ T.reshape(lead + (6, 36))).reshape(T.shape)
    # U inherits antisymmetry in its last two slots, so alternation
    # reduces to the cyclic average
    U = (U + np.moveaxis(U, [-3, -2, -1], [-1, -3, -2])
         + np.moveaxis(U, [-3, -2, -1], [-2, -1, -3])) / 3.0
    return -mi.tensor_to_coeffs(U, 6, 3)


def _acs_batch(coeffs: np.ndarray):
    """(J, lam, stable_mask) without raising; J is garbage where unstable."""
    K = _k_endomorphism(coeffs)
    lam = np.einsum("...ij,...ji->...", K, K) / 6.0
    scale = np.einsum("...i,...i->...", coeffs, coeffs)  # |theta|^2, flat frame
    stable = lam < -_STABLE_RTOL * (scale ** 2 + 1e-300)
    denom = np.sqrt(np.where(stable, -lam, 1.0))
    J = K / denom[..., None, None]
    # orientation: require theta ^ theta2_prime positively oriented
    t2 = _theta2_tensor(J, coeffs)
    W = mi.wedge_tensor(6, 3, 3)[..., 0]
    top = np.einsum("...j,...j->...", coeffs @ W, t2)
    flip = np.where(top < 0, -1.0, 1.0)
    J = J * flip[..., None, None]
    return J, lam, stable


def acs_from_theta1(theta1: KForm) -> LinearMap:
    """Almost complex structure of a stable 3-form, J^2 = -Id.

    Raises NotStable when the quartic invariant fails to be negative.
    """
    _check_theta(theta1)
    J, lam, stable = _acs_batch(theta1.coeffs)
    if not np.all(stable):
        bad = np.argwhere(~np.atleast_1d(stable))
        raise NotStable(
            f"quartic invariant is nonnegative (lambda={np.atleast_1d(lam).ravel()[0]:.3e} "
            f"at sample {bad[0].tolist()})", sample_index=bad[0].tolist())
    return LinearMap(J, role="almost complex structure")


def theta2_prime(J: LinearMap, theta1: KForm) -> KForm:
    """Companion 3-form -theta1(J.,.,.), antisymmetrized.

    For theta1 of type (3,0)+(0,3) with respect to J the antisymmetrization
    is a no-op and theta1 + i theta2_prime is a (3,0)-form.
    """
    _check_theta(theta1)
    return KForm(6, 3, _theta2_tensor(np.asarray(J.matrix, float), theta1.coeffs))


def omega_11(omega: KForm, J: LinearMap) -> KForm:
    """J-invariant part (omega(u,v) + omega(Ju,Jv))/2."""
    if omega.dim != 6 or omega.degree != 2:
        raise DimensionMismatch("expected a 2-form on R^6")
    return 0.5 * (omega + pullback(J, omega))


def _metric_from(omega_p: np.ndarray, J: np.ndarray) -> np.ndarray:
    T = mi.coeffs_to_tensor(omega_p, 6, 2)
    g = T @ J
    return 0.5 * (g + np.swapaxes(g, -1, -2))


_WEDGE33_TOP = None
_WEDGE24_TOP = None


def _recover_batch(omega_c: np.ndarray, Omega_c: np.ndarray):
    """Vectorized recovery pipeline on raw coefficient arrays.

    Returns a dict of arrays; ``stable`` and ``positive`` are masks rather
    than raised errors so grid evaluations can report the offending sample.
    """
    theta1 = np.real(Omega_c)
    theta2 = np.imag(Omega_c)
    J, lam, stable = _acs_batch(theta1)
    t2p = _theta2_tensor(J, theta1)

    W33 = mi.wedge_tensor(6, 3, 3)[..., 0]
    C2 = mi.compound_matrix(J, 2)
    om11 = 0.5 * (omega_c + (omega_c[..., None, :] @ C2)[..., 0, :])

    W22 = mi.wedge_tensor(6, 2, 2)
    W24 = mi.wedge_tensor(6, 2, 4)[..., 0]
    tmp = om11 @ W22.reshape(15, 225)
    tmp = tmp.reshape(tmp.shape[:-1] + (15, 15))
    om11_sq = (om11[..., None, :] @ tmp)[..., 0, :]
    num = np.einsum("...k,...k->...", om11 @ W24, om11_sq)
    den = 1.5 * np.einsum("...j,...j->...", theta1 @ W33, t2p)
    safe_den = np.where(den == 0.0, 1.0, den)
    f = np.where(den == 0.0, np.nan, num / safe_den)

    positive_f = np.where(stable, f > 0, False)
    scl = np.where(positive_f, np.abs(f), 1.0) ** (-1.0 / 3.0)
    omega_p = om11 * scl[..., None]
    g = _metric_from(omega_p, J)
    w = np.linalg.eigvalsh(g)
    gscale = np.max(np.abs(w), axis=-1)
    positive = positive_f & (w[..., 0] > _POS_RTOL * gscale)
    return {
        "J": J, "lam": lam, "stable": stable, "f": f,
        "theta2_prime": t2p, "omega_11": om11, "omega_prime": omega_p,
        "g": g, "positive": positive,
    }


def _first_bad(mask):
    bad = np.argwhere(~np.atleast_1d(mask))
    return bad[0].tolist()


def recover_su3(omega: KForm, Omega: KForm, eps0: float = 0.2):
    """Full pointwise recovery.

    Parameters
    ----------
    omega : real 2-form on R^6
    Omega : complex 3-form on R^6
    eps0 : threshold used only for the report flag ``within_eps0``.

    Returns
    -------
    (SU3Structure, NearlyCYReport)

    Raises
    ------
    NotStable
        when Re(Omega) has nonnegative quartic invariant at some sample.
    NotPositive
        when the normalized (1,1) part fails positivity at some sample.
    """
    if omega.dim != 6 or omega.degree != 2:
        raise DimensionMismatch("omega must be a 2-form on R^6")
    if Omega.dim != 6 or Omega.degree != 3:
        raise DimensionMismatch("Omega must be a 3-form on R^6")
    Omega_c = Omega.coeffs.astype(np.complex128, copy=False)
    out = _recover_batch(omega.coeffs, Omega_c)
    if not np.all(out["stable"]):
        raise NotStable("Re(Omega) is not a stable 3-form",
                        sample_index=_first_bad(out["stable"]))
    if not np.all(out["positive"]):
        raise NotPositive("recovered (1,1)-form is not positive",
                          sample_index=_first_bad(out["positive"]))

    J = LinearMap(out["J"], role="almost complex structure")
    omega_p = KForm(6, 2, out["omega_prime"])
    t2p = KForm(6, 3, out["theta2_prime"])
    g = MetricTensor(6, out["g"], _checked=True)
    struct = SU3Structure(J, omega_p, t2p, g, out["f"])

    theta1, theta2 = Omega.real(), Omega.imag()
    d_t2 = form_norm(g, theta2 - t2p)
    d_20 = form_norm(g, omega - KForm(6, 2, out["omega_11"]))
    lhs = wedge(wedge(omega, omega), omega)
    rhs = 1.5 * wedge(theta1, theta2)
    d_norm = form_norm(g, lhs - rhs)
    f_dev = np.abs(out["f"] - 1.0)
    within = bool(np.all(d_t2 < eps0) and np.all(d_20 < eps0)
                  and np.all(d_norm < eps0) and np.all(f_dev < eps0))
    report = NearlyCYReport(d_t2, d_20, d_norm, f_dev,
                            stable=True, within_eps0=within, eps0=eps0)
    return struct, report


def check_prop32(omega: KForm, Omega: KForm,
                 omega_ref: KForm, Omega_ref: KForm) -> Prop32Record:
    """Compare the recovered metric of (omega, Omega) against the metric of a
    reference pair, both measured with the reference metric.

    The ratio field reports max(metric_diff, inverse_diff) / eps where eps is
    the larger input deviation; it is the empirical comparison constant and
    is nan when the inputs coincide.
    """
    ref, _ = recover_su3(omega_ref, Omega_ref)
    cur, _ = recover_su3(omega, Omega)
    g_ref = ref.g_M
    eps = np.maximum(form_norm(g_ref, omega - omega_ref),
                     form_norm(g_ref, Omega - Omega_ref))
    from .forms import lower_tensor_norm
    d_g = lower_tensor_norm(g_ref, cur.g_M.components - g_ref.components, 2)
    ginv_diff = cur.g_M.inverse() - g_ref.inverse()
    # fully contravariant comparison: contract both slots with g_ref itself
    q = np.einsum("...ac,...bd,...ab,...cd->...",
                  g_ref.components, g_ref.components, ginv_diff, ginv_diff,
                  optimize=True)
    d_ginv = np.sqrt(np.maximum(q, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(eps > 0, np.maximum(d_g, d_ginv) / np.where(eps > 0, eps, 1.0), np.nan)
    return Prop32Record(d_g, d_ginv, eps, ratio)
