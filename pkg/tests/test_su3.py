import numpy as np
import pytest

from cyglue.errors import NotPositive, NotStable
from cyglue.forms import KForm, LinearMap, pullback, wedge
from cyglue.su3 import (
    acs_from_theta1, check_prop32, omega_11, recover_su3, stable_invariant,
    theta2_prime,
)

import oracles as oc

OM0 = oc.to_kform(oc.FLAT_OMEGA0, 6, 2)
RE0 = oc.to_kform(oc.FLAT_RE_OMEGA0, 6, 3)
IM0 = oc.to_kform(oc.FLAT_IM_OMEGA0, 6, 3)
OMEGA0 = RE0 + 1j * IM0

J0 = np.zeros((6, 6))
for _k in range(3):
    J0[2 * _k + 1, 2 * _k] = 1.0
    J0[2 * _k, 2 * _k + 1] = -1.0


def oracle_k_endo(theta: dict) -> np.ndarray:
    """K(v) defined by iota_{K(v)} vol = (iota_v theta) ^ theta, built from
    the exact dict algebra with no shared code."""
    K = np.zeros((6, 6))
    for a in range(6):
        mu = oc.o_wedge(oc.o_contract(a, theta), theta)
        for I, c in mu.items():
            missing = next(j for j in range(6) if j not in I)
            comp = tuple(j for j in range(6) if j != missing)
            K[missing, a] = (-1) ** missing * float(c) * (1 if I == comp else 0)
    return K


class TestQuarticInvariant:
    def test_flat_value_frozen(self):
        assert stable_invariant(RE0) == pytest.approx(-4.0, abs=0)

    def test_matches_exact_oracle_on_random_forms(self):
        rng = np.random.default_rng(21)
        for _ in range(8):
            d = oc.rand_exact_form(rng, 6, 3)
            K = oracle_k_endo(d)
            lam = np.trace(K @ K) / 6.0
            got = stable_invariant(oc.to_kform(d, 6, 3))
            assert got == pytest.approx(lam, rel=1e-12, abs=1e-12)

    def test_quartic_scaling(self):
        lam = stable_invariant(RE0)
        for c in (2.0, 0.3, -1.5):
            assert stable_invariant(KForm(6, 3, c * RE0.coeffs)) == pytest.approx(c ** 4 * lam, rel=1e-13)

    def test_unstable_example_positive(self):
        # dx123 + dy123 in interleaved coordinates
        uns = oc.to_kform({(0, 2, 4): 1, (1, 3, 5): 1}, 6, 3)
        assert stable_invariant(uns) == pytest.approx(1.0, abs=0)


class TestAlmostComplexStructure:
    def test_flat_recovers_standard_J(self):
        J = acs_from_theta1(RE0)
        assert np.array_equal(np.asarray(J.matrix), J0)

    def test_J_squared_is_minus_identity(self):
        rng = np.random.default_rng(22)
        L = LinearMap(np.eye(6) + 0.25 * rng.standard_normal((5, 6, 6)))
        J = np.asarray(acs_from_theta1(pullback(L, RE0)).matrix)
        JJ = np.einsum("...ij,...jk->...ik", J, J)
        assert np.allclose(JJ, -np.eye(6), atol=1e-12)

    def test_equivariance(self):
        rng = np.random.default_rng(23)
        L = np.eye(6) + 0.2 * rng.standard_normal((4, 6, 6))
        J = np.asarray(acs_from_theta1(pullback(LinearMap(L), RE0)).matrix)
        expected = np.einsum("bij,jk,bkl->bil", np.linalg.inv(L), J0, L)
        assert np.allclose(J, expected, atol=1e-12)

    def test_scale_invariance_of_J(self):
        J = np.asarray(acs_from_theta1(KForm(6, 3, 2.5 * RE0.coeffs)).matrix)
        assert np.allclose(J, J0, atol=1e-14)
        # K is quadratic in theta, so negating theta leaves J unchanged
        Jm = np.asarray(acs_from_theta1(KForm(6, 3, -RE0.coeffs)).matrix)
        assert np.allclose(Jm, J0, atol=1e-14)

    def test_unstable_raises(self):
        uns = oc.to_kform({(0, 2, 4): 1, (1, 3, 5): 1}, 6, 3)
        with pytest.raises(NotStable):
            acs_from_theta1(uns)

    def test_batched_failure_reports_sample(self):
        coeffs = np.stack([RE0.coeffs, oc.to_kform({(0, 2, 4): 1, (1, 3, 5): 1}, 6, 3).coeffs])
        with pytest.raises(NotStable) as ei:
            acs_from_theta1(KForm(6, 3, coeffs))
        assert ei.value.sample_index == [1]


class TestCompanionForm:
    def test_flat_companion_is_imaginary_part(self):
        J = acs_from_theta1(RE0)
        t2 = theta2_prime(J, RE0)
        assert np.array_equal(t2.coeffs, IM0.coeffs)

    def test_recovered_Omega_is_decomposable(self):
        # iota_v Omega' ^ Omega' = 0 characterizes decomposable 3-forms
        rng = np.random.default_rng(24)
        L = LinearMap(np.eye(6) + 0.3 * rng.standard_normal((6, 6)))
        th = pullback(L, RE0)
        J = acs_from_theta1(th)
        Om = th + 1j * theta2_prime(J, th)
        from cyglue.forms import contract
        for i in range(6):
            v = np.zeros(6)
            v[i] = 1.0
            w = wedge(contract(v, Om), Om)
            assert np.allclose(w.coeffs, 0.0, atol=1e-10)

    def test_recovered_Omega_is_30_type(self):
        rng = np.random.default_rng(25)
        L = LinearMap(np.eye(6) + 0.3 * rng.standard_normal((6, 6)))
        th = pullback(L, RE0)
        Jm = np.asarray(acs_from_theta1(th).matrix)
        Om = th + 1j * theta2_prime(acs_from_theta1(th), th)
        T = Om.as_tensor()
        lhs = np.einsum("da,dbc->abc", Jm, T)
        assert np.allclose(lhs, 1j * T, atol=1e-10)

    def test_positive_orientation(self):
        rng = np.random.default_rng(26)
        L = LinearMap(np.eye(6) + 0.3 * rng.standard_normal((8, 6, 6)))
        th = pullback(L, RE0)
        t2 = theta2_prime(acs_from_theta1(th), th)
        tops = wedge(th, t2).top_coefficient()
        assert np.all(tops > 0)


class TestRecovery:
    def test_flat_pair_is_exact_fixed_point(self):
        st, rep = recover_su3(OM0, OMEGA0)
        assert np.array_equal(np.asarray(st.J_prime.matrix), J0)
        assert np.array_equal(st.omega_prime.coeffs, OM0.coeffs)
        assert np.array_equal(st.theta2_prime.coeffs, IM0.coeffs)
        assert np.array_equal(st.g_M.components, np.eye(6))
        assert st.f == pytest.approx(1.0, abs=0)
        for val in (rep.defect_theta2, rep.defect_omega20,
                    rep.defect_normalization, rep.f_deviation):
            assert np.all(val == 0.0)
        assert rep.within_eps0

    def test_scaled_omega_normalizes_back(self):
        d = 0.07
        st, rep = recover_su3(KForm(6, 2, (1 + d) * OM0.coeffs), OMEGA0)
        assert st.f == pytest.approx((1 + d) ** 3, rel=1e-13)
        assert np.allclose(st.omega_prime.coeffs, OM0.coeffs, atol=1e-14)
        assert rep.defect_theta2 == pytest.approx(0.0, abs=1e-14)

    def test_20_perturbation_defect_frozen(self):
        pert = OM0 + oc.to_kform({(0, 2): 0.01}, 6, 2)
        st, rep = recover_su3(pert, OMEGA0)
        # (2,0)+(0,2) part of du1^du2 is half of du1^du2 - dv1^dv2
        assert rep.defect_omega20 == pytest.approx(0.005 * np.sqrt(2.0), rel=1e-3)
        assert rep.defect_theta2 == pytest.approx(0.0, abs=1e-14)
        assert rep.within_eps0

    def test_omega11_projection(self):
        J = acs_from_theta1(RE0)
        a = oc.to_kform({(0, 2): 1.0}, 6, 2)  # du1 ^ du2
        p = omega_11(a, J)
        expect = {(0, 2): 0.5, (1, 3): 0.5}  # (du1 du2 + dv1 dv2)/2
        got = oc.from_kform(p)
        assert got == pytest.approx(expect)
        # idempotent and identity on (1,1) forms
        assert np.allclose(omega_11(p, J).coeffs, p.coeffs, atol=1e-15)
        assert np.allclose(omega_11(OM0, J).coeffs, OM0.coeffs, atol=1e-15)

    def test_negative_omega_raises_not_positive(self):
        with pytest.raises(NotPositive):
            recover_su3(KForm(6, 2, -OM0.coeffs), OMEGA0)

    def test_degenerate_omega_raises_not_positive(self):
        with pytest.raises(NotPositive):
            recover_su3(oc.to_kform({(0, 1): 1.0}, 6, 2), OMEGA0)

    def test_homothety_covariance(self):
        # (c^2 omega, c^3 Omega) recovers g = c^2 g and identical defects
        c = 1.3
        st, rep = recover_su3(KForm(6, 2, c ** 2 * OM0.coeffs),
                              KForm(6, 3, c ** 3 * OMEGA0.coeffs))
        assert np.allclose(st.g_M.components, c ** 2 * np.eye(6), atol=1e-13)
        assert rep.defect_theta2 == pytest.approx(0.0, abs=1e-13)
        assert st.f == pytest.approx(1.0, rel=1e-13)

    def test_batched_recovery(self):
        rng = np.random.default_rng(27)
        eps = 0.008 * rng.standard_normal((5, 15))
        om = KForm(6, 2, OM0.coeffs + eps)
        Om = KForm(6, 3, np.broadcast_to(OMEGA0.coeffs, (5, 20)).copy())
        st, rep = recover_su3(om, Om)
        assert st.g_M.components.shape == (5, 6, 6)
        assert rep.defect_omega20.shape == (5,)
        assert rep.within_eps0

    def test_defects_scale_invariant(self):
        pert = OM0 + oc.to_kform({(0, 2): 0.01}, 6, 2)
        _, rep1 = recover_su3(pert, OMEGA0)
        c = 2.2
        _, rep2 = recover_su3(KForm(6, 2, c ** 2 * pert.coeffs),
                              KForm(6, 3, c ** 3 * OMEGA0.coeffs))
        assert rep2.defect_omega20 == pytest.approx(rep1.defect_omega20, rel=1e-12)
        assert rep2.defect_normalization == pytest.approx(rep1.defect_normalization, rel=1e-12)


class TestMetricComparison:
    def test_identity_on_equal_pairs(self):
        rec = check_prop32(OM0, OMEGA0, OM0, OMEGA0)
        assert rec.eps == pytest.approx(0.0, abs=0)
        assert rec.metric_diff == pytest.approx(0.0, abs=0)
        assert np.isnan(rec.ratio)

    def test_small_perturbation_linear_response(self):
        rng = np.random.default_rng(28)
        d_om = rng.standard_normal(15)
        d_Om = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        from cyglue.forms import MetricTensor, form_norm
        g = MetricTensor.euclidean(6)
        unit = max(float(form_norm(g, KForm(6, 2, d_om))),
                   float(form_norm(g, KForm(6, 3, d_Om))))
        ratios = []
        for eps in (1e-3, 1e-4):
            rec = check_prop32(KForm(6, 2, OM0.coeffs + eps * d_om),
                               KForm(6, 3, OMEGA0.coeffs + eps * d_Om),
                               OM0, OMEGA0)
            assert rec.eps == pytest.approx(eps * unit, rel=1e-12)
            ratios.append(float(rec.ratio))
        # empirical comparison constant stabilizes as eps -> 0
        assert ratios[0] == pytest.approx(ratios[1], rel=0.02)
        assert 0.1 < ratios[1] < 10.0
