import numpy as np
import pytest

from closure14.coeffs import EquilibriumPoint, k00, k_pq, make_family
from closure14.errors import DomainError
from closure14.potentials import (
    BoostVelocity,
    MultiplierState,
    eval_h_hat,
    eval_phi_hat,
    hat_multipliers,
    lab_moments_from_rest,
    lab_potentials,
    moments_from_potentials,
)
from closure14.symtensor import SymMatrix

K00_EQ = 28.933881011162246  # h at the unit equilibrium state, exponential family

N, S = 6, 4


@pytest.fixture(scope="module")
def fam():
    return make_family("exponential")


def hatted_state(seed, eps=1e-2):
    rng = np.random.default_rng(seed)
    base = np.eye(3) / 3.0 + eps * SymMatrix(rng.uniform(-1, 1, (3, 3))).as_array()
    return MultiplierState(
        frame="hatted",
        lam=rng.uniform(-0.5, 0.5),
        lam_i=eps * rng.uniform(-1, 1, 3),
        lam_ij=SymMatrix(base),
        lam_ill=eps * rng.uniform(-1, 1, 3),
        lam_iill=eps * rng.uniform(0, 0.5),
    )


class TestMultiplierState:
    def test_equilibrium_scalars(self):
        st = MultiplierState.equilibrium(0.2, 1.5, 0.01)
        assert st.lam_ll == pytest.approx(1.5)
        assert st.scalar_point() == EquilibriumPoint(0.2, 1.5, 0.01)

    def test_dict_round_trip(self):
        st = hatted_state(0)
        again = MultiplierState.from_dict(st.to_dict())
        assert again.lam == st.lam
        np.testing.assert_array_equal(again.lam_i, st.lam_i)
        assert again.lam_ij == st.lam_ij
        assert again.lam_iill == st.lam_iill

    def test_bad_frame_rejected(self):
        with pytest.raises(ValueError):
            MultiplierState.equilibrium(0.0, 1.0, frame="comoving")

    def test_bad_velocity_rejected(self):
        with pytest.raises(ValueError):
            BoostVelocity([1.0, 2.0])
        with pytest.raises(ValueError):
            BoostVelocity([np.nan, 0.0, 0.0])


class TestPotentialEvaluation:
    def test_equilibrium_values(self, fam):
        st = MultiplierState.equilibrium(0.0, 1.0)
        assert eval_h_hat(fam, st, N, S) == pytest.approx(K00_EQ, rel=1e-13)
        np.testing.assert_allclose(eval_phi_hat(fam, st, N, S), 0.0, atol=1e-15)

    def test_linear_response_in_lam_i(self, fam):
        # to first order phi^k = k_{1,0} lam_k
        eps = 1e-6
        st = MultiplierState.equilibrium(0.0, 1.0)
        st = MultiplierState(
            frame="hatted",
            lam=st.lam,
            lam_i=np.array([eps, 0.0, 0.0]),
            lam_ij=st.lam_ij,
            lam_ill=st.lam_ill,
            lam_iill=0.0,
        )
        phi = eval_phi_hat(fam, st, N, S)
        k10 = k_pq(fam, 1, 0, EquilibriumPoint(0.0, 1.0, 0.0), S)
        assert phi[0] == pytest.approx(k10 * eps, rel=1e-9)
        np.testing.assert_allclose(phi[1:], 0.0, atol=1e-18)

    def test_domain_guard(self, fam):
        st = MultiplierState.equilibrium(0.0, -1.0)
        with pytest.raises(DomainError):
            eval_h_hat(fam, st, N, S)


class TestBoostLaw:
    def test_scalar_multiplier_transforms(self):
        lab = MultiplierState(
            frame="lab",
            lam=2.0,
            lam_i=np.array([1.0, 0.0, 0.0]),
            lam_ij=SymMatrix(np.eye(3) / 3.0),
            lam_ill=np.zeros(3),
            lam_iill=0.0,
        )
        hat = hat_multipliers(lab, BoostVelocity([1.0, 0.0, 0.0]))
        # lam_hat = lam + lam_i v_i + lam_ij v_i v_j = 2 + 1 + 1/3
        assert hat.lam == pytest.approx(2.0 + 1.0 + 1.0 / 3.0)
        # lam_i_hat = lam_i + 2 lam_ij v_j
        np.testing.assert_allclose(hat.lam_i, [1.0 + 2.0 / 3.0, 0.0, 0.0])
        assert hat.lam_iill == 0.0

    def test_quartic_multiplier_invariant(self):
        st = hatted_state(3)
        lab = MultiplierState(frame="lab", lam=st.lam, lam_i=st.lam_i,
                              lam_ij=st.lam_ij, lam_ill=st.lam_ill,
                              lam_iill=st.lam_iill)
        hat = hat_multipliers(lab, BoostVelocity([0.2, -0.1, 0.05]))
        assert hat.lam_iill == lab.lam_iill
        np.testing.assert_allclose(
            hat.lam_ill, lab.lam_ill + 4.0 * lab.lam_iill * np.array([0.2, -0.1, 0.05])
        )

    def test_requires_lab_frame(self):
        with pytest.raises(ValueError):
            hat_multipliers(hatted_state(0), BoostVelocity(np.zeros(3)))

    def test_lab_potentials_at_zero_velocity(self, fam):
        st = hatted_state(1)
        lab = MultiplierState(frame="lab", lam=st.lam, lam_i=st.lam_i,
                              lam_ij=st.lam_ij, lam_ill=st.lam_ill,
                              lam_iill=st.lam_iill)
        pair = lab_potentials(fam, lab, BoostVelocity(np.zeros(3)), N, S)
        assert pair.h == pytest.approx(eval_h_hat(fam, st, N, S), rel=1e-14)
        np.testing.assert_allclose(pair.phi, eval_phi_hat(fam, st, N, S), rtol=1e-14)

    def test_boosted_equilibrium_flux_cancels(self, fam):
        # at a boosted equilibrium the hatted flux potential cancels h*v
        lab = MultiplierState.equilibrium(0.1, 1.2, frame="lab")
        v = BoostVelocity([0.05, -0.02, 0.03])
        hat = hat_multipliers(lab, v)
        phi_hat = eval_phi_hat(fam, hat, N, S)
        h = eval_h_hat(fam, hat, N, S)
        np.testing.assert_allclose(phi_hat, -h * v.v, rtol=1e-6)


class TestMoments:
    def test_rest_frame_required(self, fam):
        st = MultiplierState.equilibrium(0.0, 1.0, frame="lab")
        with pytest.raises(ValueError):
            moments_from_potentials(fam, st, N, S)

    def test_symmetries_and_traces(self, fam):
        st = hatted_state(5)
        ms = moments_from_potentials(fam, st, N, S)
        np.testing.assert_allclose(ms.m_ij, ms.m_ij.T, atol=1e-12)
        np.testing.assert_allclose(
            ms.f_kij, np.transpose(ms.f_kij, (0, 2, 1)), atol=1e-12
        )

    def test_equilibrium_moment_values(self, fam):
        # at equilibrium m = d k00/d lam and m_ij is isotropic with
        # trace 3 * dk00/dlam_ll
        st = MultiplierState.equilibrium(0.1, 1.4, 0.0)
        ms = moments_from_potentials(fam, st, N, S)
        from closure14.coeffs import CoeffSeries

        pt = st.scalar_point()
        want_m = CoeffSeries.k00(S).d_lam()(fam, pt)
        want_trace = 3.0 * CoeffSeries.k00(S).d_ll()(fam, pt)
        assert ms.m == pytest.approx(want_m, rel=1e-12)
        assert np.trace(ms.m_ij) == pytest.approx(want_trace, rel=1e-7)
        np.testing.assert_allclose(ms.m_i, 0.0, atol=1e-9)
        np.testing.assert_allclose(ms.f_k, 0.0, atol=1e-12)

    def test_boost_of_moments_zero_velocity_is_identity(self, fam):
        st = hatted_state(7)
        rest = moments_from_potentials(fam, st, N, S)
        lab = lab_moments_from_rest(rest, BoostVelocity(np.zeros(3)))
        assert lab.m == rest.m
        np.testing.assert_array_equal(lab.m_ij, rest.m_ij)
        np.testing.assert_array_equal(lab.f_kij, rest.f_kij)
        assert lab.frame == "lab"

    def test_boost_requires_rest_frame(self, fam):
        st = hatted_state(7)
        rest = moments_from_potentials(fam, st, N, S)
        lab = lab_moments_from_rest(rest, BoostVelocity(np.zeros(3)))
        with pytest.raises(ValueError):
            lab_moments_from_rest(lab, BoostVelocity(np.zeros(3)))

    def test_mass_density_boost_invariant(self, fam):
        st = hatted_state(9)
        rest = moments_from_potentials(fam, st, N, S)
        lab = lab_moments_from_rest(rest, BoostVelocity([0.3, 0.1, -0.2]))
        assert lab.m == rest.m  # rank-0 density is Galilean invariant
        np.testing.assert_allclose(
            lab.m_i, rest.m_i + rest.m * np.array([0.3, 0.1, -0.2])
        )
