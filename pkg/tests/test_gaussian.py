import math

import numpy as np
import pytest

from oscpair import (ConsistencyError, DomainError, MomentState, NonPhysicalStateError,
                     VACUUM, cp_threshold, dissipator_coefficients, eigenmode_covariance,
                     fidelity_truncated, from_ab_basis, gaussian_fidelity,
                     gaussian_fidelity_sq, lambda_c, lambda_c_short_time_slope,
                     lambda_c_trajectory, mixture_fidelity_lower_bound, propagate,
                     cg_redfield_generator, thermal_product_state, to_ab_basis)
from oscpair.fock import TruncatedState, _ops
from oscpair.gaussian import VCAL, XI

from conftest import FIG4
from oscpair import ModelParams


def random_physical_state(rng, n_max=3.0):
    n1 = rng.uniform(0.0, n_max)
    n2 = rng.uniform(0.0, n_max)
    # |cross|^2 <= n1*n2 keeps the mode matrix positive semidefinite
    mag = math.sqrt(n1 * n2) * rng.uniform(0.0, 0.95)
    phase = rng.uniform(0, 2 * np.pi)
    return MomentState(n1, n2, mag * np.exp(1j * phase))


def gaussian_fock_state(state: MomentState, d: int) -> TruncatedState:
    """Zero-mean excitation-conserving Gaussian state on the truncated space.

    Built as exp(−Σ B_ij γ_i†γ_j)/Z where B reproduces the mode matrix
    [[n₊, c], [c*, n₋]]; independent of the covariance-formula machinery.
    """
    mode = np.array([[state.n_plus, state.cross],
                     [np.conj(state.cross), state.n_minus]])
    nu, u = np.linalg.eigh(mode)
    if nu.min() < 0:
        raise ValueError("not a physical moment triple")
    beta_nu = np.array([math.log1p(1.0 / v) if v > 1e-14 else 1e4 for v in nu])
    b_form = u @ np.diag(beta_nu) @ u.conj().T
    gp, gm = _ops(d)["g"]
    gams = (gp, gm)
    exponent = np.zeros((d * d, d * d), dtype=complex)
    for i in range(2):
        for j in range(2):
            exponent -= b_form[i, j] * gams[i].conj().T @ gams[j]
    evals, evecs = np.linalg.eigh(exponent)
    weights = np.exp(evals - evals.max())
    rho = (evecs * weights) @ evecs.conj().T
    return TruncatedState(rho / np.trace(rho).real, d)


class TestEigenmodeCovariance:
    def test_vacuum_identity(self):
        assert np.array_equal(eigenmode_covariance(VACUUM).matrix, np.eye(4))

    def test_symmetric_thermal(self):
        g = eigenmode_covariance(MomentState(2.0, 2.0, 0j)).matrix
        assert np.array_equal(g, 5.0 * np.eye(4))

    def test_hermitian_with_complex_cross(self):
        g = eigenmode_covariance(MomentState(1.0, 0.5, 0.3 + 0.1j)).matrix
        assert np.abs(g - g.conj().T).max() == 0.0

    def test_quadrature_rotation_is_unitary(self):
        assert np.abs(VCAL @ VCAL.conj().T - np.eye(4)).max() < 1e-15


class TestLambdaC:
    def test_vacuum_saturates(self):
        assert lambda_c(VACUUM) == 0.0

    def test_balanced_thermal(self):
        assert lambda_c(MomentState(2.0, 2.0, 0j)) == pytest.approx(2.0, rel=1e-14)

    def test_closed_form_equals_eigenvalue_route(self, rng):
        for _ in range(10_000):
            n1, n2 = rng.uniform(0, 20, 2)
            c = rng.uniform(-10, 10) + 1j * rng.uniform(-10, 10)
            st = MomentState(n1, n2, c)
            closed = 0.5 * (n1 + n2 - math.hypot(n1 - n2, 2 * abs(c)))
            gam = eigenmode_covariance(st).matrix
            eig = 0.5 * np.linalg.eigvalsh(gam + 1j * XI).min()
            assert abs(closed - eig) <= 1e-10 * max(1.0, n1 + n2 + abs(c))
            lambda_c(st)  # the built-in cross-check must stay silent

    def test_redfield_goes_negative(self, fig4_runner):
        traj = fig4_runner.trajectory("redfield", np.linspace(0.0, 5.0, 2001))
        assert lambda_c_trajectory(traj).min() < -1e-6


@pytest.fixture(scope="module")
def coeffs():
    return dissipator_coefficients(ModelParams(**FIG4))


class TestShortTimeSlope:

    def test_zero_at_first_block_bound(self, coeffs):
        gpp = coeffs.gamma1[0, 0].real
        gmm = coeffs.gamma1[1, 1].real
        s_star = math.sqrt(gpp * gmm) / abs(coeffs.gamma1[0, 1])
        assert lambda_c_short_time_slope(s_star, coeffs) == pytest.approx(0.0, abs=1e-15)

    def test_matches_bracketed_expansion(self, coeffs):
        # same quantity written as the prefactor*(1 - sqrt(1 + 4(s^2-B)|g|^2/sum^2))
        gpp = coeffs.gamma1[0, 0].real
        gmm = coeffs.gamma1[1, 1].real
        gpm2 = abs(coeffs.gamma1[0, 1]) ** 2
        for s in (0.0, 0.3, 0.7, 1.0):
            bracket = 0.5 * (gpp + gmm) * (1.0 - math.sqrt(
                1.0 + 4.0 * (s**2 - gpp * gmm / gpm2) * gpm2 / (gpp + gmm) ** 2))
            assert lambda_c_short_time_slope(s, coeffs) == pytest.approx(bracket, rel=1e-12)

    def test_sign_follows_positivity_condition(self, coeffs):
        gpp = coeffs.gamma1[0, 0].real
        gmm = coeffs.gamma1[1, 1].real
        s_star = math.sqrt(gpp * gmm) / abs(coeffs.gamma1[0, 1])
        assert lambda_c_short_time_slope(0.999 * s_star, coeffs) > 0
        assert lambda_c_short_time_slope(1.001 * s_star, coeffs) < 0

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0])
    def test_finite_difference_agreement(self, coeffs, s):
        gen = cg_redfield_generator(coeffs, s)
        h = 1e-4
        traj = propagate(gen, VACUUM, np.array([0.0, h]))
        fd = lambda_c(traj.state(1)) / h
        analytic = lambda_c_short_time_slope(s, coeffs)
        assert fd == pytest.approx(analytic, rel=0.01)


class TestGaussianFidelity:
    def test_identical_states(self, rng):
        for _ in range(20):
            g = eigenmode_covariance(random_physical_state(rng))
            assert gaussian_fidelity(g, g) == pytest.approx(1.0, abs=1e-12)

    def test_vacuum_vs_thermal_closed_form(self):
        for n1, n2 in ((0.5, 0.2), (2.0, 1.0), (4.0, 3.0)):
            f2 = gaussian_fidelity(eigenmode_covariance(VACUUM),
                                   eigenmode_covariance(MomentState(n1, n2, 0j))) ** 2
            assert f2 == pytest.approx(1.0 / ((n1 + 1) * (n2 + 1)), abs=1e-6)

    def test_vacuum_vs_thermal_against_fock_oracle(self):
        d = 40
        n1, n2 = 0.8, 0.5
        f_gauss = gaussian_fidelity(eigenmode_covariance(VACUUM),
                                    eigenmode_covariance(MomentState(n1, n2, 0j)))
        f_fock = fidelity_truncated(thermal_product_state(0.0, 0.0, d),
                                    thermal_product_state(n1, n2, d))
        assert f_gauss**2 == pytest.approx(f_fock**2, abs=1e-6)

    def test_symmetry(self, rng):
        for _ in range(30):
            g1 = eigenmode_covariance(random_physical_state(rng))
            g2 = eigenmode_covariance(random_physical_state(rng))
            assert gaussian_fidelity(g1, g2) == pytest.approx(
                gaussian_fidelity(g2, g1), abs=1e-12)

    def test_random_pairs_against_fock_oracle(self, rng):
        # cutoff 40 certifies occupations up to ~1.5 under the 1e-8 tail rule
        d = 40
        for _ in range(2):
            s1 = random_physical_state(rng, n_max=1.4)
            s2 = random_physical_state(rng, n_max=1.4)
            f_fock = fidelity_truncated(gaussian_fock_state(s1, d),
                                        gaussian_fock_state(s2, d))
            f_gauss = gaussian_fidelity(eigenmode_covariance(s1),
                                        eigenmode_covariance(s2))
            assert abs(f_fock**2 - f_gauss**2) <= 1e-4

    def test_quadratic_approach_to_unity(self):
        base = MomentState(1.0, 0.4, 0.2 + 0.1j)
        eps_values = np.array([2e-2, 1e-2, 5e-3])
        defects = []
        for eps in eps_values:
            pert = MomentState(base.n_plus + eps, base.n_minus - 0.5 * eps,
                               base.cross + 0.3 * eps)
            defects.append(1.0 - gaussian_fidelity(eigenmode_covariance(base),
                                                   eigenmode_covariance(pert)))
        defects = np.array(defects)
        assert np.all(defects > 0)
        ratios = defects[:-1] / defects[1:]
        assert np.all((ratios > 3.0) & (ratios < 5.0))  # 1-F = O(eps^2)

    def test_nonphysical_input_is_flagged(self):
        bad = eigenmode_covariance(MomentState(0.001, 0.001, 0.5))
        good = eigenmode_covariance(MomentState(1.0, 1.0, 0j))
        with pytest.raises(NonPhysicalStateError):
            gaussian_fidelity(bad, good)
        f2, physical = gaussian_fidelity_sq(bad, good)
        assert not physical
        assert np.isfinite(f2)


class TestMixtureBound:
    def test_endpoints(self):
        assert mixture_fidelity_lower_bound(0.7, 0.9, 0.016, 0.0) == pytest.approx(0.7)
        assert mixture_fidelity_lower_bound(0.7, 0.9, 0.016, 1e6) == pytest.approx(0.9)

    def test_stays_in_unit_interval(self, rng):
        t = rng.uniform(0, 300, 100)
        vals = mixture_fidelity_lower_bound(0.6, 0.8, 0.016, t)
        assert np.all((vals >= 0.6 - 1e-15) & (vals <= 1.0))
        assert np.all(vals >= min(0.6, 0.8) - 1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            mixture_fidelity_lower_bound(1.5, 0.5, 0.016, 1.0)


class TestBasisChange:
    def test_symmetric_state(self):
        ab = to_ab_basis(MomentState(2.0, 2.0, 0j))
        assert ab.aa == 2.0 and ab.bb == 2.0 and ab.ab_dag == 0j

    def test_local_steady_state(self):
        ab = to_ab_basis(MomentState(10.0, 10.0, 0j))
        assert ab.aa == ab.bb == 10.0
        assert ab.ab_dag == 0j

    def test_round_trip_exact(self, rng):
        for _ in range(200):
            st = MomentState(rng.uniform(0, 5), rng.uniform(0, 5),
                             complex(rng.uniform(-2, 2), rng.uniform(-2, 2)))
            ab = to_ab_basis(st)
            back = from_ab_basis(ab.aa, ab.bb, ab.ab_dag)
            assert back.n_plus == pytest.approx(st.n_plus, abs=1e-15)
            assert back.n_minus == pytest.approx(st.n_minus, abs=1e-15)
            assert back.cross == pytest.approx(st.cross, abs=1e-15)

    def test_identities(self, rng):
        st = MomentState(1.3, 0.4, 0.2 - 0.7j)
        ab = to_ab_basis(st)
        assert 0.5 * (ab.aa - ab.bb) == pytest.approx(st.cross.real)
        assert ab.ab_dag.imag == pytest.approx(st.cross.imag)
        assert ab.ab_dag.real == pytest.approx(0.5 * (st.n_plus - st.n_minus))
        assert ab.aa + ab.bb == pytest.approx(st.n_plus + st.n_minus)
