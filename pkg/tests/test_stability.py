import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import brentq

import oracles
from cavmag.errors import ConvergenceFailure
from cavmag.params import ScaledState, SystemParams
from cavmag.stability import (
    EPS_STAB,
    PhaseLabel,
    branch_stability,
    characteristic_polynomial,
    classify_phase,
    eigenvalues4,
    fluctuation_matrix,
    linearization_point,
    phase_report,
    routh_hurwitz_stable,
    stability_at,
)
from cavmag.steady_state import BranchKind, branch_occupations, critical_strengths, find_branch, reconstruct_amplitudes
from conftest import ref_params, prm_tuple

ratios = st.floats(0.05, 1.5)
drives = st.floats(0.0, 3.1)
amps = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


def test_decoupled_spectrum():
    p = SystemParams(3.0, 2.0, 0.0, 0.0)
    m = fluctuation_matrix(p, ScaledState.zero())
    assert np.count_nonzero(m[[0, 0, 1, 1, 2, 2, 3, 3], [1, 3, 0, 2, 1, 3, 0, 2]]) == 0
    ev = eigenvalues4(m)
    np.testing.assert_allclose(np.sort_complex(ev), np.sort_complex([-1 + 3j, -1 - 3j, -1 + 2j, -1 - 2j]), atol=1e-14)


def test_origin_linearization():
    lp = linearization_point(ref_params(0.8, 1.8), ScaledState.zero())
    assert lp.delta_m_tilde == 0.8 * 3.0 and lp.f_kerr == 0


@given(amps)
def test_linearization_invariants(b):
    lp = linearization_point(ref_params(1.0, 2.0), ScaledState(0, b))
    assert abs(lp.f_kerr) == pytest.approx(abs(b) ** 2, rel=1e-12, abs=1e-300)
    assert lp.delta_m_tilde - 3.0 == pytest.approx(2 * abs(lp.f_kerr), rel=1e-12, abs=1e-12)


def test_eigenvalue_ordering():
    ev = eigenvalues4(np.diag([1, -1, 1j, -1j]))
    np.testing.assert_array_equal(ev, [1, 1j, -1j, -1])


def test_non_finite_matrix_rejected():
    with pytest.raises(ValueError):
        eigenvalues4(np.full((4, 4), np.nan))
    assert issubclass(ConvergenceFailure, ArithmeticError)


def test_plus_branch_trace():
    p = ref_params(1.0, 2.3)
    rep = branch_stability(p, find_branch(p, BranchKind.PLUS))
    assert np.trace(rep.matrix) == pytest.approx(-4.0, abs=1e-12)


@given(ratios, drives, amps, amps)
def test_trace_and_characteristic_residual(r, G, a, b):
    p = ref_params(r, G)
    rep = stability_at(p, ScaledState(a, b))
    m = rep.matrix
    assert abs(rep.eigenvalues.sum() - np.trace(m)) < 1e-9
    assert abs(rep.eigenvalues.real.sum() + 2 * (p.kappa + p.gamma)) < 1e-9
    coeffs = np.poly(m)
    scale = max(1.0, np.linalg.norm(m, 2)) ** 4
    for lam in rep.eigenvalues:
        assert abs(np.polyval(coeffs, lam)) / scale < 1e-9


@given(ratios, drives, amps, amps)
def test_spectrum_matches_numeric_jacobian(r, G, a, b):
    p = ref_params(r, G)
    s = ScaledState(a, b)
    ev = eigenvalues4(fluctuation_matrix(p, s))
    ref = np.linalg.eigvals(oracles.numeric_jacobian(prm_tuple(p), s.as_real()))
    assert oracles.spectrum_distance(ev, ref) < 1e-5


@given(ratios, drives, amps, amps)
def test_parity_partner_has_identical_matrix(r, G, a, b):
    p = ref_params(r, G)
    s = ScaledState(a, b)
    np.testing.assert_array_equal(fluctuation_matrix(p, s), fluctuation_matrix(p, -s))


def test_reference_points():
    assert branch_stability(ref_params(0.8, 1.8), branch_occupations(ref_params(0.8, 1.8))[0]).stable
    p = ref_params(1.2, 2.3)
    assert not branch_stability(p, branch_occupations(p)[0]).stable
    assert branch_stability(p, find_branch(p, BranchKind.PLUS)).stable
    assert classify_phase(ref_params(0.8, 1.8)) is PhaseLabel.PSP
    assert classify_phase(ref_params(1.2, 2.3)) is PhaseLabel.PSBP
    assert classify_phase(ref_params(0.4, 2.3)) is PhaseLabel.BP


@given(st.floats(0.05, 0.97), st.floats(2.0, 3.1))
def test_minus_branch_always_unstable(r, G):
    p = ref_params(r, G)
    minus = find_branch(p, BranchKind.MINUS)
    assume(minus is not None and minus.n_scaled > 1e-6)
    assert branch_stability(p, minus).margin > EPS_STAB


@given(ratios, drives)
def test_routh_hurwitz_agrees_with_spectrum(r, G):
    p = ref_params(r, G)
    for br in branch_occupations(p):
        rep = branch_stability(p, br)
        assume(abs(rep.margin) > 1e-6)
        assert routh_hurwitz_stable(characteristic_polynomial(rep.matrix)) == rep.stable


def test_routh_hurwitz_simple_polynomials():
    assert routh_hurwitz_stable(np.poly([-1, -2, -3, -4]).real)
    assert not routh_hurwitz_stable(np.poly([1, -2, -3, -4]).real)
    assert not routh_hurwitz_stable(np.poly([0.1 + 1j, 0.1 - 1j, -3, -4]).real)


@pytest.mark.parametrize("ratio", [1.0, 1.2, 1.5])
def test_trivial_stability_flips_at_g_c2(ratio):
    p = ref_params(ratio)
    cs = critical_strengths(p)
    root = brentq(lambda G: stability_at(p.with_drive(G), ScaledState.zero()).margin,
                  cs.g_c2 - 0.05, min(cs.g_c2 + 0.05, 3.16), xtol=1e-14)
    assert abs(root - cs.g_c2) < 1e-6


@pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
def test_spectrum_scales_with_common_rescaling(s):
    for r, G in [(0.8, 1.8), (1.2, 2.3), (0.4, 2.3), (1.0, 2.3)]:
        p = ref_params(r, G)
        a, b = phase_report(p), phase_report(p.rescaled(s))
        assert a.label is b.label
        np.testing.assert_allclose(b.trivial.eigenvalues, s * a.trivial.eigenvalues, rtol=1e-10, atol=1e-12)
        if a.plus is not None:
            np.testing.assert_allclose(b.plus.eigenvalues, s * a.plus.eigenvalues, rtol=1e-9, atol=1e-10)


def test_marginal_flag_at_boundary():
    p = ref_params(1.0)
    cs = critical_strengths(p)
    rep = stability_at(p.with_drive(cs.g_c2), ScaledState.zero())
    assert rep.marginal and abs(rep.margin) < EPS_STAB
    assert not rep.stable


def test_both_parity_partners_share_verdict():
    p = ref_params(0.4, 2.3)
    br = find_branch(p, BranchKind.PLUS)
    s, t = reconstruct_amplitudes(p, br)
    assert stability_at(p, s).margin == stability_at(p, t).margin
