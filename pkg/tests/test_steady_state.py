import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from cavmag.dynamics import mean_field_rhs
from cavmag.errors import NumericalInconsistency, ZeroCoupling
from cavmag.params import SystemParams
from cavmag.steady_state import (
    Branch,
    BranchKind,
    branch_occupations,
    critical_strengths,
    derived_quantities,
    find_branch,
    photon_occupation,
    plus_root,
    reconstruct_amplitudes,
)
from conftest import ref_params, prm_tuple

ratios = st.floats(0.05, 1.5)
drives = st.floats(0.0, 3.1)


def _state_norm(s):
    return math.sqrt(abs(s.alpha) ** 2 + abs(s.beta) ** 2)


def test_derived_quantities_examples():
    d = derived_quantities(ref_params(1.0, 2.3))
    assert d.eta == pytest.approx(5.76 / 4.71, rel=1e-14)
    assert derived_quantities(ref_params(1.0, 0.0)).eta == pytest.approx(0.576, rel=1e-14)
    p = SystemParams(3.0, 2.0, 0.0, 1.5)
    d = derived_quantities(p)
    assert (d.eta, d.delta_m_prime, d.gamma_prime) == (0.0, 2.0, 1.0)


@given(ratios, drives)
def test_derived_quantities_invariants(r, G):
    d = derived_quantities(ref_params(r, G))
    assert d.eta > 0
    assert d.gamma_prime > 1.0


def test_critical_constants_reference_values():
    cs = critical_strengths(ref_params(1.0))
    assert cs.zeta == pytest.approx(0.976, abs=1e-3)
    assert cs.g_c1 == pytest.approx(2.024, abs=1e-3)
    assert cs.g_c2 == pytest.approx(2.025, abs=1e-3)
    assert cs.g_c2_applicable


def test_critical_constants_match_root_oracles():
    cs = critical_strengths(ref_params(1.0))
    assert cs.g_c1 == pytest.approx(oracles.g_c1_root(3.0, 2.4), rel=1e-12)
    assert cs.g_c2 == pytest.approx(oracles.g_c2_root(3.0, 3.0, 2.4), rel=1e-12)
    assert cs.zeta == pytest.approx(oracles.zeta_root(3.0, 2.4), abs=1e-6)


def test_g_c2_flagged_outside_window():
    cs = critical_strengths(ref_params(0.3))
    assert cs.g_c2 == pytest.approx(4.18453, abs=1e-5)
    assert not cs.g_c2_applicable


@given(st.floats(0.05, 1.5), st.floats(0.05, 1.5))
def test_g_c1_independent_of_magnon_detuning(r1, r2):
    assert critical_strengths(ref_params(r1)).g_c1 == critical_strengths(ref_params(r2)).g_c1


@given(st.floats(2.0, 5.0), st.floats(1.0, 3.0), st.floats(0.5, 2.0))
def test_critical_drives_meet_at_zeta(dc, g, gamma):
    base = SystemParams(dc, dc, g, 0.0, 1.0, gamma)
    cs = critical_strengths(base)
    at_zeta = critical_strengths(base.with_ratio(cs.zeta))
    assume(at_zeta.g_c2_applicable)
    assert abs(at_zeta.g_c1 - at_zeta.g_c2) < 1e-9


@given(st.floats(0.05, 0.95))
def test_discriminant_vanishes_at_g_c1(r):
    p = ref_params(r)
    assume(r < critical_strengths(p).zeta)
    gc1 = critical_strengths(p).g_c1
    d = derived_quantities(p.with_drive(gc1))
    assert abs(d.eta * gc1 - d.gamma_prime) < 1e-8


@given(st.floats(0.98, 1.5))
def test_plus_root_vanishes_at_g_c2(r):
    cs = critical_strengths(ref_params(r))
    assume(cs.g_c2_applicable)
    assert abs(plus_root(ref_params(r, cs.g_c2))) < 1e-8


def test_branch_examples():
    assert find_branch(ref_params(1.0, 2.3), BranchKind.PLUS).n_scaled == pytest.approx(2.392182496693897, rel=1e-13)
    assert find_branch(ref_params(0.3, 2.3), BranchKind.PLUS).n_scaled == pytest.approx(4.492182496693897, rel=1e-13)
    assert branch_occupations(ref_params(1.0, 0.0)) == [Branch(BranchKind.TRIVIAL, 0.0)]


@given(ratios, drives)
def test_branches_match_quadratic_oracle(r, G):
    p = ref_params(r, G)
    got = {b.kind: b.n_scaled for b in branch_occupations(p)}
    assert got[BranchKind.TRIVIAL] == 0.0
    for kind, sign in ((BranchKind.PLUS, +1), (BranchKind.MINUS, -1)):
        n = oracles.n_plus_direct(prm_tuple(p), sign)
        if kind in got:
            assert got[kind] == pytest.approx(n, rel=1e-9, abs=1e-9)
        else:
            assert not (n >= 1e-9)


@given(ratios, drives)
def test_branch_existence_follows_critical_drive_cases(r, G):
    p = ref_params(r, G)
    cs = critical_strengths(p)
    assume(abs(G - cs.g_c1) > 1e-7 and not abs(G - cs.g_c2) < 1e-7)
    assume(abs(r - cs.zeta) > 1e-6)
    kinds = {b.kind for b in branch_occupations(p)}
    upper = cs.g_c2 if cs.g_c2_applicable else math.inf
    if r < cs.zeta:
        assert (BranchKind.PLUS in kinds) == (G > cs.g_c1)
        assert (BranchKind.MINUS in kinds) == (cs.g_c1 < G < upper)
    else:
        assert (BranchKind.PLUS in kinds) == (G > upper)
        assert BranchKind.MINUS not in kinds


def test_trivial_reconstruction_is_origin():
    s, t = reconstruct_amplitudes(ref_params(1.0, 2.3), Branch(BranchKind.TRIVIAL, 0.0))
    assert s.alpha == s.beta == t.alpha == t.beta == 0


def test_phase_identity_on_plus_branch():
    p = ref_params(1.0, 2.3)
    br = find_branch(p, BranchKind.PLUS)
    d = derived_quantities(p)
    a_prime = complex(d.delta_m_prime + p.gamma * br.n_scaled, -d.gamma_prime)
    assert abs(abs(-a_prime / (d.eta * p.big_g)) - 1.0) < 1e-10


def test_foreign_branch_rejected():
    with pytest.raises(NumericalInconsistency):
        reconstruct_amplitudes(ref_params(1.0, 2.3), Branch(BranchKind.PLUS, 10.0))


@given(ratios, drives)
def test_reconstructed_states_are_fixed_points(r, G):
    p = ref_params(r, G)
    for br in branch_occupations(p)[1:]:
        s, t = reconstruct_amplitudes(p, br)
        assert t.alpha == -s.alpha and t.beta == -s.beta
        assert abs(s.beta) ** 2 == pytest.approx(br.n_scaled, rel=1e-12, abs=1e-14)
        for state in (s, t):
            da, db = mean_field_rhs(p, state)
            assert math.hypot(abs(da), abs(db)) <= 1e-10 * max(1.0, _state_norm(state))
        assert -math.pi / 2 < math.atan2(s.beta.imag, s.beta.real) <= math.pi / 2 or br.n_scaled == 0


def test_plus_branch_agrees_with_long_time_integration():
    p = ref_params(1.0, 2.3)
    sol = oracles.scipy_trajectory(prm_tuple(p), [2.1, 1.1, 2.1, -1.1], 300.0)
    n_ode = sol.y[2, -1] ** 2 + sol.y[3, -1] ** 2
    assert n_ode == pytest.approx(find_branch(p, BranchKind.PLUS).n_scaled, abs=1e-7)


def test_photon_occupation_examples():
    p = ref_params(1.0, 2.3)
    assert photon_occupation(p, 0.0) == 0.0
    assert photon_occupation(p, 2.392) == pytest.approx(((3 + 2.392) ** 2 + 1) * 2.392 / 5.76, rel=1e-14)
    assert photon_occupation(p, 2.392) == pytest.approx(12.49, abs=0.01)
    with pytest.raises(ZeroCoupling):
        photon_occupation(SystemParams(3.0, 3.0, 0.0, 1.0), 1.0)


@given(ratios, drives)
def test_photon_occupation_matches_reconstructed_cavity_amplitude(r, G):
    p = ref_params(r, G)
    for br in branch_occupations(p)[1:]:
        s, _ = reconstruct_amplitudes(p, br)
        assume(br.n_scaled > 1e-6)
        assert photon_occupation(p, br.n_scaled) == pytest.approx(abs(s.alpha) ** 2, rel=1e-8)


@pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
def test_occupations_invariant_under_common_rescaling(s):
    for r, G in [(1.0, 2.3), (0.3, 2.3), (1.2, 2.1)]:
        a = branch_occupations(ref_params(r, G))
        b = branch_occupations(ref_params(r, G).rescaled(s))
        assert [x.kind for x in a] == [x.kind for x in b]
        np.testing.assert_allclose([x.n_scaled for x in a], [x.n_scaled for x in b], rtol=1e-10)
