"""Extended-space verification: involutions, Jacobians, exact enumeration."""

import math

import numpy as np
import pytest

from multitry.balance import (
    CheckReport,
    DegenerateTransformError,
    DiscreteKernelSpec,
    ExtendedSpaceSpec,
    UndefinedRatioError,
    acceptance_from_spec,
    acceptance_log_ratio_from_spec,
    check_detailed_balance,
    check_involution,
    check_marginality,
    enumerate_mtm_transition_matrix,
    format_reports,
    jacobian_log_abs,
    line_discrete_spec,
    make_mh_extended_spec,
    make_mtm_extended_spec,
    stationary_violation,
    verification_suite,
    write_reports_csv,
)
from multitry.weights import WeightKind, WeightSpec

RNG = np.random.default_rng(55)

ALL_WEIGHTS = [WeightSpec(kind) for kind in WeightKind]


def std_log_pi(x):
    x = np.asarray(x, dtype=float)
    return float(-0.5 * np.sum(x ** 2) - 0.5 * x.size * math.log(2 * math.pi))


def unit_rw_log_t(a, b):
    r = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return float(-0.5 * np.sum(r ** 2) - 0.5 * r.size * math.log(2 * math.pi))


def mh_gaussian_spec():
    return make_mh_extended_spec(std_log_pi, unit_rw_log_t)


def mtm_gaussian_spec(M=3, weight=WeightSpec(WeightKind.PROPORTIONAL)):
    return make_mtm_extended_spec(std_log_pi, lambda m, a, b: unit_rw_log_t(a, b),
                                  M=M, weight=weight)


def mtm_point(M=3, d=2, seed=None):
    rng = RNG if seed is None else np.random.default_rng(seed)
    return (rng.standard_normal(d), rng.standard_normal((M, d)),
            int(rng.integers(M)), rng.standard_normal((M - 1, d)))


# ---------------------------------------------------------------------------
# involution checks


def test_mh_swap_is_an_involution():
    spec = mh_gaussian_spec()
    pts = [(RNG.standard_normal(2), RNG.standard_normal(2)) for _ in range(50)]
    report = check_involution(spec, pts)
    assert report.passed and report.max_violation == 0.0


def test_mtm_insert_delete_is_an_involution():
    spec = mtm_gaussian_spec()
    report = check_involution(spec, [mtm_point() for _ in range(50)])
    assert report.passed
    assert report.max_violation <= 1e-15


def test_mtm_involution_moves_the_selected_candidate():
    spec = mtm_gaussian_spec(M=3)
    p = mtm_point(M=3, seed=1)
    x, ys, j, xs_minus = p
    q = spec.involution(p)
    np.testing.assert_array_equal(q[0], ys[j])
    assert q[2] == j
    # the old current point is embedded at slot j of the new candidate set
    np.testing.assert_array_equal(q[1][j], x)
    np.testing.assert_array_equal(np.delete(q[1], j, axis=0), xs_minus)
    np.testing.assert_array_equal(q[3], np.delete(ys, j, axis=0))


def test_broken_involution_is_detected():
    # a shift composed with the swap is not self-inverse
    def shifted_swap(p):
        x, y = p
        return (np.asarray(y, float) + 1.0, np.asarray(x, float))

    spec = ExtendedSpaceSpec(
        component_roles=("current", "candidate"),
        log_joint=lambda p: std_log_pi(p[0]),
        involution=shifted_swap,
        continuous_mask=(True, True),
    )
    report = check_involution(spec, [(np.zeros(2), np.ones(2))])
    assert not report.passed
    assert report.max_violation >= 1.0


def test_involution_check_flags_discrete_block_changes():
    spec = ExtendedSpaceSpec(
        component_roles=("index",),
        log_joint=lambda p: 0.0,
        involution=lambda p: (p[0] + 1,),
        continuous_mask=(False,),
    )
    report = check_involution(spec, [(0,)])
    assert not report.passed and report.max_violation == math.inf


# ---------------------------------------------------------------------------
# Jacobians


def test_permutation_jacobians_vanish():
    mh = mh_gaussian_spec()
    assert abs(jacobian_log_abs(mh, (np.ones(2), -np.ones(2)))) < 1e-8
    mtm = mtm_gaussian_spec()
    assert abs(jacobian_log_abs(mtm, mtm_point(seed=2))) < 1e-6


def test_scaling_involution_jacobian_is_analytic():
    # g(x) = c / x on one coordinate: |det J| = c / x^2
    c = 2.0
    spec = ExtendedSpaceSpec(
        component_roles=("value",),
        log_joint=lambda p: float(-p[0][0]),
        involution=lambda p: (np.array([c / p[0][0]]),),
        continuous_mask=(True,),
    )
    for x in (0.7, 1.3, 2.5):
        expected = math.log(c / x ** 2)
        got = jacobian_log_abs(spec, (np.array([x]),))
        assert got == pytest.approx(expected, abs=1e-7)
    # reciprocity holds with a nontrivial Jacobian in the ratio
    p = (np.array([0.9]),)
    fwd = acceptance_log_ratio_from_spec(spec, p)
    bwd = acceptance_log_ratio_from_spec(spec, spec.involution(p))
    assert fwd + bwd == pytest.approx(0.0, abs=1e-7)


def test_singular_transform_raises():
    spec = ExtendedSpaceSpec(
        component_roles=("pair",),
        log_joint=lambda p: 0.0,
        involution=lambda p: (np.full(2, p[0][0] + p[0][1]),),
        continuous_mask=(True,),
    )
    with pytest.raises(DegenerateTransformError):
        jacobian_log_abs(spec, (np.array([0.3, 0.4]),))


def test_jacobian_of_all_discrete_point_is_zero():
    spec = ExtendedSpaceSpec(
        component_roles=("index",),
        log_joint=lambda p: 0.0,
        involution=lambda p: p,
        continuous_mask=(False,),
    )
    assert jacobian_log_abs(spec, (3,)) == 0.0


# ---------------------------------------------------------------------------
# acceptance ratios from specifications


def test_mh_spec_reproduces_metropolis_acceptance():
    spec = mh_gaussian_spec()
    for _ in range(20):
        x, y = RNG.standard_normal(2), RNG.standard_normal(2)
        expected = min(1.0, math.exp(min(std_log_pi(y) - std_log_pi(x), 0.0)))
        assert acceptance_from_spec(spec, (x, y)) == pytest.approx(expected, abs=1e-8)


def test_mtm_spec_matches_independent_general_form():
    # the same ratio coded from scratch: weights, softmax selection,
    # proposal terms, no calls into the package
    M, d = 3, 2
    spec = mtm_gaussian_spec(M=M)

    def local_softmax_log(vals):
        vals = np.asarray(vals, dtype=float)
        top = vals.max()
        return vals - top - math.log(np.exp(vals - top).sum())

    for seed in range(15):
        x, ys, j, xs_minus = mtm_point(M=M, d=d, seed=100 + seed)
        y = ys[j]
        xstar = np.insert(xs_minus, j, x, axis=0)
        p_fwd = local_softmax_log([std_log_pi(v) for v in ys])[j]
        p_bwd = local_softmax_log([std_log_pi(v) for v in xstar])[j]
        expected = (std_log_pi(y) + unit_rw_log_t(y, x) + p_bwd
                    - std_log_pi(x) - unit_rw_log_t(x, y) - p_fwd)
        got = acceptance_log_ratio_from_spec(spec, (x, ys, j, xs_minus))
        assert got == pytest.approx(expected, abs=1e-6)


def test_off_support_ratios():
    def boxed_log_pi(x):
        return 0.0 if np.all(np.abs(x) <= 1.0) else -math.inf

    spec = make_mh_extended_spec(boxed_log_pi, unit_rw_log_t)
    inside, outside = np.zeros(2), np.full(2, 3.0)
    assert acceptance_log_ratio_from_spec(spec, (inside, outside)) == -math.inf
    assert acceptance_from_spec(spec, (inside, outside)) == 0.0
    assert acceptance_log_ratio_from_spec(spec, (outside, inside)) == math.inf
    assert acceptance_from_spec(spec, (outside, inside)) == 1.0
    with pytest.raises(UndefinedRatioError):
        acceptance_log_ratio_from_spec(spec, (outside, outside + 1.0))


def test_ratio_reciprocity_over_random_points():
    for weight in (WeightSpec(WeightKind.PROPORTIONAL), WeightSpec(WeightKind.LOCALLY_BALANCED)):
        spec = mtm_gaussian_spec(M=2, weight=weight)
        for seed in range(10):
            p = mtm_point(M=2, seed=200 + seed)
            fwd = acceptance_log_ratio_from_spec(spec, p)
            bwd = acceptance_log_ratio_from_spec(spec, spec.involution(p))
            assert fwd + bwd == pytest.approx(0.0, abs=1e-8)


# ---------------------------------------------------------------------------
# exact discrete enumeration


def test_line_spec_structure():
    spec = line_discrete_spec(np.full(4, 0.25))
    t = spec.proposal_probs
    np.testing.assert_allclose(t.sum(axis=1), 1.0)
    assert np.all(np.diag(t) == 0.0)
    np.testing.assert_allclose(t[0], [0.0, 1.0, 0.0, 0.0])
    np.testing.assert_allclose(t[3], [0.0, 0.0, 1.0, 0.0])
    np.testing.assert_allclose(t[1], [0.5, 0.0, 0.5, 0.0])


def test_transition_matrix_rows_sum_to_one():
    spec = line_discrete_spec(np.array([0.4, 0.1, 0.2, 0.1, 0.2]))
    for weight in ALL_WEIGHTS:
        for M in (1, 2, 3):
            P = enumerate_mtm_transition_matrix(spec, M, weight)
            np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
            assert np.all(P >= -1e-15)


def test_single_candidate_enumeration_equals_metropolis_matrix():
    pi = np.array([0.4, 0.1, 0.2, 0.1, 0.2])
    spec = line_discrete_spec(pi)
    t = spec.proposal_probs
    s = pi.size
    expected = np.zeros((s, s))
    for i in range(s):
        for j in range(s):
            if i == j or t[i, j] == 0.0:
                continue
            accept = min(1.0, (pi[j] * t[j, i]) / (pi[i] * t[i, j]))
            expected[i, j] = t[i, j] * accept
        expected[i, i] = 1.0 - expected[i].sum()
    P = enumerate_mtm_transition_matrix(spec, 1, WeightSpec(WeightKind.PROPORTIONAL))
    np.testing.assert_allclose(P, expected, atol=1e-14)


@pytest.mark.parametrize("weight", ALL_WEIGHTS, ids=[w.label() for w in ALL_WEIGHTS])
def test_enumerated_kernel_is_exactly_stationary(weight):
    for pi in (np.full(5, 0.2), np.array([0.4, 0.1, 0.2, 0.1, 0.2])):
        spec = line_discrete_spec(pi)
        for M in (1, 2):
            P = enumerate_mtm_transition_matrix(spec, M, weight)
            assert stationary_violation(P, pi) < 1e-10
            assert check_detailed_balance(P, pi).passed


def test_stationarity_detects_broken_matrix():
    pi = np.full(5, 0.2)
    spec = line_discrete_spec(pi)
    P = enumerate_mtm_transition_matrix(spec, 2, WeightSpec(WeightKind.PROPORTIONAL))
    P[0, 1] += 1e-3
    P[0, 0] -= 1e-3
    assert stationary_violation(P, pi) > 1e-5
    assert not check_detailed_balance(P, pi).passed


def test_marginality_passes_for_honest_spec():
    spec = line_discrete_spec(np.array([0.4, 0.1, 0.2, 0.1, 0.2]))
    for weight in (WeightSpec(WeightKind.PROPORTIONAL), WeightSpec(WeightKind.JUMP_DISTANCE)):
        report = check_marginality(spec, M=3, weight=weight)
        assert report.passed, report


def test_marginality_catches_unnormalised_proposal():
    pi = np.full(5, 0.2)
    honest = line_discrete_spec(pi)
    broken = DiscreteKernelSpec(
        states=honest.states,
        target_probs=pi,
        proposal_probs=honest.proposal_probs * 1.1,
    )
    report = check_marginality(broken, M=2, weight=WeightSpec(WeightKind.PROPORTIONAL))
    assert not report.passed
    assert report.max_violation > 1e-3
    # the plain-MH shape of the check fails too
    assert not check_marginality(broken).passed


def test_discrete_spec_validation():
    with pytest.raises(ValueError):
        DiscreteKernelSpec(states=np.zeros((2, 2)), target_probs=np.full(4, 0.25),
                           proposal_probs=np.eye(4))
    with pytest.raises(ValueError):
        DiscreteKernelSpec(states=np.arange(3.0), target_probs=np.array([0.5, 0.4, 0.4]),
                           proposal_probs=np.eye(3))
    with pytest.raises(ValueError):
        DiscreteKernelSpec(states=np.arange(3.0), target_probs=np.full(3, 1 / 3),
                           proposal_probs=np.eye(4))


def test_per_candidate_proposal_stack_must_match_m():
    spec = DiscreteKernelSpec(
        states=np.arange(3.0),
        target_probs=np.full(3, 1 / 3),
        proposal_probs=np.broadcast_to(line_discrete_spec(np.full(3, 1 / 3)).proposal_probs,
                                       (2, 3, 3)).copy(),
    )
    P = enumerate_mtm_transition_matrix(spec, 2, WeightSpec(WeightKind.PROPORTIONAL))
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
    with pytest.raises(ValueError):
        spec.matrices(3)


def test_enumeration_size_guard():
    spec = line_discrete_spec(np.full(5, 0.2))
    with pytest.raises(ValueError):
        enumerate_mtm_transition_matrix(spec, 6, WeightSpec(WeightKind.PROPORTIONAL))


# ---------------------------------------------------------------------------
# suite and reporting


def test_verification_suite_all_pass():
    reports = verification_suite(n_points=40)
    assert len(reports) == 68
    failures = [r for r in reports if not r.passed]
    assert failures == []


def test_format_reports_lines():
    reports = [
        CheckReport("alpha", 1e-14, 1e-10, True, "fine"),
        CheckReport("beta", 2.0, 1e-10, False),
    ]
    text = format_reports(reports)
    lines = text.splitlines()
    assert lines[0].startswith("[PASS] alpha:") and "fine" in lines[0]
    assert lines[1].startswith("[FAIL] beta:")


def test_reports_csv(tmp_path):
    reports = [CheckReport("alpha", 1e-14, 1e-10, True)]
    path = tmp_path / "reports.csv"
    write_reports_csv(reports, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "check,max_violation,tolerance,passed"
    name, violation, tol, passed = lines[1].split(",")
    assert name == "alpha" and float(violation) == 1e-14 and passed == "1"
