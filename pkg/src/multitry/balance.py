"""Stationarity and reversibility verification tools.

Any Metropolis-style kernel can be phrased as: draw auxiliary variables
to form an extended point, apply a deterministic involution g to it, and
accept with probability

    a(p) = min(1, exp(log_joint(g(p)) - log_joint(p)) * |det Jg(p)|)

where Jg is the Jacobian of g restricted to the continuous components.
Correctness then rests on checkable facts: g is an involution, the
joint density marginalises to the target, and the acceptance ratio
satisfies r(g(p)) = 1 / r(p). This module checks all three numerically
for user-supplied specifications, ships ready-made specifications for
plain Metropolis-Hastings and the multiple-try kernel, and, for small
discrete state spaces, enumerates the exact multiple-try transition
matrix so stationarity and detailed balance can be verified to floating
point accuracy.

The discrete enumeration deliberately calls the same weight and
acceptance functions as the production kernel, so it certifies the code
path that real chains execute.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from .weights import log_sum_exp

from . import weights as weights_mod
from .kernels import general_acceptance_log_ratio
from .weights import WeightSpec, ZeroWeightError

__all__ = [
    "ExtendedSpaceSpec",
    "DiscreteKernelSpec",
    "CheckReport",
    "DegenerateTransformError",
    "UndefinedRatioError",
    "make_mh_extended_spec",
    "make_mtm_extended_spec",
    "check_involution",
    "jacobian_log_abs",
    "acceptance_log_ratio_from_spec",
    "acceptance_from_spec",
    "enumerate_mtm_transition_matrix",
    "stationary_violation",
    "check_detailed_balance",
    "check_marginality",
    "format_reports",
    "write_reports_csv",
    "line_discrete_spec",
    "verification_suite",
]

FD_STEP_FACTOR = 1.0e-5


class DegenerateTransformError(RuntimeError):
    """The involution's Jacobian is numerically singular."""


class UndefinedRatioError(ZeroDivisionError):
    """Both joint densities vanish, so the acceptance ratio is 0/0."""


@dataclass(frozen=True)
class ExtendedSpaceSpec:
    """A kernel phrased as involution + joint density on an extended space.

    Points are tuples of blocks; each block is a float array (continuous)
    or an int (discrete), as declared by ``continuous_mask``.

    Attributes:
        component_roles: human-readable name per block, e.g.
            ``("current", "candidates", "selected", "reverse")``.
        log_joint: extended point -> float (``-inf`` off support).
        involution: extended point -> extended point; must be its own
            inverse.
        continuous_mask: one flag per block; only continuous blocks enter
            the Jacobian.
    """

    component_roles: tuple
    log_joint: Callable
    involution: Callable
    continuous_mask: tuple

    def flatten(self, point) -> np.ndarray:
        parts = [np.ravel(np.asarray(b, dtype=float))
                 for b, c in zip(point, self.continuous_mask) if c]
        return np.concatenate(parts) if parts else np.empty(0)

    def unflatten(self, template, vec: np.ndarray):
        out = []
        pos = 0
        for block, cont in zip(template, self.continuous_mask):
            if not cont:
                out.append(block)
                continue
            arr = np.asarray(block, dtype=float)
            size = arr.size
            out.append(vec[pos:pos + size].reshape(arr.shape))
            pos += size
        return tuple(out)


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one verification check."""

    name: str
    max_violation: float
    tolerance: float
    passed: bool
    detail: str = ""


def format_reports(reports: Sequence[CheckReport]) -> str:
    lines = []
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        line = f"[{status}] {r.name}: max violation {r.max_violation:.3e} (tol {r.tolerance:.1e})"
        if r.detail:
            line += f" -- {r.detail}"
        lines.append(line)
    return "\n".join(lines)


def write_reports_csv(reports: Sequence[CheckReport], path) -> None:
    with open(path, "w") as fh:
        fh.write("check,max_violation,tolerance,passed\n")
        for r in reports:
            fh.write(f"{r.name},{r.max_violation!r},{r.tolerance!r},{int(r.passed)}\n")


# ---------------------------------------------------------------------------
# generic checks


def check_involution(spec: ExtendedSpaceSpec, samples, tol: float = 1.0e-12) -> CheckReport:
    """Verify g(g(p)) == p blockwise over a collection of extended points."""
    worst = 0.0
    detail = ""
    for idx, p in enumerate(samples):
        q = spec.involution(spec.involution(p))
        for role, b0, b1, cont in zip(spec.component_roles, p, q, spec.continuous_mask):
            if cont:
                err = float(np.max(np.abs(np.asarray(b0, float) - np.asarray(b1, float))))
            else:
                err = 0.0 if b0 == b1 else math.inf
            if err > worst:
                worst = err
                detail = f"point {idx}, block {role!r}"
    return CheckReport("involution", worst, tol, worst <= tol, detail)


def jacobian_log_abs(spec: ExtendedSpaceSpec, point) -> float:
    """log |det Jg| at ``point`` by central finite differences.

    The Jacobian is taken with respect to the continuous blocks only;
    step sizes scale with coordinate magnitude.
    """
    base = spec.flatten(point)
    k = base.size
    if k == 0:
        return 0.0

    def g_cont(vec):
        return spec.flatten(spec.involution(spec.unflatten(point, vec)))

    jac = np.empty((k, k))
    for col in range(k):
        h = FD_STEP_FACTOR * max(1.0, abs(base[col]))
        hi = base.copy()
        lo = base.copy()
        hi[col] += h
        lo[col] -= h
        jac[:, col] = (g_cont(hi) - g_cont(lo)) / (2.0 * h)
    sign, logdet = np.linalg.slogdet(jac)
    if sign == 0 or not np.isfinite(logdet):
        raise DegenerateTransformError("involution Jacobian is numerically singular")
    return float(logdet)


def acceptance_log_ratio_from_spec(spec: ExtendedSpaceSpec, point) -> float:
    """Unclamped log acceptance ratio log_joint(g(p)) - log_joint(p) + log|det Jg|."""
    lp = spec.log_joint(point)
    lq = spec.log_joint(spec.involution(point))
    if lp == -np.inf and lq == -np.inf:
        raise UndefinedRatioError("acceptance ratio is 0/0 off support")
    if lp == -np.inf:
        return np.inf
    if lq == -np.inf:
        return -np.inf
    return float(lq - lp + jacobian_log_abs(spec, point))


def acceptance_from_spec(spec: ExtendedSpaceSpec, point) -> float:
    """Acceptance probability min(1, r) derived from the specification."""
    return float(min(1.0, math.exp(min(acceptance_log_ratio_from_spec(spec, point), 0.0))))


# ---------------------------------------------------------------------------
# ready-made extended-space specifications


def make_mh_extended_spec(log_pi: Callable, log_t: Callable) -> ExtendedSpaceSpec:
    """Plain Metropolis-Hastings: extended point (x, y), involution swap.

    ``log_t(a, b)`` is the log proposal density of moving a -> b.
    """
    def joint(p):
        x, y = p
        return log_pi(x) + log_t(x, y)

    def swap(p):
        x, y = p
        return (np.array(y, dtype=float, copy=True), np.array(x, dtype=float, copy=True))

    return ExtendedSpaceSpec(
        component_roles=("current", "candidate"),
        log_joint=joint,
        involution=swap,
        continuous_mask=(True, True),
    )


def make_mtm_extended_spec(
    log_pi: Callable,
    log_t: Callable,
    M: int,
    weight: WeightSpec,
) -> ExtendedSpaceSpec:
    """Multiple-try kernel on the extended space (x, y_1..y_M, J, x*_{-J}).

    ``log_t(m, a, b)`` is candidate m's log proposal density for a -> b;
    proposals enter the weights through the production weight functions,
    so the acceptance ratio this spec induces is exactly the kernel's
    general form. The involution swaps x with y_J and the candidate set
    with the reverse set, a coordinate permutation.
    """

    def selection_log_prob(pts: np.ndarray, centre: np.ndarray, j: int) -> float:
        lp = np.array([log_pi(p) for p in pts])
        lt_fwd = np.array([log_t(m, centre, pts[m]) for m in range(M)])
        lt_bwd = np.array([log_t(m, pts[m], centre) for m in range(M)])
        lw = weights_mod.log_weights(weight, pts, centre, lp, lt_fwd, lt_bwd)
        return float(weights_mod.selection_log_probs(lw)[j])

    def joint(p):
        x, ys, j, xs_minus = p
        lp = log_pi(x)
        if lp == -np.inf:
            return -np.inf
        for m in range(M):
            lp += log_t(m, x, ys[m])
        try:
            lp += selection_log_prob(ys, x, j)
        except ZeroWeightError:
            return -np.inf
        others = [m for m in range(M) if m != j]
        for row, m in enumerate(others):
            lp += log_t(m, ys[j], xs_minus[row])
        return lp

    def invol(p):
        x, ys, j, xs_minus = p
        y = np.array(ys[j], dtype=float, copy=True)
        xs_full = np.insert(np.atleast_2d(xs_minus), j, x, axis=0)
        new_xs_minus = np.delete(np.atleast_2d(ys), j, axis=0)
        return (y, xs_full, j, new_xs_minus)

    return ExtendedSpaceSpec(
        component_roles=("current", "candidates", "selected", "reverse"),
        log_joint=joint,
        involution=invol,
        continuous_mask=(True, True, False, True),
    )


# ---------------------------------------------------------------------------
# exact discrete enumeration


@dataclass(frozen=True)
class DiscreteKernelSpec:
    """A finite-state multiple-try setup small enough to enumerate.

    Attributes:
        states: numeric value of each state (used by distance-based
            weights), shape (S,).
        target_probs: stationary candidate pi, shape (S,), summing to 1.
        proposal_probs: row-stochastic proposal matrix, either one (S, S)
            matrix shared by every candidate slot or a distinct (M, S, S)
            stack.
    """

    states: np.ndarray
    target_probs: np.ndarray
    proposal_probs: np.ndarray

    def __post_init__(self) -> None:
        states = np.asarray(self.states, dtype=float)
        pi = np.asarray(self.target_probs, dtype=float)
        t = np.asarray(self.proposal_probs, dtype=float)
        if states.ndim != 1:
            raise ValueError("states must be 1-d")
        s = states.size
        if pi.shape != (s,) or np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-12:
            raise ValueError("target_probs must be a distribution over the states")
        if t.ndim not in (2, 3) or t.shape[-2:] != (s, s):
            raise ValueError("proposal_probs must be (S, S) or (M, S, S)")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "target_probs", pi)
        object.__setattr__(self, "proposal_probs", t)

    def matrices(self, M: int) -> np.ndarray:
        if self.proposal_probs.ndim == 2:
            return np.broadcast_to(self.proposal_probs,
                                   (M,) + self.proposal_probs.shape)
        if self.proposal_probs.shape[0] != M:
            raise ValueError("per-candidate proposal stack does not match M")
        return self.proposal_probs


def _log(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(x)


def enumerate_mtm_transition_matrix(
    spec: DiscreteKernelSpec,
    M: int,
    weight: WeightSpec,
) -> np.ndarray:
    """Exact transition matrix of the multiple-try kernel on a finite space.

    Sums over every candidate tuple, selection, and reverse tuple,
    weighting each outcome by the production selection probabilities and
    the general acceptance ratio. Candidate tuples whose weights all
    vanish contribute a rejection, matching the kernel.
    """
    s = spec.states.size
    if s ** M * s ** (M - 1) > 5_000_000:
        raise ValueError("state space too large to enumerate")
    t_mats = spec.matrices(M)
    log_pi = _log(spec.target_probs)
    log_t = _log(t_mats)
    pts = spec.states

    P = np.zeros((s, s))
    supports = [[np.flatnonzero(t_mats[m][ix]) for m in range(M)] for ix in range(s)]
    for ix in range(s):
        for cand in itertools.product(*supports[ix]):
            cand = np.asarray(cand)
            prob_cand = float(np.prod([t_mats[m][ix, cand[m]] for m in range(M)]))
            lw_fwd = weights_mod.log_weights(
                weight, pts[cand], pts[ix],
                log_pi[cand],
                np.array([log_t[m][ix, cand[m]] for m in range(M)]),
                np.array([log_t[m][cand[m], ix] for m in range(M)]),
            )
            try:
                log_probs_fwd = weights_mod.selection_log_probs(lw_fwd)
            except ZeroWeightError:
                P[ix, ix] += prob_cand
                continue
            p_fwd = np.exp(log_probs_fwd)
            for j in range(M):
                if p_fwd[j] == 0.0:
                    continue
                iy = cand[j]
                others = [m for m in range(M) if m != j]
                rev_supports = [np.flatnonzero(t_mats[m][iy]) for m in others]
                for rev in itertools.product(*rev_supports):
                    full_rev = np.empty(M, dtype=int)
                    full_rev[j] = ix
                    for pos, m in enumerate(others):
                        full_rev[m] = rev[pos]
                    prob_rev = float(np.prod([t_mats[m][iy, full_rev[m]] for m in others])) if others else 1.0
                    lw_rev = weights_mod.log_weights(
                        weight, pts[full_rev], pts[iy],
                        log_pi[full_rev],
                        np.array([log_t[m][iy, full_rev[m]] for m in range(M)]),
                        np.array([log_t[m][full_rev[m], iy] for m in range(M)]),
                    )
                    den = log_sum_exp(lw_rev)
                    if den == -np.inf:
                        accept = 0.0
                    else:
                        log_ratio = general_acceptance_log_ratio(
                            log_pi[ix], log_pi[iy],
                            log_t_x_given_y=log_t[j][iy, ix],
                            log_t_y_given_x=log_t[j][ix, iy],
                            log_p_forward=float(log_probs_fwd[j]),
                            log_p_backward=float(lw_rev[j] - den),
                        )
                        accept = min(1.0, math.exp(min(log_ratio, 0.0)))
                    mass = prob_cand * p_fwd[j] * prob_rev
                    P[ix, iy] += mass * accept
                    P[ix, ix] += mass * (1.0 - accept)
    return P


def stationary_violation(P: np.ndarray, pi: np.ndarray) -> float:
    """max_j |(pi P)_j - pi_j|."""
    pi = np.asarray(pi, dtype=float)
    return float(np.max(np.abs(pi @ P - pi)))


def check_detailed_balance(P: np.ndarray, pi: np.ndarray, tol: float = 1.0e-10) -> CheckReport:
    """Verify pi_i P_ij == pi_j P_ji for every pair."""
    pi = np.asarray(pi, dtype=float)
    flux = pi[:, None] * P
    gap = np.abs(flux - flux.T)
    worst = float(np.max(gap))
    i, j = np.unravel_index(np.argmax(gap), gap.shape)
    return CheckReport("detailed-balance", worst, tol, worst <= tol,
                       f"worst pair ({i}, {j})")


def check_marginality(
    spec: DiscreteKernelSpec,
    M: int = 1,
    weight: WeightSpec | None = None,
    tol: float = 1.0e-12,
) -> CheckReport:
    """Verify the extended joint sums back to the target.

    With ``weight`` given, sums pi(x) * prod_m T_m(y_m|x) * p(J|...) *
    prod_{m != J} T_m(x*_m|y_J) over all auxiliary configurations; the
    result must equal pi(x). Without a weight (plain MH shape) the check
    reduces to row-stochasticity of the proposal against pi.
    """
    s = spec.states.size
    t_mats = spec.matrices(M)
    log_pi = _log(spec.target_probs)
    log_t = _log(t_mats)
    pts = spec.states
    worst = 0.0
    detail = ""
    for ix in range(s):
        if weight is None:
            total = float(np.sum(t_mats[0][ix]))
        else:
            total = 0.0
            supports = [np.flatnonzero(t_mats[m][ix]) for m in range(M)]
            for cand in itertools.product(*supports):
                cand = np.asarray(cand)
                prob_cand = float(np.prod([t_mats[m][ix, cand[m]] for m in range(M)]))
                lw = weights_mod.log_weights(
                    weight, pts[cand], pts[ix],
                    log_pi[cand],
                    np.array([log_t[m][ix, cand[m]] for m in range(M)]),
                    np.array([log_t[m][cand[m], ix] for m in range(M)]),
                )
                try:
                    p_sel = np.exp(weights_mod.selection_log_probs(lw))
                except ZeroWeightError:
                    continue
                for j in range(M):
                    others = [m for m in range(M) if m != j]
                    rev_mass = float(np.prod([np.sum(t_mats[m][cand[j]]) for m in others])) if others else 1.0
                    total += prob_cand * p_sel[j] * rev_mass
        err = abs(total * spec.target_probs[ix] - spec.target_probs[ix])
        if err > worst:
            worst = err
            detail = f"state {ix}"
    return CheckReport("marginality", worst, tol, worst <= tol, detail)


# ---------------------------------------------------------------------------
# standard verification suite


def line_discrete_spec(target_probs) -> DiscreteKernelSpec:
    """Random walk on the integer line 0..S-1 that reflects at the ends.

    Interior states move to either neighbour with probability 1/2; the
    end states bounce to their single neighbour with probability 1, so a
    candidate never coincides with the current state.
    """
    pi = np.asarray(target_probs, dtype=float)
    s = pi.size
    t = np.zeros((s, s))
    for i in range(s):
        if i == 0:
            t[i, 1] = 1.0
        elif i == s - 1:
            t[i, s - 2] = 1.0
        else:
            t[i, i - 1] = 0.5
            t[i, i + 1] = 0.5
    return DiscreteKernelSpec(states=np.arange(s, dtype=float),
                              target_probs=pi, proposal_probs=t)


def _standard_normal_specs(dim: int = 2, M: int = 3, seed: int = 0):
    """MH and MTM extended-space specs over N(0, I) with a unit random walk."""
    def log_pi(x):
        x = np.asarray(x, dtype=float)
        return float(-0.5 * np.sum(x ** 2) - 0.5 * x.size * math.log(2 * math.pi))

    def log_t_pair(a, b):
        r = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        return float(-0.5 * np.sum(r ** 2) - 0.5 * r.size * math.log(2 * math.pi))

    def log_t(m, a, b):
        return log_t_pair(a, b)

    mh = make_mh_extended_spec(log_pi, log_t_pair)
    mtm = make_mtm_extended_spec(log_pi, log_t, M=M,
                                 weight=WeightSpec(weights_mod.WeightKind.PROPORTIONAL))
    rng = np.random.default_rng(seed)

    def mh_point():
        return (rng.standard_normal(dim), rng.standard_normal(dim))

    def mtm_point():
        return (rng.standard_normal(dim), rng.standard_normal((M, dim)),
                int(rng.integers(M)), rng.standard_normal((M - 1, dim)))

    return mh, mh_point, mtm, mtm_point


def verification_suite(
    n_points: int = 200,
    weight_specs: Sequence[WeightSpec] | None = None,
    m_values: Sequence[int] = (1, 2, 3),
) -> list[CheckReport]:
    """The full correctness battery run by the ``verify`` CLI command.

    Covers: involution and ratio-reciprocity checks for the MH and MTM
    extended-space specs on random points, finite-difference Jacobians
    against the known permutation structure, marginality of the discrete
    extended joint, and exact stationarity plus detailed balance of the
    enumerated transition matrices for every weight family and candidate
    count over uniform and uneven five-state targets.
    """
    if weight_specs is None:
        weight_specs = [WeightSpec(kind) for kind in weights_mod.WeightKind]
    reports: list[CheckReport] = []
    mh, mh_point, mtm, mtm_point = _standard_normal_specs()

    for name, spec, gen in (("mh", mh, mh_point), ("mtm", mtm, mtm_point)):
        pts = [gen() for _ in range(n_points)]
        rep = check_involution(spec, pts)
        reports.append(CheckReport(f"involution-{name}", rep.max_violation,
                                   rep.tolerance, rep.passed, rep.detail))
        worst_recip = 0.0
        worst_jac = 0.0
        for p in pts[: max(1, n_points // 4)]:
            r_fwd = acceptance_log_ratio_from_spec(spec, p)
            r_bwd = acceptance_log_ratio_from_spec(spec, spec.involution(p))
            worst_recip = max(worst_recip, abs(r_fwd + r_bwd))
            worst_jac = max(worst_jac, abs(jacobian_log_abs(spec, p)))
        reports.append(CheckReport(f"ratio-reciprocity-{name}", worst_recip,
                                   1.0e-8, worst_recip <= 1.0e-8))
        # both involutions permute coordinates, so log|det J| must vanish
        reports.append(CheckReport(f"jacobian-permutation-{name}", worst_jac,
                                   1.0e-6, worst_jac <= 1.0e-6))

    uniform = np.full(5, 0.2)
    uneven = np.array([0.4, 0.1, 0.2, 0.1, 0.2])
    for label, pi in (("uniform", uniform), ("uneven", uneven)):
        spec = line_discrete_spec(pi)
        for w in weight_specs:
            for m in m_values:
                P = enumerate_mtm_transition_matrix(spec, m, w)
                sv = stationary_violation(P, pi)
                reports.append(CheckReport(
                    f"stationarity-{label}-{w.label()}-M{m}", sv, 1.0e-10,
                    sv <= 1.0e-10))
                db = check_detailed_balance(P, pi)
                reports.append(CheckReport(
                    f"detailed-balance-{label}-{w.label()}-M{m}",
                    db.max_violation, db.tolerance, db.passed, db.detail))
        marg = check_marginality(spec, M=3, weight=weight_specs[0])
        reports.append(CheckReport(f"marginality-{label}", marg.max_violation,
                                   marg.tolerance, marg.passed, marg.detail))
    return reports
