"""Multiple-try Metropolis kernels and chain drivers.

One full-vector kernel application proceeds as:

1. draw M candidates y_1..y_M from the proposal at the current point x;
2. select index J with probability proportional to the weight u_J(y_J, x);
3. draw reverse samples x*_m from the proposal at y_J for m != J, and fix
   x*_J = x;
4. accept y_J with probability min(1, r), where in the general form

       r = [ pi(y_J) T_J(x | y_J) p(J | x*_1..x*_M, y_J) ]
           / [ pi(x) T_J(y_J | x) p(J | y_1..y_M, x) ]

   with p(J | ...) the normalised selection probability of index J under
   the corresponding candidate set.

When the weight is in restricted form (see the weights module) the ratio
collapses to a ratio of weight sums,

    r = sum_m u_m(y_m, x) / sum_m u_m(x*_m, y_J),

which this module uses automatically unless the config forces the
general path. Component-wise kernels apply the same construction to one
coordinate at a time, sweeping coordinates in order within a single
kernel application.

All target and proposal densities are combined in the log domain. The
random number stream is consumed in a fixed order (candidates, selection,
reverse samples, acceptance) so chains replay exactly from a seed.
"""

from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass

import numpy as np
from .weights import log_sum_exp

from . import proposals, weights
from .proposals import (
    AdaptiveState,
    BalancedState,
    ProposalConfig,
    ProposalKind,
    _GaussianFamily,
    adapt_balanced,
    adapt_metropolis,
)
from .targets import TargetDistribution, coordinate_log_density
from .weights import WeightKind, WeightSpec, ZeroWeightError

__all__ = [
    "KernelConfig",
    "StepResult",
    "ChainRun",
    "StateError",
    "general_acceptance_log_ratio",
    "restricted_acceptance_log_ratio",
    "mtm_step",
    "cw_mtm_step",
    "run_chain",
    "write_chain_csv",
    "write_chain_binary",
    "read_chain_binary",
    "write_adaptation_trace",
]


class StateError(ValueError):
    """Chain state is off the target's support."""


@dataclass
class KernelConfig:
    """Everything one chain needs: target, proposal + state, weight.

    ``acceptance_path`` is ``"auto"`` (use the sum-ratio form whenever
    the weight family qualifies) or ``"general"`` (always evaluate
    selection probabilities explicitly). Both produce the same
    acceptance ratio for restricted weights.
    """

    target: TargetDistribution
    proposal: ProposalConfig
    state: AdaptiveState | BalancedState
    weight: WeightSpec
    acceptance_path: str = "auto"

    def __post_init__(self) -> None:
        if self.acceptance_path not in ("auto", "general"):
            raise ValueError(f"unknown acceptance path {self.acceptance_path!r}")

    @property
    def M(self) -> int:
        return self.proposal.M

    def uses_restricted_path(self) -> bool:
        return self.acceptance_path == "auto" and weights.is_restricted_form(
            self.weight, self.proposal.symmetric
        )


@dataclass
class StepResult:
    """Outcome of one kernel application.

    ``log_accept_prob`` is the unclamped log acceptance ratio of the
    final proposal decision (the last coordinate's for component-wise
    kernels, -inf when every candidate had zero weight).
    ``selected_index`` is -1 when no candidate was selected.
    """

    next_state: np.ndarray
    accepted: bool
    selected_index: int
    log_accept_prob: float
    log_pi_next: float
    n_updates: int = 0
    candidate_cache: dict | None = None


@dataclass
class ChainRun:
    """A realised chain: every visited state plus bookkeeping.

    ``states`` has shape (n_iterations + 1, d) and includes the start
    point; ``accepted[k]`` says whether iteration k changed the state;
    ``n_updates`` counts accepted proposal decisions, which exceeds
    ``accepted.sum()`` for component-wise kernels (several coordinates
    can move in one iteration).
    """

    states: np.ndarray
    accepted: np.ndarray
    n_updates: int
    n_iterations: int
    wall_seconds: float
    seed: int
    adaptation_trace: list | None = None


def general_acceptance_log_ratio(
    log_pi_x: float,
    log_pi_y: float,
    log_t_x_given_y: float,
    log_t_y_given_x: float,
    log_p_forward: float,
    log_p_backward: float,
) -> float:
    """Unclamped log acceptance ratio in the general form.

    ``log_p_forward`` is the log selection probability of the chosen
    index among the candidates drawn at x; ``log_p_backward`` the same
    index's selection probability among the reverse samples at y. The
    function is antisymmetric under exchanging the roles of x and y.
    """
    return (log_pi_y + log_t_x_given_y + log_p_backward
            - log_pi_x - log_t_y_given_x - log_p_forward)


def restricted_acceptance_log_ratio(forward_log_weights, reverse_log_weights) -> float:
    """Unclamped log of sum_m u_m(y_m, x) / sum_m u_m(x*_m, y)."""
    num = log_sum_exp(np.asarray(forward_log_weights, dtype=float))
    den = log_sum_exp(np.asarray(reverse_log_weights, dtype=float))
    if den == -np.inf:
        # unreachable through the kernel: the reverse set contains the
        # current point, whose weight is positive on support
        return -np.inf
    return float(num - den)


def _needs_proposal_density(config: KernelConfig, restricted: bool) -> bool:
    if not restricted:
        return True
    return config.weight.kind in (WeightKind.CONSTANT, WeightKind.IMPORTANCE)


def mtm_step(
    config: KernelConfig,
    x,
    rng: np.random.Generator,
    log_pi_x: float | None = None,
    collect_cache: bool = False,
) -> StepResult:
    """One full-vector multiple-try update from x."""
    x = np.asarray(x, dtype=float)
    target = config.target
    if log_pi_x is None:
        log_pi_x = target.log_density(x)
    if log_pi_x == -np.inf:
        raise StateError("current state has zero target density")

    family = _GaussianFamily(config.proposal, config.state, x.size)
    ys = family.sample(rng, x)
    if target.batch_log_density is not None:
        log_pi_cand = np.asarray(target.batch_log_density(ys), dtype=float)
    else:
        log_pi_cand = np.array([target.log_density(y) for y in ys])

    restricted = config.uses_restricted_path()
    needs_t = _needs_proposal_density(config, restricted)
    # symmetric random walk: T(y|x) = T(x|y), one density serves both roles
    log_t_fwd = family.log_density(ys - x) if needs_t else None
    lw_fwd = weights.log_weights(config.weight, ys, x, log_pi_cand, log_t_fwd, log_t_fwd)

    reject = StepResult(
        next_state=x, accepted=False, selected_index=-1,
        log_accept_prob=-np.inf, log_pi_next=log_pi_x,
    )
    m_fwd = float(lw_fwd.max())
    if not m_fwd < np.inf:
        raise ValueError("log weights must be finite or -inf")
    if m_fwd == -np.inf:
        # every candidate off-support: rejected without reverse samples
        return reject
    lse_fwd = log_sum_exp(lw_fwd)
    log_probs_fwd = lw_fwd - lse_fwd
    j = weights.sample_candidate(log_probs_fwd, rng)
    y = ys[j]
    log_pi_y = log_pi_cand[j]

    others = np.r_[0:j, j + 1:config.M]
    xstar = np.empty_like(ys)
    xstar[j] = x
    if others.size:
        xstar[others] = family.sample_some(rng, y, others)
    log_pi_rev = np.empty(config.M)
    log_pi_rev[j] = log_pi_x
    if others.size:
        if target.batch_log_density is not None:
            log_pi_rev[others] = target.batch_log_density(xstar[others])
        else:
            for m in others:
                log_pi_rev[m] = target.log_density(xstar[m])
    log_t_rev = family.log_density(xstar - y) if needs_t else None
    lw_rev = weights.log_weights(config.weight, xstar, y, log_pi_rev, log_t_rev, log_t_rev)

    if restricted:
        lse_rev = log_sum_exp(lw_rev)
        log_ratio = -np.inf if lse_rev == -np.inf else float(lse_fwd - lse_rev)
    else:
        den = log_sum_exp(lw_rev)
        if den == -np.inf:
            log_ratio = -np.inf
        else:
            log_t_j = log_t_fwd[j] if log_t_fwd is not None else float(family.log_density((y - x)[None], which=j)[0])
            log_ratio = general_acceptance_log_ratio(
                log_pi_x, log_pi_y,
                log_t_x_given_y=log_t_j, log_t_y_given_x=log_t_j,
                log_p_forward=float(log_probs_fwd[j]),
                log_p_backward=float(lw_rev[j] - den),
            )

    accepted = math.log(max(rng.random(), 5e-324)) < log_ratio
    cache = None
    if collect_cache:
        cache = {
            "candidates": ys, "reverse": xstar, "selected": j,
            "forward_log_weights": lw_fwd, "reverse_log_weights": lw_rev,
            "log_pi_candidates": log_pi_cand,
        }
    if accepted:
        return StepResult(y, True, j, float(log_ratio), log_pi_y, 1, cache)
    return StepResult(x, False, j, float(log_ratio), log_pi_x, 0, cache)


def _cw_coord_update(
    config: KernelConfig,
    x: np.ndarray,
    i: int,
    log_pi_x: float,
    rng: np.random.Generator,
    restricted: bool,
    needs_t: bool,
    coord_fn=None,
):
    """One coordinate's multiple-try decision; returns (value, log_pi, j, log_ratio, accepted)."""
    target = config.target
    M = config.M
    sds = proposals._cw_sds(config.proposal, config.state, x.size, i)
    xi = x[i]
    cands = xi + sds * rng.standard_normal(M)
    if coord_fn is not None:
        log_pi_cand = np.asarray(coord_fn(x, i, cands), dtype=float)
    else:
        log_pi_cand = coordinate_log_density(target, x, i, cands)

    log_t_fwd = None
    if needs_t:
        log_t_fwd = -0.5 * ((cands - xi) / sds) ** 2 - np.log(sds) - 0.5 * math.log(2 * math.pi)
    lw_fwd = weights.log_weights(config.weight, cands, xi, log_pi_cand, log_t_fwd, log_t_fwd)
    m_fwd = float(lw_fwd.max())
    if not m_fwd < np.inf:
        raise ValueError("log weights must be finite or -inf")
    if m_fwd == -np.inf:
        # every candidate off-support: rejected without reverse samples
        return xi, log_pi_x, -1, -np.inf, False
    lse_fwd = log_sum_exp(lw_fwd)
    log_probs_fwd = lw_fwd - lse_fwd
    j = weights.sample_candidate(log_probs_fwd, rng)
    if isinstance(config.state, BalancedState):
        proposals.record_selection(config.state, i, j)
    yi = cands[j]

    xstar = np.empty(M)
    xstar[j] = xi
    if M > 1:
        sds_other = np.concatenate((sds[:j], sds[j + 1:]))
        z = rng.standard_normal(M - 1)
        other_vals = yi + sds_other * z
        xstar[:j] = other_vals[:j]
        xstar[j + 1:] = other_vals[j:]
    if coord_fn is not None:
        log_pi_rev = np.asarray(coord_fn(x, i, xstar), dtype=float)
    else:
        log_pi_rev = coordinate_log_density(target, x, i, xstar)
    log_pi_rev[j] = log_pi_x
    log_t_rev = None
    if needs_t:
        log_t_rev = -0.5 * ((xstar - yi) / sds) ** 2 - np.log(sds) - 0.5 * math.log(2 * math.pi)
    lw_rev = weights.log_weights(config.weight, xstar, yi, log_pi_rev, log_t_rev, log_t_rev)

    if restricted:
        lse_rev = log_sum_exp(lw_rev)
        log_ratio = -np.inf if lse_rev == -np.inf else float(lse_fwd - lse_rev)
    else:
        den = log_sum_exp(lw_rev)
        if den == -np.inf:
            log_ratio = -np.inf
        else:
            log_t_j = log_t_fwd[j] if log_t_fwd is not None else 0.0
            log_ratio = general_acceptance_log_ratio(
                log_pi_x, float(log_pi_cand[j]),
                log_t_x_given_y=float(log_t_j), log_t_y_given_x=float(log_t_j),
                log_p_forward=float(log_probs_fwd[j]),
                log_p_backward=float(lw_rev[j] - den),
            )
    accepted = math.log(max(rng.random(), 5e-324)) < log_ratio
    if accepted:
        return float(yi), float(log_pi_cand[j]), j, float(log_ratio), True
    return xi, log_pi_x, j, float(log_ratio), False


def cw_mtm_step(
    config: KernelConfig,
    x,
    rng: np.random.Generator,
    log_pi_x: float | None = None,
    collect_cache: bool = False,
) -> StepResult:
    """One component-wise sweep: a multiple-try decision per coordinate."""
    x = np.asarray(x, dtype=float)
    target = config.target
    if log_pi_x is None:
        log_pi_x = target.log_density(x)
    if log_pi_x == -np.inf:
        raise StateError("current state has zero target density")

    restricted = config.uses_restricted_path()
    needs_t = _needs_proposal_density(config, restricted)
    coord_fn = target.coord_log_density
    x_new = x.copy()
    lp = log_pi_x
    n_updates = 0
    last_j = -1
    last_ratio = -np.inf
    per_coord = [] if collect_cache else None
    for i in range(x.size):
        value, lp, last_j, last_ratio, acc = _cw_coord_update(
            config, x_new, i, lp, rng, restricted, needs_t, coord_fn
        )
        if acc:
            x_new[i] = value
            n_updates += 1
        if per_coord is not None:
            per_coord.append({"coord": i, "selected": last_j,
                              "log_accept_prob": last_ratio, "accepted": acc})
    cache = {"coordinates": per_coord} if collect_cache else None
    if n_updates == 0:
        return StepResult(x, False, last_j, last_ratio, log_pi_x, 0, cache)
    return StepResult(x_new, True, last_j, last_ratio, lp, n_updates, cache)


def _make_kernel(config: KernelConfig):
    if config.proposal.kind.is_componentwise:
        return cw_mtm_step
    return mtm_step


def run_chain(
    config: KernelConfig,
    x0,
    *,
    iterations: int | None = None,
    seconds: float | None = None,
    seed: int = 0,
    trace_every: int = 0,
) -> ChainRun:
    """Run one chain under an iteration or wall-clock budget.

    Exactly one of ``iterations`` and ``seconds`` must be given. With an
    iteration budget the run is a pure function of (config, x0, seed);
    wall-clock budgets stop after the first iteration that finishes past
    the deadline, so their length is hardware-dependent.

    Adaptation happens after each kernel application: covariance states
    via the running-moment recursion, balanced ladders via their
    periodic rule (which consumes the same random stream).
    """
    if (iterations is None) == (seconds is None):
        raise ValueError("specify exactly one of iterations= or seconds=")
    if iterations is not None and iterations < 0:
        raise ValueError("iterations must be nonnegative")
    if seconds is not None and seconds <= 0:
        raise ValueError("seconds must be positive")

    rng = np.random.default_rng(seed)
    x = np.array(x0, dtype=float, copy=True)
    lp = config.target.log_density(x)
    if lp == -np.inf:
        raise StateError("start point has zero target density")
    kernel = _make_kernel(config)
    state = config.state
    is_adaptive = isinstance(state, AdaptiveState)
    is_balanced = isinstance(state, BalancedState)

    states = [x.copy()]
    accepted = []
    trace = [] if trace_every else None
    n_updates = 0
    n = 0
    t0 = time.perf_counter()
    while True:
        if iterations is not None:
            if n >= iterations:
                break
        elif time.perf_counter() - t0 >= seconds:
            break
        n += 1
        step = kernel(config, x, rng, log_pi_x=lp)
        x = np.asarray(step.next_state, dtype=float)
        lp = step.log_pi_next
        states.append(x.copy())
        accepted.append(step.accepted)
        n_updates += step.n_updates
        if is_adaptive:
            adapt_metropolis(state, x, n)
        elif is_balanced:
            adapt_balanced(state, n, rng)
        if trace_every and n % trace_every == 0:
            snap = state.sigma if is_adaptive else state.sigmas
            trace.append((n, np.array(snap, copy=True)))
    wall = time.perf_counter() - t0
    return ChainRun(
        states=np.asarray(states),
        accepted=np.asarray(accepted, dtype=bool),
        n_updates=n_updates,
        n_iterations=n,
        wall_seconds=wall,
        seed=seed,
        adaptation_trace=trace,
    )


# ---------------------------------------------------------------------------
# chain serialisation

_BINARY_MAGIC = b"MTRY"
_BINARY_VERSION = 1


def write_chain_csv(run: ChainRun, path) -> None:
    """Write (iteration, coordinates..., accepted) rows; iteration 0 is x0."""
    n, d = run.states.shape
    with open(path, "w") as fh:
        cols = ",".join(f"x{j + 1}" for j in range(d))
        fh.write(f"iteration,{cols},accepted\n")
        for k in range(n):
            coords = ",".join(repr(float(v)) for v in run.states[k])
            acc = 0 if k == 0 else int(run.accepted[k - 1])
            fh.write(f"{k},{coords},{acc}\n")


def write_chain_binary(run: ChainRun, path) -> None:
    """Compact fixed-width record of a chain.

    Layout (little-endian): magic ``MTRY`` (4 bytes), version u32, row
    count u64, dimension u64, then one record per state of d + 1
    float64 values: the coordinates followed by the acceptance flag
    (0.0 or 1.0; 0.0 for the start point).
    """
    n, d = run.states.shape
    with open(path, "wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(struct.pack("<IQQ", _BINARY_VERSION, n, d))
        flags = np.concatenate([[0.0], run.accepted.astype(float)])
        block = np.column_stack([run.states, flags]).astype("<f8")
        fh.write(block.tobytes())


def read_chain_binary(path) -> tuple[np.ndarray, np.ndarray]:
    """Read back (states, accepted) written by :func:`write_chain_binary`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _BINARY_MAGIC:
            raise ValueError("not a chain file")
        version, n, d = struct.unpack("<IQQ", fh.read(20))
        if version != _BINARY_VERSION:
            raise ValueError(f"unsupported chain file version {version}")
        block = np.frombuffer(fh.read(n * (d + 1) * 8), dtype="<f8").reshape(n, d + 1)
    return block[:, :d].copy(), block[1:, d] != 0.0


def write_adaptation_trace(run: ChainRun, path) -> None:
    """Write the recorded adaptation snapshots as (iteration, values...) CSV."""
    if not run.adaptation_trace:
        raise ValueError("chain was run without trace_every")
    with open(path, "w") as fh:
        width = run.adaptation_trace[0][1].size
        cols = ",".join(f"v{j + 1}" for j in range(width))
        fh.write(f"iteration,{cols}\n")
        for n, snap in run.adaptation_trace:
            vals = ",".join(repr(float(v)) for v in np.ravel(snap))
            fh.write(f"{n},{vals}\n")
