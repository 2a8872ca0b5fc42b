"""Random-walk proposal configurations and their adaptation rules.

Four Gaussian random-walk families are provided, all symmetric:

``hom-full``
    M i.i.d. draws from N(x, c * Sigma), c = scaling / sqrt(d), with
    Sigma adapted toward the running sample covariance.

``het-full``
    Candidate m drawn from N(x, kappa_m * c * Sigma) with a geometric
    scale ladder kappa_m = 2**(m - (M+1)/2) * het_spread, so candidates
    probe several step sizes around the adapted covariance at once.

``hom-cw``
    Component-wise updates: coordinate i proposes from N(x_i, c *
    sigma_i^2) with per-coordinate variances adapted as in the full case.

``het-cw``
    Component-wise updates with a per-coordinate ladder of M standard
    deviations sigma_{i,1..M}, tuned by the balanced-selection rule:
    if the largest (smallest) rung is selected too often or too rarely,
    the ladder endpoint is doubled or halved and the rungs re-spaced
    geometrically.

Covariance adaptation follows a Robbins-Monro recursion with learning
rate gamma_n = n**(-0.6) that leaves the state untouched for the first
n0 iterations:

    Sigma_{n+1} = Sigma_n + gamma_n * ((x_n - mu_n)(x_n - mu_n)^T - Sigma_n)
    mu_{n+1}    = mu_n + gamma_n * (x_n - mu_n)

The covariance recursion is also available without the -Sigma_n
correction term (``rule="paper-literal"``); in that form the update only
accumulates, so the proposal variance grows without bound on long runs,
and the corrected recursion is the default.

Adaptation state objects are mutated in place by the ``adapt_*``
functions (and returned for convenience); each chain must own its state.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "ProposalKind",
    "ProposalConfig",
    "AdaptiveState",
    "BalancedState",
    "AdaptationStateError",
    "parse_proposal_config",
    "kappa_ladder",
    "initial_cw_ladder",
    "make_proposal_state",
    "propose_candidates",
    "proposal_log_density",
    "adapt_metropolis",
    "record_selection",
    "adapt_balanced",
]

ADAPT_BURN_ITERATIONS = 100
ADAPT_DECAY = 0.6

BALANCE_PERIOD = 100
BALANCE_MIN_EXP = -15.0
BALANCE_MAX_EXP = 50.0


class AdaptationStateError(RuntimeError):
    """Adapted covariance is no longer positive definite."""


class ProposalKind(enum.Enum):
    HOM_FULL = "hom-full"
    HET_FULL = "het-full"
    HOM_CW = "hom-cw"
    HET_CW = "het-cw"

    @property
    def is_componentwise(self) -> bool:
        return self in (ProposalKind.HOM_CW, ProposalKind.HET_CW)


@dataclass(frozen=True)
class ProposalConfig:
    """Proposal family, candidate count, and scale tuning.

    ``scaling`` enters through c = scaling / sqrt(d); ``het_spread``
    widens or narrows the het-full scale ladder.
    """

    kind: ProposalKind
    M: int
    scaling: float = 2.38
    het_spread: float = 1.0

    def __post_init__(self) -> None:
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.kind is ProposalKind.HET_CW and self.M < 2:
            raise ValueError("het-cw needs M >= 2: the ladder has no endpoints otherwise")
        if self.scaling <= 0 or self.het_spread <= 0:
            raise ValueError("scaling and het_spread must be positive")

    @property
    def symmetric(self) -> bool:
        # every family is a Gaussian random walk centred at the current point
        return True

    def label(self) -> str:
        return self.kind.value


def parse_proposal_config(text: str, M: int, scaling: float = 2.38,
                          het_spread: float = 1.0) -> ProposalConfig:
    """Build a config from a kind string such as ``"hom-full"``."""
    text = text.strip()
    for kind in ProposalKind:
        if text == kind.value:
            return ProposalConfig(kind=kind, M=M, scaling=scaling, het_spread=het_spread)
    raise ValueError(f"unrecognised proposal kind {text!r}")


@dataclass
class AdaptiveState:
    """Running moments for covariance adaptation.

    ``sigma`` is a (d, d) covariance for the full proposals or a (d,)
    vector of per-coordinate variances for hom-cw.
    """

    sigma: np.ndarray
    mu: np.ndarray
    n0: int = ADAPT_BURN_ITERATIONS
    rule: str = "robbins-monro"

    def __post_init__(self) -> None:
        if self.rule not in ("robbins-monro", "paper-literal"):
            raise ValueError(f"unknown adaptation rule {self.rule!r}")


@dataclass
class BalancedState:
    """Per-coordinate step-size ladders and selection counters.

    ``sigmas`` has shape (d, M), each row geometrically spaced;
    ``counters[i, m]`` counts how often rung m was selected for
    coordinate i since the last adaptation event.
    """

    sigmas: np.ndarray
    counters: np.ndarray
    beta_period: int = BALANCE_PERIOD
    min_exp: float = BALANCE_MIN_EXP
    max_exp: float = BALANCE_MAX_EXP


def kappa_ladder(M: int, het_spread: float = 1.0) -> np.ndarray:
    """Geometric scale factors 2**(m - (M+1)/2) * het_spread, m = 1..M."""
    m = np.arange(1, M + 1, dtype=float)
    return 2.0 ** (m - 0.5 * (M + 1)) * het_spread


def initial_cw_ladder(M: int, min_exp: float = BALANCE_MIN_EXP,
                      max_exp: float = BALANCE_MAX_EXP) -> np.ndarray:
    """Initial rungs 2**(m - 1 - (M-1)/2), m = 1..M, clamped to bounds."""
    m = np.arange(1, M + 1, dtype=float)
    sig = 2.0 ** (m - 1.0 - 0.5 * (M - 1))
    return np.clip(sig, 2.0 ** min_exp, 2.0 ** max_exp)


def make_proposal_state(config: ProposalConfig, d: int, x0=None):
    """Fresh adaptation state for one chain.

    Full proposals start from the identity covariance; component-wise
    ones from unit variances or the default ladder. The running mean is
    seeded at the chain's start point when given.
    """
    mu = np.zeros(d) if x0 is None else np.array(x0, dtype=float, copy=True)
    if config.kind in (ProposalKind.HOM_FULL, ProposalKind.HET_FULL):
        return AdaptiveState(sigma=np.eye(d), mu=mu)
    if config.kind is ProposalKind.HOM_CW:
        return AdaptiveState(sigma=np.ones(d), mu=mu)
    sig = np.tile(initial_cw_ladder(config.M), (d, 1))
    return BalancedState(sigmas=sig, counters=np.zeros((d, config.M), dtype=np.int64))


class _GaussianFamily:
    """Per-step view of the full-vector proposal: one Cholesky, M scales."""

    __slots__ = ("chol", "log_det_sigma", "scales", "d")

    def __init__(self, config: ProposalConfig, state: AdaptiveState, d: int):
        sigma = state.sigma
        if sigma.shape != (d, d):
            raise ValueError("full proposal needs a (d, d) covariance")
        try:
            self.chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError as exc:
            raise AdaptationStateError("adapted covariance is not positive definite") from exc
        self.log_det_sigma = 2.0 * float(np.sum(np.log(np.diag(self.chol))))
        c = config.scaling / math.sqrt(d)
        if config.kind is ProposalKind.HET_FULL:
            self.scales = kappa_ladder(config.M, config.het_spread) * c
        else:
            self.scales = np.full(config.M, c)
        self.d = d

    def sample(self, rng: np.random.Generator, x: np.ndarray) -> np.ndarray:
        z = rng.standard_normal((self.scales.size, self.d))
        steps = (z @ self.chol.T) * np.sqrt(self.scales)[:, None]
        return x + steps

    def sample_some(self, rng: np.random.Generator, x: np.ndarray,
                    which: np.ndarray) -> np.ndarray:
        z = rng.standard_normal((which.size, self.d))
        steps = (z @ self.chol.T) * np.sqrt(self.scales[which])[:, None]
        return x + steps

    def log_density(self, displacements: np.ndarray, which=None) -> np.ndarray:
        """Log N(r; 0, scale_m * Sigma) for each displacement row r."""
        r = np.atleast_2d(displacements)
        scales = self.scales if which is None else np.atleast_1d(self.scales[which])
        w = solve_triangular(self.chol, r.T, lower=True)
        quad = np.sum(w * w, axis=0)
        return (-0.5 * quad / scales
                - 0.5 * self.d * (np.log(scales) + math.log(2.0 * math.pi))
                - 0.5 * self.log_det_sigma)


def _cw_sds(config: ProposalConfig, state, d: int, coord: int) -> np.ndarray:
    if config.kind is ProposalKind.HOM_CW:
        c = config.scaling / math.sqrt(d)
        var = state.sigma[coord]
        return np.full(config.M, math.sqrt(c * var))
    if config.kind is ProposalKind.HET_CW:
        return np.asarray(state.sigmas[coord], dtype=float)
    raise ValueError(f"{config.kind.value} is not a component-wise proposal")


def propose_candidates(config: ProposalConfig, state, x, rng: np.random.Generator,
                       coord: int | None = None) -> np.ndarray:
    """Draw the M candidates for one kernel application.

    Full kinds return an (M, d) array of points; component-wise kinds
    require ``coord`` and return M scalar values for that coordinate.
    """
    x = np.asarray(x, dtype=float)
    if config.kind.is_componentwise:
        if coord is None:
            raise ValueError("component-wise proposals need a coordinate index")
        sds = _cw_sds(config, state, x.size, coord)
        return x[coord] + sds * rng.standard_normal(config.M)
    family = _GaussianFamily(config, state, x.size)
    return family.sample(rng, x)


def proposal_log_density(config: ProposalConfig, state, from_point, to_point,
                         m: int, coord: int | None = None, d: int | None = None) -> float:
    """Log density of candidate m's move ``from_point -> to_point``.

    For component-wise kinds the two points are scalar coordinate values
    and ``coord`` selects the ladder row (``d`` supplies the state
    dimension for the hom-cw scale factor; defaults to the state size).
    """
    if not 0 <= m < config.M:
        raise ValueError(f"candidate index {m} out of range")
    if config.kind.is_componentwise:
        if coord is None:
            raise ValueError("component-wise proposals need a coordinate index")
        dim = d if d is not None else np.asarray(state.sigma if isinstance(state, AdaptiveState) else state.sigmas).shape[0]
        sd = _cw_sds(config, state, dim, coord)[m]
        r = float(to_point) - float(from_point)
        return -0.5 * (r / sd) ** 2 - math.log(sd) - 0.5 * math.log(2.0 * math.pi)
    frm = np.asarray(from_point, dtype=float)
    to = np.asarray(to_point, dtype=float)
    family = _GaussianFamily(config, state, frm.size)
    return float(family.log_density(to - frm, which=m)[0])


def adapt_metropolis(state: AdaptiveState, x_n, n: int) -> AdaptiveState:
    """One covariance-adaptation update after iteration n (in place).

    No-op while n <= n0. The covariance update uses the pre-update mean,
    then the mean moves toward x_n.
    """
    if n <= state.n0:
        return state
    gamma = n ** (-ADAPT_DECAY)
    r = np.asarray(x_n, dtype=float) - state.mu
    if state.sigma.ndim == 2:
        update = np.outer(r, r)
    else:
        update = r * r
    if state.rule == "robbins-monro":
        state.sigma += gamma * (update - state.sigma)
    else:
        state.sigma += gamma * update
    state.mu += gamma * r
    return state


def record_selection(state: BalancedState, coord: int, m: int) -> BalancedState:
    """Count a selection of ladder rung m at the given coordinate."""
    state.counters[coord, m] += 1
    return state


def _respace_row(row: np.ndarray, min_exp: float, max_exp: float) -> np.ndarray:
    lo = math.log2(row[0])
    hi = math.log2(row[-1])
    out = 2.0 ** np.linspace(lo, hi, row.size)
    return np.clip(out, 2.0 ** min_exp, 2.0 ** max_exp)


def adapt_balanced(state: BalancedState, n: int, rng: np.random.Generator) -> BalancedState:
    """Balanced-selection ladder adaptation after iteration n (in place).

    Runs only every ``beta_period`` iterations, and then only with
    probability P = max(0.99**(a-1), a**(-1/2)) where a counts completed
    periods beyond the first; the decaying probability makes the ladder
    eventually stabilise. When it runs, each coordinate's selection
    rates for the top and bottom rungs are compared against 2/M (too
    often) and 1/(2M) (too rarely):

      * top rung selected too often  -> top doubled (capped);
      * top too rare, and halving keeps it above the bottom -> top halved;
      * bottom selected too often    -> bottom halved (floored);
      * bottom too rare, and doubling keeps it below the top -> bottom doubled;

    after which the rungs are re-spaced geometrically between the new
    endpoints and the counters reset.
    """
    M = state.sigmas.shape[1]
    if M < 2:
        raise ValueError("balanced adaptation needs M >= 2")
    if n % state.beta_period != 0:
        return state
    a = (n - state.beta_period) / state.beta_period
    if a <= 0:
        return state
    p_adapt = max(0.99 ** (a - 1.0), a ** -0.5)
    if rng.random() >= p_adapt:
        return state
    lo_bound = 2.0 ** state.min_exp
    hi_bound = 2.0 ** state.max_exp
    high = 2.0 / M
    low = 1.0 / (2.0 * M)
    for i in range(state.sigmas.shape[0]):
        total = state.counters[i].sum()
        if total == 0:
            continue
        rates = state.counters[i] / total
        row = state.sigmas[i]
        if rates[M - 1] > high:
            row[M - 1] = min(2.0 * row[M - 1], hi_bound)
            row[:] = _respace_row(row, state.min_exp, state.max_exp)
        elif rates[M - 1] < low and row[M - 1] / 2.0 > row[0]:
            row[M - 1] = max(row[M - 1] / 2.0, lo_bound)
            row[:] = _respace_row(row, state.min_exp, state.max_exp)
        if rates[0] > high:
            row[0] = max(row[0] / 2.0, lo_bound)
            row[:] = _respace_row(row, state.min_exp, state.max_exp)
        elif rates[0] < low and 2.0 * row[0] < row[M - 1]:
            row[0] = min(2.0 * row[0], hi_bound)
            row[:] = _respace_row(row, state.min_exp, state.max_exp)
    state.counters[:] = 0
    return state
