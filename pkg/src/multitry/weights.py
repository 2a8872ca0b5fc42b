"""Candidate weighting and selection for multiple-try kernels.

A multiple-try transition draws M candidates and selects one of them with
probability proportional to a positive weight function u_m(y_m, x). Five
weight families are supported:

    constant            u = pi(y) * T(x | y)
    importance          u = pi(y) / T(y | x)
    proportional        u = pi(y)
    locally-balanced    u = sqrt(pi(y))
    jump-distance       u = pi(y) * ||y - x||**alpha

All arithmetic is carried out in the log domain with log-sum-exp
normalisation: the benchmark targets span hundreds of orders of magnitude,
so normalising raw weights would under- and overflow long before the
sampler visits the tails.

A weight family is in *restricted* form when it can be written as

    u(y, x) = pi(y) * T(x | y) * lam(y, x)

with a scaling function satisfying lam(y, x) = lam(x, y). Restricted
weights admit a cheap sum-ratio acceptance probability that avoids
evaluating selection probabilities explicitly; see the kernels module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeightKind",
    "WeightSpec",
    "ZeroWeightError",
    "parse_weight_spec",
    "log_weight",
    "log_weights",
    "log_sum_exp",
    "selection_log_probs",
    "sample_candidate",
    "is_restricted_form",
]


def log_sum_exp(values, axis=None):
    """log(sum(exp(values))) with the usual max shift.

    Candidate sets are tiny (a handful of weights), so this avoids the
    per-call overhead of the scipy equivalent, which dominates the
    kernel's runtime otherwise.  All -inf inputs give -inf.
    """
    a = np.asarray(values, dtype=float)
    if axis is None:
        if a.ndim == 1 and 1 <= a.size <= 7:
            # sequential accumulation matches numpy's reduction bit for
            # bit below its pairwise-summation threshold of 8
            vals = a.tolist()
            m = vals[0]
            for v in vals[1:]:
                if v > m:
                    m = v
            if not math.isfinite(m):
                return m
            s = 0.0
            for e in np.exp(a - m).tolist():
                s += e
            return m + math.log(s)
        m = float(a.max()) if a.size else -math.inf
        if not math.isfinite(m):
            return m
        return m + math.log(float(np.exp(a - m).sum()))
    m = a.max(axis=axis, keepdims=True)
    shift = np.where(np.isfinite(m), m, 0.0)
    out = m + np.log(np.exp(a - shift).sum(axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


class ZeroWeightError(ValueError):
    """Every candidate weight is zero, so no selection distribution exists."""


class WeightKind(enum.Enum):
    CONSTANT = "constant"
    IMPORTANCE = "importance"
    PROPORTIONAL = "proportional"
    LOCALLY_BALANCED = "locally-balanced"
    JUMP_DISTANCE = "jump-distance"


@dataclass(frozen=True)
class WeightSpec:
    """A weight family together with its tuning exponent.

    ``alpha`` only affects jump-distance weights, where it controls how
    aggressively distant candidates are favoured; useful values sit
    roughly in (2, 4).
    """

    kind: WeightKind
    alpha: float = 3.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")

    def label(self) -> str:
        """Canonical config string, invertible by :func:`parse_weight_spec`."""
        if self.kind is WeightKind.JUMP_DISTANCE:
            return f"jump-distance({self.alpha:g})"
        return self.kind.value


def parse_weight_spec(text: str) -> WeightSpec:
    """Parse a config string such as ``"proportional"`` or ``"jump-distance(3)"``."""
    text = text.strip()
    if text.startswith("jump-distance"):
        rest = text[len("jump-distance"):]
        if rest == "":
            return WeightSpec(WeightKind.JUMP_DISTANCE)
        if rest.startswith("(") and rest.endswith(")"):
            try:
                return WeightSpec(WeightKind.JUMP_DISTANCE, float(rest[1:-1]))
            except ValueError as exc:
                raise ValueError(f"bad jump-distance exponent in {text!r}") from exc
        raise ValueError(f"unrecognised weight spec {text!r}")
    for kind in WeightKind:
        if text == kind.value:
            return WeightSpec(kind)
    raise ValueError(f"unrecognised weight spec {text!r}")


def log_weights(
    spec: WeightSpec,
    ys,
    x,
    log_pi_y,
    log_t_y_given_x,
    log_t_x_given_y,
) -> np.ndarray:
    """Log weights for a batch of candidates.

    Args:
        spec: weight family.
        ys: candidate points, shape ``(M, d)`` or ``(M,)`` for scalar
            coordinate moves.
        x: current point (or current coordinate value).
        log_pi_y: log target density at each candidate, shape ``(M,)``.
        log_t_y_given_x: log proposal density of each candidate given x;
            may be None for families that never read it.
        log_t_x_given_y: log proposal density of the reverse move; may be
            None for families that never read it.

    Returns:
        Array of shape ``(M,)``; entries are -inf where the weight is zero.
    """
    log_pi_y = np.asarray(log_pi_y, dtype=float)
    kind = spec.kind
    if kind is WeightKind.PROPORTIONAL:
        return log_pi_y.copy()
    if kind is WeightKind.LOCALLY_BALANCED:
        return 0.5 * log_pi_y
    if kind is WeightKind.CONSTANT:
        return log_pi_y + np.asarray(log_t_x_given_y, dtype=float)
    if kind is WeightKind.IMPORTANCE:
        return log_pi_y - np.asarray(log_t_y_given_x, dtype=float)
    # jump-distance: pi(y) * ||y - x||**alpha
    diff = np.asarray(ys, dtype=float) - np.asarray(x, dtype=float)
    if diff.ndim <= 1 and 1 <= diff.size <= 7:
        # scalar loop beats numpy dispatch for coordinate-move pools
        alpha = spec.alpha
        lp = log_pi_y.tolist()
        out = np.empty(diff.size)
        for k, dk in enumerate(diff.tolist()):
            adk = abs(dk)
            if adk == 0.0:
                out[k] = -np.inf if alpha > 0 else lp[k]
            else:
                out[k] = lp[k] + alpha * math.log(adk)
        return out
    if diff.ndim <= 1:
        dist = np.abs(diff)
    else:
        dist = np.linalg.norm(diff, axis=-1)
    if dist.min() > 0.0:
        return log_pi_y + spec.alpha * np.log(dist)
    out = np.array(log_pi_y, dtype=float, copy=True)
    zero = dist == 0.0
    with np.errstate(divide="ignore"):
        out[~zero] += spec.alpha * np.log(dist[~zero])
    if spec.alpha > 0:
        # coincident candidate carries zero weight; with alpha == 0 the
        # distance factor is identically one
        out[zero] = -np.inf
    return out


def log_weight(
    spec: WeightSpec,
    y_m,
    x,
    log_pi_y: float,
    log_t_y_given_x: float | None = None,
    log_t_x_given_y: float | None = None,
) -> float:
    """Log weight of a single candidate; see :func:`log_weights`."""
    ys = np.asarray(y_m, dtype=float)[None] if np.ndim(y_m) else np.asarray([y_m], dtype=float)
    lt_fwd = None if log_t_y_given_x is None else np.asarray([log_t_y_given_x])
    lt_bwd = None if log_t_x_given_y is None else np.asarray([log_t_x_given_y])
    return float(log_weights(spec, ys, x, np.asarray([log_pi_y]), lt_fwd, lt_bwd)[0])


def selection_log_probs(log_weights_arr) -> np.ndarray:
    """Normalise log weights into log selection probabilities.

    Raises:
        ZeroWeightError: if every weight is zero (all entries -inf).
        ValueError: if any entry is NaN or +inf.
    """
    lw = np.asarray(log_weights_arr, dtype=float)
    if lw.ndim != 1 or lw.size == 0:
        raise ValueError("log weights must be a nonempty 1-d array")
    m = lw.max()
    # the max is NaN if any entry is, and the comparison also rejects +inf
    if not m < np.inf:
        raise ValueError("log weights must be finite or -inf")
    if m == -np.inf:
        raise ZeroWeightError("all candidate weights are zero")
    return lw - (m + math.log(float(np.exp(lw - m).sum())))


def sample_candidate(log_probs, rng: np.random.Generator) -> int:
    """Draw one index from normalised log selection probabilities.

    Consumes exactly one uniform variate, which keeps chain replay
    deterministic for a fixed generator state.
    """
    lp = np.asarray(log_probs, dtype=float)
    if lp.ndim == 1 and 1 <= lp.size <= 7:
        ps = np.exp(lp).tolist()
        total = 0.0
        for p in ps:
            total += p
        u = rng.random() * total
        acc = 0.0
        for k, p in enumerate(ps):
            acc += p
            if u < acc:
                return k
        return lp.size - 1
    p = np.exp(lp)
    cdf = p.cumsum()
    u = rng.random() * cdf[-1]
    idx = int(cdf.searchsorted(u, side="right"))
    return min(idx, p.size - 1)


def is_restricted_form(spec: WeightSpec, proposal_symmetric: bool) -> bool:
    """Whether the weight admits the sum-ratio acceptance fast path.

    Constant weights factor with lam = 1 and importance weights with
    lam = (T(y|x) T(x|y))**-1, both symmetric for any proposal.
    Proportional and jump-distance weights factor through lam = 1/T only
    when the proposal itself is symmetric. Locally-balanced weights are a
    general-form family and never qualify.
    """
    if spec.kind in (WeightKind.CONSTANT, WeightKind.IMPORTANCE):
        return True
    if spec.kind in (WeightKind.PROPORTIONAL, WeightKind.JUMP_DISTANCE):
        return bool(proposal_symmetric)
    return False
