"""Benchmark target distributions.

Each target exposes an unnormalised log density over a fixed-dimension
real state, plus an analytic gradient used by the test suite to
cross-check the density formulas against finite differences. The
catalogue:

``banana``
    Warped Gaussian on R^d, d >= 2:

        log pi(x) = -x1^2/200 - (x2 + B*x1^2 - 100B)^2/2 - sum_{i>=3} x_i^2/2

    The curvature parameter B controls how sharply the ridge bends.

``funnel``
    Hierarchical scale model on R^(d+1) with state (y, x_1..x_d):

        y ~ N(0, 9),   x_i | y ~ N(0, exp(2y/beta))

    Small beta produces a narrow funnel neck that defeats fixed-scale
    random walks.

``mixture``
    Five Gaussian components with identity covariance: the origin with
    mixing probability 0.4, the two alternating-sign corners
    (+-3, -+3, ...) with 0.2 each, and the two diagonal corners
    (+-3, ..., +-3) with 0.1 each, so the density is symmetric under
    negating the state.

``regression``
    Posterior of a Bayesian linear regression with N(0, 100^2) priors on
    the coefficients and an inverse-gamma prior on the noise scale chosen
    to have mean 1 and variance 100.

``lighthouse``
    Posterior for the position (x0, y), y > 0, of a light source whose
    flashes hit the shoreline at Cauchy(x0, y)-distributed points.

``eight-schools``
    Hierarchical Gaussian model with a half-Cauchy(5) prior on the
    between-group scale, fit to per-school effect estimates read from a
    CSV data file.

Coordinate-wise kernels evaluate the log density along a single
coordinate many times per sweep, so the heavy targets provide vectorised
single-coordinate evaluations that agree exactly with full evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from .weights import log_sum_exp

__all__ = [
    "TargetDistribution",
    "BananaParams",
    "FunnelParams",
    "MixtureParams",
    "RegressionDataset",
    "LighthouseData",
    "EightSchoolsData",
    "banana_target",
    "funnel_target",
    "mixture_target",
    "regression_target",
    "lighthouse_target",
    "eight_schools_target",
    "gaussian_target",
    "banana_log_density",
    "funnel_log_density",
    "mixture_log_density",
    "regression_log_posterior",
    "lighthouse_log_posterior",
    "eight_schools_log_posterior",
    "coordinate_log_density",
    "make_regression_dataset",
    "default_lighthouse_data",
    "default_eight_schools_data",
]

_LOG_2PI = math.log(2.0 * math.pi)

# Inverse-gamma prior on the regression noise scale: shape/scale solving
# mean = scale/(shape-1) = 1 and variance = 1/(shape-2) = 100.
INV_GAMMA_SHAPE = 2.01
INV_GAMMA_SCALE = 1.01

# Coefficients get independent N(0, COEF_PRIOR_SD^2) priors.
COEF_PRIOR_SD = 100.0

_DATA_DIR = Path(__file__).parent / "data"


@dataclass(frozen=True)
class TargetDistribution:
    """A target density bundled with its evaluation helpers.

    Attributes:
        name: short identifier, e.g. ``"banana"``.
        dim: dimension of the state vector.
        log_density: maps a ``(dim,)`` array to a float (``-inf`` off
            support).
        params: the parameter object the target was built from.
        supports_coordinate_eval: True when ``coord_log_density`` is a
            fast vectorised path rather than the generic fallback.
        coord_log_density: optional ``(x, i, values) -> array`` giving the
            full log density with coordinate i replaced by each value.
        gradient: optional analytic gradient of the log density.
    """

    name: str
    dim: int
    log_density: Callable[[np.ndarray], float]
    params: object = None
    supports_coordinate_eval: bool = False
    coord_log_density: Callable | None = None
    gradient: Callable | None = None
    # optional (rows) -> (len(rows),) evaluation, elementwise identical
    # to mapping log_density over the rows; kernels fall back to a loop
    batch_log_density: Callable | None = None


def coordinate_log_density(target: TargetDistribution, x, i: int, xi_new):
    """Log density of ``x`` with coordinate ``i`` replaced by ``xi_new``.

    ``xi_new`` may be a scalar or a 1-d array of trial values; the return
    matches its shape. Equals full evaluation of the modified vector
    exactly, via the target's fast path when available and otherwise by
    direct substitution.
    """
    if not 0 <= i < target.dim:
        raise IndexError(f"coordinate {i} out of range for dim {target.dim}")
    values = np.asarray(xi_new, dtype=float)
    scalar = values.ndim == 0
    if scalar:
        values = values.reshape(1)
    if target.coord_log_density is not None:
        out = np.asarray(target.coord_log_density(np.asarray(x, dtype=float), i, values))
    else:
        x = np.array(x, dtype=float, copy=True)
        out = np.empty(values.shape)
        for k, v in enumerate(values):
            x[i] = v
            out[k] = target.log_density(x)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# banana


@dataclass(frozen=True)
class BananaParams:
    """Curvature B and dimension d >= 2."""

    B: float
    d: int = 10

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError("banana needs d >= 2")
        if not math.isfinite(self.B):
            raise ValueError("B must be finite")


def banana_log_density(x, params: BananaParams) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (params.d,):
        raise ValueError(f"expected shape ({params.d},), got {x.shape}")
    B = params.B
    bent = x[1] + B * x[0] ** 2 - 100.0 * B
    return float(-x[0] ** 2 / 200.0 - 0.5 * bent ** 2 - 0.5 * np.sum(x[2:] ** 2))


def banana_gradient(x, params: BananaParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    B = params.B
    bent = x[1] + B * x[0] ** 2 - 100.0 * B
    g = -x.copy()
    g[0] = -x[0] / 100.0 - bent * 2.0 * B * x[0]
    g[1] = -bent
    return g


def _banana_batch(rows, params: BananaParams) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    B = params.B
    bent = rows[:, 1] + B * rows[:, 0] ** 2 - 100.0 * B
    return (-rows[:, 0] ** 2 / 200.0 - 0.5 * bent ** 2
            - 0.5 * np.sum(rows[:, 2:] ** 2, axis=1))


def _banana_coord(x: np.ndarray, i: int, v: np.ndarray, params: BananaParams) -> np.ndarray:
    B = params.B
    tail_sq = np.sum(x[2:] ** 2)
    if i == 0:
        return -v ** 2 / 200.0 - 0.5 * (x[1] + B * v ** 2 - 100.0 * B) ** 2 - 0.5 * tail_sq
    head = -x[0] ** 2 / 200.0
    if i == 1:
        return head - 0.5 * (v + B * x[0] ** 2 - 100.0 * B) ** 2 - 0.5 * tail_sq
    bent = x[1] + B * x[0] ** 2 - 100.0 * B
    base = head - 0.5 * bent ** 2 - 0.5 * (tail_sq - x[i] ** 2)
    return base - 0.5 * v ** 2


def banana_target(params: BananaParams) -> TargetDistribution:
    return TargetDistribution(
        name="banana",
        dim=params.d,
        log_density=lambda x: banana_log_density(x, params),
        params=params,
        supports_coordinate_eval=True,
        coord_log_density=lambda x, i, v: _banana_coord(x, i, v, params),
        gradient=lambda x: banana_gradient(x, params),
        batch_log_density=lambda rows: _banana_batch(rows, params),
    )


# ---------------------------------------------------------------------------
# funnel


@dataclass(frozen=True)
class FunnelParams:
    """Scale sensitivity beta and the number d of funnel coordinates.

    The state has dimension d + 1: the log-scale coordinate y first, then
    the d conditionally Gaussian coordinates.
    """

    beta: float
    d: int = 9

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.d < 1:
            raise ValueError("funnel needs at least one x coordinate")


def _funnel_x_terms(sumsq: float, y, beta: float, d: int):
    # sum_i log N(x_i; 0, exp(2y/beta)); exp can overflow for very
    # negative y, where the density is zero unless every x_i is zero
    if np.ndim(y) == 0:
        y = float(y)
        try:
            prec = math.exp(-2.0 * y / beta)
        except OverflowError:
            prec = math.inf
        quad = 0.0 if sumsq == 0.0 else 0.5 * sumsq * prec
        out = -quad - d * y / beta - 0.5 * d * _LOG_2PI
        return -math.inf if math.isnan(out) else out
    t = -2.0 * np.asarray(y, dtype=float) / beta
    with np.errstate(over="ignore"):
        prec = np.exp(t)
    if sumsq == 0.0:
        quad = np.zeros_like(prec)
    else:
        quad = 0.5 * sumsq * prec
    out = -quad - d * np.asarray(y, dtype=float) / beta - 0.5 * d * _LOG_2PI
    return np.where(np.isnan(out), -np.inf, out)


def funnel_log_density(state, params: FunnelParams) -> float:
    state = np.asarray(state, dtype=float)
    if state.shape != (params.d + 1,):
        raise ValueError(f"expected shape ({params.d + 1},), got {state.shape}")
    y = state[0]
    xs = state[1:]
    lp_y = -y ** 2 / 18.0 - 0.5 * math.log(2.0 * math.pi * 9.0)
    lp_x = _funnel_x_terms(float(np.sum(xs ** 2)), y, params.beta, params.d)
    return float(lp_y + lp_x)


def funnel_gradient(state, params: FunnelParams) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    y = state[0]
    xs = state[1:]
    beta = params.beta
    prec = math.exp(-2.0 * y / beta)
    g = np.empty_like(state)
    g[0] = -y / 9.0 + float(np.sum(xs ** 2)) * prec / beta - params.d / beta
    g[1:] = -xs * prec
    return g


def _funnel_batch(rows, params: FunnelParams) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    y = rows[:, 0]
    sumsq = np.sum(rows[:, 1:] ** 2, axis=1)
    lp_y = -y ** 2 / 18.0 - 0.5 * math.log(2.0 * math.pi * 9.0)
    with np.errstate(over="ignore", invalid="ignore"):
        quad = 0.5 * sumsq * np.exp(-2.0 * y / params.beta)
    quad[sumsq == 0.0] = 0.0  # overrides the indeterminate 0 * inf
    lp_x = -quad - params.d * y / params.beta - 0.5 * params.d * _LOG_2PI
    lp_x = np.where(np.isnan(lp_x), -np.inf, lp_x)
    return lp_y + lp_x


def _funnel_coord(x: np.ndarray, i: int, v: np.ndarray, params: FunnelParams) -> np.ndarray:
    beta, d = params.beta, params.d
    xs = x[1:]
    sumsq = float(xs @ xs)
    if i == 0:
        lp_y = -v ** 2 / 18.0 - 0.5 * math.log(2.0 * math.pi * 9.0)
        return lp_y + _funnel_x_terms(sumsq, v, beta, d)
    y = x[0]
    # capped precision keeps the arithmetic finite deep in the funnel
    prec = math.exp(min(-2.0 * y / beta, 700.0))
    rest = sumsq - x[i] * x[i]
    lp_y = -y ** 2 / 18.0 - 0.5 * math.log(2.0 * math.pi * 9.0)
    quad = 0.5 * (rest + v ** 2) * prec
    return lp_y - quad - d * y / beta - 0.5 * d * _LOG_2PI


def funnel_target(params: FunnelParams) -> TargetDistribution:
    return TargetDistribution(
        name="funnel",
        dim=params.d + 1,
        log_density=lambda x: funnel_log_density(x, params),
        params=params,
        supports_coordinate_eval=True,
        coord_log_density=lambda x, i, v: _funnel_coord(x, i, v, params),
        gradient=lambda x: funnel_gradient(x, params),
        batch_log_density=lambda rows: _funnel_batch(rows, params),
    )


# ---------------------------------------------------------------------------
# Gaussian mixture


def _mixture_means(d: int) -> np.ndarray:
    # ordered so that pairing with the default weights (1, 2, 4, 2, 1)
    # puts the heaviest component at the origin and equal weight on each
    # negation pair, making the density symmetric under x -> -x
    alt = np.where(np.arange(d) % 2 == 0, 3.0, -3.0)
    return np.stack([np.full(d, -3.0), -alt, np.zeros(d), alt, np.full(d, 3.0)])


@dataclass(frozen=True)
class MixtureParams:
    """Five identity-covariance Gaussian components in dimension d."""

    d: int = 2
    means: np.ndarray = None
    weights: np.ndarray = None

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("mixture needs d >= 1")
        means = self.means if self.means is not None else _mixture_means(self.d)
        means = np.asarray(means, dtype=float)
        if means.ndim != 2 or means.shape[1] != self.d:
            raise ValueError("component means must have shape (k, d)")
        raw = self.weights if self.weights is not None else np.array([1.0, 2.0, 4.0, 2.0, 1.0])
        raw = np.asarray(raw, dtype=float)
        if raw.shape != (means.shape[0],) or np.any(raw <= 0):
            raise ValueError("weights must be positive, one per component")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "weights", raw / raw.sum())

    @property
    def log_weights(self) -> np.ndarray:
        return np.log(self.weights)


def mixture_log_density(x, params: MixtureParams) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (params.d,):
        raise ValueError(f"expected shape ({params.d},), got {x.shape}")
    diff = params.means - x
    sq = np.einsum("kd,kd->k", diff, diff)
    return float(log_sum_exp(params.log_weights - 0.5 * sq) - 0.5 * params.d * _LOG_2PI)


def mixture_gradient(x, params: MixtureParams) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    diff = params.means - x
    sq = np.einsum("kd,kd->k", diff, diff)
    logr = params.log_weights - 0.5 * sq
    r = np.exp(logr - log_sum_exp(logr))
    return r @ diff


def _mixture_batch(rows, params: MixtureParams) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    diff = params.means[None, :, :] - rows[:, None, :]
    sq = np.einsum("mkd,mkd->mk", diff, diff)
    lse = log_sum_exp(params.log_weights[None, :] - 0.5 * sq, axis=1)
    return lse - 0.5 * params.d * _LOG_2PI


def _mixture_coord(x: np.ndarray, i: int, v: np.ndarray, params: MixtureParams) -> np.ndarray:
    diff = params.means - x
    sq = np.einsum("kd,kd->k", diff, diff)
    base = sq - diff[:, i] ** 2
    trial = base[:, None] + (params.means[:, i][:, None] - v[None, :]) ** 2
    lse = log_sum_exp(params.log_weights[:, None] - 0.5 * trial, axis=0)
    return lse - 0.5 * params.d * _LOG_2PI


def mixture_target(params: MixtureParams) -> TargetDistribution:
    return TargetDistribution(
        name="mixture",
        dim=params.d,
        log_density=lambda x: mixture_log_density(x, params),
        params=params,
        supports_coordinate_eval=True,
        coord_log_density=lambda x, i, v: _mixture_coord(x, i, v, params),
        gradient=lambda x: mixture_gradient(x, params),
        batch_log_density=lambda rows: _mixture_batch(rows, params),
    )


# ---------------------------------------------------------------------------
# Bayesian linear regression


@dataclass(frozen=True)
class RegressionDataset:
    """Design matrix and responses for the regression posterior."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ValueError("X must be (n, d) with matching y of length n")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def write_csv(self, path) -> None:
        header = ",".join([f"x{j + 1}" for j in range(self.n_features)] + ["y"])
        data = np.column_stack([self.X, self.y])
        np.savetxt(path, data, delimiter=",", header=header, comments="")

    @classmethod
    def read_csv(cls, path) -> "RegressionDataset":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(X=data[:, :-1], y=data[:, -1])


def make_regression_dataset(
    seed: int,
    n: int = 1000,
    beta0: float = 1.0,
    beta=(0.1, 5.0, -5.0, 10.0),
    sigma: float = 0.5,
) -> RegressionDataset:
    """Simulate standard-normal covariates and Gaussian responses."""
    rng = np.random.default_rng(seed)
    beta = np.asarray(beta, dtype=float)
    X = rng.standard_normal((n, beta.size))
    y = beta0 + X @ beta + sigma * rng.standard_normal(n)
    return RegressionDataset(X=X, y=y)


def _coef_prior_logpdf(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return -v ** 2 / (2.0 * COEF_PRIOR_SD ** 2) - 0.5 * math.log(2.0 * math.pi * COEF_PRIOR_SD ** 2)


def _sigma_prior_logpdf(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    a, b = INV_GAMMA_SHAPE, INV_GAMMA_SCALE
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a * math.log(b) - math.lgamma(a) - (a + 1.0) * np.log(s) - b / s
    return np.where(s > 0, out, -np.inf)


def regression_log_posterior(theta, data: RegressionDataset) -> float:
    """Log posterior over theta = (beta0, beta_1..d, sigma)."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (data.n_features + 2,):
        raise ValueError(f"expected {data.n_features + 2} parameters, got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta must be finite")
    sigma = theta[-1]
    if sigma <= 0:
        return -math.inf
    resid = data.y - theta[0] - data.X @ theta[1:-1]
    ssr = float(resid @ resid)
    loglik = -data.n * math.log(sigma) - 0.5 * data.n * _LOG_2PI - ssr / (2.0 * sigma ** 2)
    prior = float(np.sum(_coef_prior_logpdf(theta[:-1]))) + float(_sigma_prior_logpdf(sigma))
    return loglik + prior


def regression_gradient(theta, data: RegressionDataset) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    sigma = theta[-1]
    resid = data.y - theta[0] - data.X @ theta[1:-1]
    g = np.empty_like(theta)
    g[0] = float(np.sum(resid)) / sigma ** 2 - theta[0] / COEF_PRIOR_SD ** 2
    g[1:-1] = data.X.T @ resid / sigma ** 2 - theta[1:-1] / COEF_PRIOR_SD ** 2
    ssr = float(resid @ resid)
    a, b = INV_GAMMA_SHAPE, INV_GAMMA_SCALE
    g[-1] = -data.n / sigma + ssr / sigma ** 3 - (a + 1.0) / sigma + b / sigma ** 2
    return g


def _regression_coord(x: np.ndarray, i: int, v: np.ndarray, data: RegressionDataset) -> np.ndarray:
    sigma = x[-1]
    resid = data.y - x[0] - data.X @ x[1:-1]
    ssr = float(resid @ resid)
    coef_priors = _coef_prior_logpdf(x[:-1])
    if i == x.size - 1:
        loglik = np.where(
            v > 0,
            -data.n * np.log(np.where(v > 0, v, 1.0)) - 0.5 * data.n * _LOG_2PI - ssr / (2.0 * v ** 2),
            -np.inf,
        )
        return loglik + float(np.sum(coef_priors)) + _sigma_prior_logpdf(v)
    col = np.ones(data.n) if i == 0 else data.X[:, i - 1]
    delta = v - x[i]
    g = float(resid @ col)
    h = float(col @ col)
    ssr_new = ssr - 2.0 * delta * g + delta ** 2 * h
    loglik = -data.n * math.log(sigma) - 0.5 * data.n * _LOG_2PI - ssr_new / (2.0 * sigma ** 2)
    prior_rest = float(np.sum(coef_priors)) - float(coef_priors[i]) + float(_sigma_prior_logpdf(sigma))
    return loglik + _coef_prior_logpdf(v) + prior_rest


def regression_target(data: RegressionDataset) -> TargetDistribution:
    return TargetDistribution(
        name="regression",
        dim=data.n_features + 2,
        log_density=lambda x: regression_log_posterior(x, data),
        params=data,
        supports_coordinate_eval=True,
        coord_log_density=lambda x, i, v: _regression_coord(x, i, v, data),
        gradient=lambda x: regression_gradient(x, data),
    )


# ---------------------------------------------------------------------------
# lighthouse


@dataclass(frozen=True)
class LighthouseData:
    """Observed flash positions along the shoreline."""

    flashes: np.ndarray

    def __post_init__(self) -> None:
        flashes = np.asarray(self.flashes, dtype=float)
        if flashes.ndim != 1 or flashes.size == 0:
            raise ValueError("flashes must be a nonempty 1-d array")
        object.__setattr__(self, "flashes", flashes)

    @classmethod
    def read_csv(cls, path) -> "LighthouseData":
        return cls(flashes=np.loadtxt(path, delimiter=",", skiprows=1, ndmin=1))


def default_lighthouse_data() -> LighthouseData:
    return LighthouseData.read_csv(_DATA_DIR / "lighthouse.csv")


# Support box keeping the posterior proper: |x0| bounded, 0 < y bounded.
LIGHTHOUSE_X_BOUND = 1.0e6
LIGHTHOUSE_Y_BOUND = 1.0e6


def lighthouse_log_posterior(theta, data: LighthouseData) -> float:
    """Log posterior over theta = (x0, y): flat prior on the support box,
    Cauchy(x0, y) likelihood per observed flash."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (2,):
        raise ValueError(f"expected 2 parameters, got {theta.shape}")
    x0, y = theta
    if not (0.0 < y <= LIGHTHOUSE_Y_BOUND) or abs(x0) > LIGHTHOUSE_X_BOUND:
        return -math.inf
    sq = (data.flashes - x0) ** 2
    return float(np.sum(np.log(y) - math.log(math.pi) - np.log(y ** 2 + sq)))


def lighthouse_gradient(theta, data: LighthouseData) -> np.ndarray:
    x0, y = np.asarray(theta, dtype=float)
    diff = data.flashes - x0
    denom = y ** 2 + diff ** 2
    return np.array([
        float(np.sum(2.0 * diff / denom)),
        float(np.sum(1.0 / y - 2.0 * y / denom)),
    ])


def lighthouse_target(data: LighthouseData | None = None) -> TargetDistribution:
    if data is None:
        data = default_lighthouse_data()
    return TargetDistribution(
        name="lighthouse",
        dim=2,
        log_density=lambda x: lighthouse_log_posterior(x, data),
        params=data,
        gradient=lambda x: lighthouse_gradient(x, data),
    )


# ---------------------------------------------------------------------------
# eight schools


@dataclass(frozen=True)
class EightSchoolsData:
    """Per-school effect estimates and their standard errors."""

    effects: np.ndarray
    sds: np.ndarray

    def __post_init__(self) -> None:
        effects = np.asarray(self.effects, dtype=float)
        sds = np.asarray(self.sds, dtype=float)
        if effects.shape != (8,) or sds.shape != (8,):
            raise ValueError("eight schools data needs exactly 8 effects and 8 sds")
        if np.any(sds <= 0):
            raise ValueError("standard errors must be positive")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "sds", sds)

    @classmethod
    def read_csv(cls, path) -> "EightSchoolsData":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != 2:
            raise ValueError("expected two columns: effect, sd")
        return cls(effects=data[:, 0], sds=data[:, 1])


def default_eight_schools_data() -> EightSchoolsData:
    return EightSchoolsData.read_csv(_DATA_DIR / "eight_schools.csv")


HALF_CAUCHY_SCALE = 5.0
MU_PRIOR_SD = 5.0


def eight_schools_log_posterior(theta, data: EightSchoolsData) -> float:
    """Log posterior over theta = (mu, tau, theta_1..theta_8).

    mu ~ N(0, 5^2); tau ~ half-Cauchy(5), implemented as a Cauchy(0, 5)
    log density restricted to tau > 0 (the truncation constant does not
    affect sampling); theta_i ~ N(mu, tau^2); y_i ~ N(theta_i, sd_i^2).
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (10,):
        raise ValueError(f"expected 10 parameters, got {theta.shape}")
    mu, tau = theta[0], theta[1]
    if tau <= 0:
        return -math.inf
    effects = theta[2:]
    lp = -mu ** 2 / (2.0 * MU_PRIOR_SD ** 2) - 0.5 * math.log(2.0 * math.pi * MU_PRIOR_SD ** 2)
    lp += -math.log(math.pi * HALF_CAUCHY_SCALE * (1.0 + (tau / HALF_CAUCHY_SCALE) ** 2))
    lp += float(np.sum(-((effects - mu) ** 2) / (2.0 * tau ** 2))) \
        - 8.0 * math.log(tau) - 4.0 * _LOG_2PI
    lp += float(np.sum(-((data.effects - effects) ** 2) / (2.0 * data.sds ** 2)
                       - np.log(data.sds))) - 4.0 * _LOG_2PI
    return float(lp)


def eight_schools_gradient(theta, data: EightSchoolsData) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    mu, tau = theta[0], theta[1]
    effects = theta[2:]
    g = np.empty(10)
    g[0] = -mu / MU_PRIOR_SD ** 2 + float(np.sum(effects - mu)) / tau ** 2
    g[1] = (
        -2.0 * tau / (HALF_CAUCHY_SCALE ** 2 + tau ** 2)
        - 8.0 / tau
        + float(np.sum((effects - mu) ** 2)) / tau ** 3
    )
    g[2:] = -(effects - mu) / tau ** 2 - (effects - data.effects) / data.sds ** 2
    return g


def eight_schools_target(data: EightSchoolsData | None = None) -> TargetDistribution:
    if data is None:
        data = default_eight_schools_data()
    return TargetDistribution(
        name="eight-schools",
        dim=10,
        log_density=lambda x: eight_schools_log_posterior(x, data),
        params=data,
        gradient=lambda x: eight_schools_gradient(x, data),
    )


# ---------------------------------------------------------------------------
# isotropic Gaussian, used by sanity checks and smoke tests


def gaussian_target(dim: int, variance: float = 1.0) -> TargetDistribution:
    """Standard isotropic N(0, variance * I) reference target."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    const = -0.5 * dim * math.log(2.0 * math.pi * variance)

    def logp(x):
        x = np.asarray(x, dtype=float)
        return float(const - 0.5 * np.sum(x ** 2) / variance)

    def coord(x, i, v):
        rest = np.sum(x ** 2) - x[i] ** 2
        return const - 0.5 * (rest + v ** 2) / variance

    def batch(rows):
        rows = np.asarray(rows, dtype=float)
        return const - 0.5 * np.sum(rows ** 2, axis=1) / variance

    return TargetDistribution(
        name="gaussian",
        dim=dim,
        log_density=logp,
        params={"variance": variance},
        supports_coordinate_eval=True,
        coord_log_density=coord,
        gradient=lambda x: -np.asarray(x, dtype=float) / variance,
        batch_log_density=batch,
    )
