"""Left-to-right Gaussian hidden Markov segmentation.

The chain has K states, stays in state k with probability p, moves to k+1
with probability 1-p, and never moves otherwise (the last state is
absorbing).  Observations are conditionally Gaussian around a per-state
mean with one shared sigma; emission densities are used without their
normalization constant, so joint log-likelihoods here are comparable to
each other but not to fully normalized densities.

Segmentation alternates two exact steps until the likelihood settles:
re-estimate per-state parameters from the current segmentation, then
re-decode the state path with the Viterbi algorithm.  Each iteration can
only improve the joint likelihood while the path keeps all K states, which
is what makes the loop a hard-assignment variant of EM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SIGMA_FLOOR,
    Segmentation,
    StateSequence,
    TimeSeries,
    _freeze,
    global_sigma,
    segmentation_cost,
    segmentation_from_states,
)
from .costs import lag_matrix

__all__ = [
    "HmmParams",
    "EmIteration",
    "EmTrace",
    "transition_matrix",
    "joint_neg_log_likelihood",
    "viterbi",
    "hmm_segment",
]


@dataclass(frozen=True)
class HmmParams:
    """Parameters (K, p, per-state means, shared sigma)."""

    K: int
    p: float
    means: np.ndarray
    sigma: float

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly between 0 and 1")
        means = np.asarray(self.means, dtype=np.float64).reshape(-1)
        if means.size != self.K:
            raise ValueError("means must have length K")
        object.__setattr__(self, "means", _freeze(means))
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")


def transition_matrix(K: int, p: float) -> np.ndarray:
    """K x K matrix with p on the diagonal, 1-p above it, absorbing last row."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    P = np.zeros((K, K))
    for k in range(K - 1):
        P[k, k] = p
        P[k, k + 1] = 1.0 - p
    P[K - 1, K - 1] = 1.0
    return P


def _transition_neg_log_likelihood(states: np.ndarray, K: int, p: float) -> float:
    # Path starts from the implicit state 1 before the first observation.
    path = np.concatenate([[1], states])
    steps = path[1:] - path[:-1]
    if np.any((steps < 0) | (steps > 1)) or path.max() > K:
        return math.inf
    transitions = int(np.count_nonzero(steps))
    # Self-transitions out of the absorbing last state cost nothing.
    stays = int(np.count_nonzero((steps == 0) & (path[:-1] < K)))
    return -(stays * math.log(p) + transitions * math.log(1.0 - p))


def joint_neg_log_likelihood(
    z: StateSequence, x: TimeSeries, params: HmmParams
) -> float:
    """Negative log of the joint likelihood of a state path and the series.

    Sums -log P over the actual transitions of the path (starting from
    state 1) plus the squared deviations (x_t - mean[z_t])^2 / (2 sigma^2).
    Returns +inf if the path uses a forbidden transition.
    """
    if len(z) != len(x):
        raise ValueError("state sequence and series must have the same length")
    states = z.states
    if states.max() > params.K:
        raise ValueError("state sequence uses states beyond K")
    trans = _transition_neg_log_likelihood(states, params.K, params.p)
    if math.isinf(trans):
        return math.inf
    dev = x.values - params.means[states - 1]
    return trans + float(dev @ dev) / (2.0 * params.sigma**2)


def _decode(log_emissions: np.ndarray, p: float) -> tuple[np.ndarray, float]:
    """Viterbi in the log domain for the bidiagonal left-to-right chain.

    ``log_emissions`` is (T, K).  Returns (0-based states, max joint
    log-likelihood).  Ties prefer the lowest state index.
    """
    T, K = log_emissions.shape
    log_stay = np.full(K, math.log(p))
    log_stay[K - 1] = 0.0
    log_next = math.log(1.0 - p)
    idx = np.arange(K)
    q = np.full(K, -np.inf)
    q[0] = 0.0
    back = np.empty((T + 1, K), dtype=np.int32)
    enter = np.empty(K)
    for t in range(1, T + 1):
        enter[0] = -np.inf
        enter[1:] = q[:-1] + log_next
        stay = q + log_stay
        take_enter = enter >= stay
        back[t] = np.where(take_enter, idx - 1, idx)
        q = np.where(take_enter, enter, stay) + log_emissions[t - 1]
    last = int(np.argmax(q))
    loglik = float(q[last])
    states = np.empty(T, dtype=np.int64)
    states[T - 1] = last
    for t in range(T, 1, -1):
        states[t - 2] = back[t, states[t - 1]]
    return states, loglik


def viterbi(x: TimeSeries, params: HmmParams) -> tuple[StateSequence, float]:
    """Most likely state path and its joint log-likelihood."""
    dev = x.values[:, None] - params.means[None, :]
    log_em = -(dev * dev) / (2.0 * params.sigma**2)
    states, loglik = _decode(log_em, params.p)
    return StateSequence(states + 1), loglik


@dataclass(frozen=True)
class EmIteration:
    """One iterate: the decoded path paired with parameters refit to it."""

    iteration: int
    params: np.ndarray       # (K,) means, or (K, order+1) AR coefficients
    segmentation: Segmentation
    log_likelihood: float    # joint log-likelihood of (path, refit params)
    cost: float              # total squared deviation / prediction error
    states_used: int


@dataclass(frozen=True)
class EmTrace:
    records: tuple[EmIteration, ...]
    final_states: StateSequence
    sigma: float
    converged: bool
    in_phi_k: bool           # every iterate kept all K states
    collapsed: bool          # final iterate used fewer than K states
    restart_index: int | None = None

    @property
    def iterations(self) -> int:
        """Number of decode iterations performed (record 0 is the init)."""
        return self.records[-1].iteration

    @property
    def final(self) -> EmIteration:
        return self.records[-1]


def _even_split_states(T: int, K: int) -> np.ndarray:
    lengths = np.full(K, T // K, dtype=np.int64)
    lengths[: T % K] += 1
    return np.repeat(np.arange(1, K + 1), lengths)


def _random_split_states(T: int, K: int, rng: np.random.Generator) -> np.ndarray:
    cuts = np.sort(rng.choice(np.arange(1, T), size=K - 1, replace=False))
    lengths = np.diff(np.concatenate([[0], cuts, [T]]))
    return np.repeat(np.arange(1, K + 1), lengths)


class _MeansModel:
    """Per-state sample means; cost is the within-segment squared deviation."""

    def __init__(self, x: TimeSeries, K: int):
        self.values = x.values
        self.K = K

    def refit(self, states: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
        counts = np.bincount(states, minlength=self.K + 1)[1:]
        sums = np.bincount(states, weights=self.values, minlength=self.K + 1)[1:]
        means = (
            np.full(self.K, self.values.mean()) if prev is None else prev.copy()
        )
        used = counts > 0
        means[used] = sums[used] / counts[used]
        return means

    def log_emissions(self, params: np.ndarray, sigma: float) -> np.ndarray:
        dev = self.values[:, None] - params[None, :]
        return -(dev * dev) / (2.0 * sigma**2)

    def cost(self, states: np.ndarray, params: np.ndarray) -> float:
        dev = self.values - params[states - 1]
        return float(dev @ dev)


class _ArModel:
    """Per-state autoregressions (ridge-seeded least squares per segment)."""

    def __init__(self, x: TimeSeries, K: int, order: int, delta: float):
        self.values = x.values
        self.K = K
        self.order = order
        self.delta = delta
        self.U = lag_matrix(x.values, order)
        self.eye = np.eye(order + 1)

    def refit(self, states: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
        coefs = (
            np.zeros((self.K, self.order + 1)) if prev is None else prev.copy()
        )
        for k in np.unique(states):
            rows = states == k
            Uk = self.U[rows]
            coefs[k - 1] = np.linalg.solve(
                Uk.T @ Uk + self.delta * self.eye, Uk.T @ self.values[rows]
            )
        return coefs

    def log_emissions(self, params: np.ndarray, sigma: float) -> np.ndarray:
        err = self.values[:, None] - self.U @ params.T
        return -(err * err) / (2.0 * sigma**2)

    def cost(self, states: np.ndarray, params: np.ndarray) -> float:
        err = self.values - np.einsum("ij,ij->i", self.U, params[states - 1])
        return float(err @ err)


def _run_em(
    model,
    x: TimeSeries,
    K: int,
    p: float,
    sigma: float,
    z0: np.ndarray,
    epsilon: float,
    max_iter: int,
    restart_index: int | None,
) -> EmTrace:
    def record(i: int, states: np.ndarray, params: np.ndarray) -> EmIteration:
        cost = model.cost(states, params)
        loglik = -(
            _transition_neg_log_likelihood(states, K, p)
            + cost / (2.0 * sigma**2)
        )
        return EmIteration(
            iteration=i,
            params=params,
            segmentation=segmentation_from_states(StateSequence(states)),
            log_likelihood=loglik,
            cost=cost,
            states_used=int(np.unique(states).size),
        )

    states = z0
    params = model.refit(states, None)
    records = [record(0, states, params)]
    converged = False
    for i in range(1, max_iter + 1):
        new_states, _ = _decode(model.log_emissions(params, sigma), p)
        new_states += 1
        params = model.refit(new_states, params)
        records.append(record(i, new_states, params))
        states = new_states
        if abs(records[-1].log_likelihood - records[-2].log_likelihood) < epsilon:
            converged = True
            break
    return EmTrace(
        records=tuple(records),
        final_states=StateSequence(states),
        sigma=sigma,
        converged=converged,
        in_phi_k=all(r.states_used == K for r in records),
        collapsed=records[-1].states_used < K,
        restart_index=restart_index,
    )


def hmm_segment(
    x: TimeSeries,
    K: int,
    p: float = 0.9,
    *,
    model: str = "means",
    order: int = 1,
    delta: float = 1e-6,
    epsilon: float = 1e-9,
    max_iter: int = 100,
    restarts: int = 0,
    seed: int | None = None,
    sigma_min: float = SIGMA_FLOOR,
) -> tuple[Segmentation, EmTrace]:
    """Segment ``x`` into (at most) K blocks by iterated re-estimation and
    Viterbi decoding.

    The default initialization is a deterministic equal split.  With
    ``restarts`` > 0, that candidate plus ``restarts`` seeded random splits
    are all run to convergence and the best final likelihood wins, with
    runs that kept all K states preferred over collapsed ones.

    The shared sigma is estimated once from the whole series and held
    fixed.  ``model`` selects the segment family: "means" (default) or
    "ar" with the given ``order``.
    """
    T = len(x)
    if T < 2:
        raise ValueError("need at least two observations")
    if not 2 <= K <= T:
        raise ValueError(f"K must be in [2, {T}], got {K}")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    if model == "means":
        fitter = _MeansModel(x, K)
    elif model == "ar":
        fitter = _ArModel(x, K, order, delta)
    else:
        raise ValueError(f"unsupported model {model!r} (use 'means' or 'ar')")
    sigma = max(global_sigma(x), sigma_min)

    inits: list[tuple[int | None, np.ndarray]] = [(None, _even_split_states(T, K))]
    if restarts > 0:
        rng = np.random.Generator(np.random.PCG64(seed))
        inits = [(0, inits[0][1])] + [
            (r, _random_split_states(T, K, rng)) for r in range(1, restarts + 1)
        ]

    best: EmTrace | None = None
    for ridx, z0 in inits:
        trace = _run_em(fitter, x, K, p, sigma, z0, epsilon, max_iter, ridx)
        if best is None:
            best = trace
            continue
        better = (not trace.collapsed, trace.final.log_likelihood) > (
            not best.collapsed,
            best.final.log_likelihood,
        )
        if better:
            best = trace
    assert best is not None
    return best.final.segmentation, best
