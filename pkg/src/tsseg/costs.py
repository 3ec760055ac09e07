"""Segment cost models.

Every model assigns a nonnegative cost d[s, t] to fitting one segment over
the (1-based, inclusive) window [s, t]:

* ``means``: squared deviation around the window mean.
* ``ar``:    squared prediction error of an autoregression of a given order
             (with intercept) fitted to the window.
* ``poly``:  squared residual of a polynomial in the within-segment time
             offset fitted to the window.

Each model has a direct evaluator (the slow, obviously-correct form) and a
full-matrix builder.  The matrix builders run in O(T^2) for the means model
(by peeling one leading point at a time off each window) and O(T^2 l^2) for
the autoregressive model (recursive least squares), instead of the O(T^3)
cost of evaluating every window from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TimeSeries, _freeze

__all__ = [
    "CostMatrix",
    "SingularWindowError",
    "means_cost_direct",
    "means_cost_column",
    "precompute_means_cost",
    "ar_cost_exact",
    "precompute_ar_cost",
    "poly_cost",
    "precompute_poly_cost",
    "build_cost_matrix",
]


class SingularWindowError(Exception):
    """The design matrix of a window [s, t] is singular."""

    def __init__(self, s: int, t: int, message: str | None = None):
        self.window = (s, t)
        super().__init__(message or f"singular design on window [{s}, {t}]")


@dataclass(frozen=True)
class CostMatrix:
    """Triangular table of window costs d[s, t] for 1 <= s <= t <= T.

    Storage is row-major by window end: ``by_end[t-1, s-1]`` holds d[s, t],
    so the dynamic program can read each column d[., t] contiguously.

    ``flagged`` marks under-determined windows (too short to identify the
    model); their stored cost is 0 and segmenters should avoid them unless
    no alternative exists.  ``boundary`` marks windows whose regressors use
    clamped values from before the start of the series (informational).
    """

    by_end: np.ndarray
    model_tag: str
    model_params: dict = field(default_factory=dict)
    flagged: np.ndarray | None = None
    boundary: np.ndarray | None = None

    def __post_init__(self) -> None:
        be = np.asarray(self.by_end, dtype=np.float64)
        if be.ndim != 2 or be.shape[0] != be.shape[1]:
            raise ValueError("cost table must be square")
        object.__setattr__(self, "by_end", _freeze(be))
        for name in ("flagged", "boundary"):
            m = getattr(self, name)
            if m is not None:
                m = np.asarray(m, dtype=bool)
                if m.shape != be.shape:
                    raise ValueError(f"{name} mask must match the cost table shape")
                object.__setattr__(self, name, _freeze(m))

    @property
    def n(self) -> int:
        return int(self.by_end.shape[0])

    @property
    def default_min_segment_length(self) -> int:
        """Shortest window a segmenter should select by default."""
        if self.model_tag == "means":
            return 1
        return int(self.model_params.get("order", 0)) + 2

    def window_cost(self, s: int, t: int) -> float:
        self._check_window(s, t)
        return float(self.by_end[t - 1, s - 1])

    def is_flagged(self, s: int, t: int) -> bool:
        self._check_window(s, t)
        return bool(self.flagged is not None and self.flagged[t - 1, s - 1])

    def column(self, t: int, masked: bool = True) -> np.ndarray:
        """Costs d[s, t] for s = 1..t; flagged windows become +inf if masked."""
        col = self.by_end[t - 1, :t]
        if masked and self.flagged is not None:
            col = np.where(self.flagged[t - 1, :t], np.inf, col)
        return col

    def _check_window(self, s: int, t: int) -> None:
        if not (1 <= s <= t <= self.n):
            raise ValueError(f"window [{s}, {t}] out of range for T={self.n}")

    def to_tsv(self) -> str:
        """Tab-separated triangular dump; line t holds d[1, t] .. d[t, t]."""
        lines = []
        for t in range(1, self.n + 1):
            lines.append("\t".join("%.17g" % v for v in self.by_end[t - 1, :t]))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# means model
# ---------------------------------------------------------------------------

def means_cost_direct(x: TimeSeries, s: int, t: int) -> float:
    """Squared deviation of x_s..x_t around the window mean, two-pass.

    This is the O(window) definition, kept as the ground truth the fast
    matrix builder is checked against.
    """
    if not (1 <= s <= t <= len(x)):
        raise ValueError(f"window [{s}, {t}] out of range for T={len(x)}")
    w = x.values[s - 1 : t]
    r = w - w.mean()
    return float(r @ r)


def means_cost_column(values: np.ndarray, t: int) -> np.ndarray:
    """One column d[s, t], s = 1..t, of the means cost table.

    Peels the leading point off the window: with p[s] the mean of x_s..x_t,
    d[s, t] = d[s+1, t] + (t - s) * (p[s+1] - p[s])^2 + (x_s - p[s])^2.
    The whole column is the suffix sum of those per-s increments, which
    keeps the floating-point evaluation order identical whether columns are
    stored or produced on the fly.
    """
    w = values[:t]
    if t == 1:
        return np.zeros(1)
    suffix_sums = np.cumsum(w[::-1])[::-1]
    lengths = np.arange(t, 0, -1)
    p = suffix_sums / lengths
    q = p[1:] - p[:-1]
    increments = (lengths[:-1] - 1) * q * q + (w[:-1] - p[:-1]) ** 2
    col = np.empty(t)
    col[-1] = 0.0
    col[:-1] = np.cumsum(increments[::-1])[::-1]
    return col


def precompute_means_cost(x: TimeSeries) -> CostMatrix:
    """Full means cost table in O(T^2) time."""
    T = len(x)
    by_end = np.zeros((T, T))
    for t in range(1, T + 1):
        by_end[t - 1, :t] = means_cost_column(x.values, t)
    return CostMatrix(by_end=by_end, model_tag="means")


# ---------------------------------------------------------------------------
# autoregressive model
# ---------------------------------------------------------------------------

def lag_matrix(values: np.ndarray, order: int) -> np.ndarray:
    """Regressor rows u_t = [1, x_{t-1}, ..., x_{t-order}] for t = 1..T.

    Lags reaching before the start of the series are clamped to x_1, so the
    first ``order`` rows are partly synthetic; cost matrices mark windows
    that include them as boundary windows.
    """
    T = len(values)
    U = np.ones((T, order + 1))
    for j in range(1, order + 1):
        U[:, j] = values[np.maximum(np.arange(T) - j, 0)]
    return U


def ar_cost_exact(
    x: TimeSeries, s: int, t: int, order: int
) -> tuple[float, np.ndarray]:
    """Least-squares autoregression on the window [s, t], via the normal
    equations; returns (squared prediction error, coefficients).

    Coefficients are ordered [intercept, lag 1, ..., lag ``order``].  The
    first ``order`` observations of the series have no real lags, so
    windows reaching into them are fitted and charged on the rows from
    max(s, order+1) on (the usual conditioning on the first observations).
    """
    if not (1 <= s <= t <= len(x)):
        raise ValueError(f"window [{s}, {t}] out of range for T={len(x)}")
    lo = max(s, order + 1)
    if t - lo + 1 <= order + 1:
        raise ValueError(
            f"window [{s}, {t}] has {max(t - lo + 1, 0)} usable points, "
            f"not enough for order {order}"
        )
    U = lag_matrix(x.values, order)[lo - 1 : t]
    w = x.values[lo - 1 : t]
    gram = U.T @ U
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > 1e12:
        raise SingularWindowError(s, t)
    try:
        coef = np.linalg.solve(gram, U.T @ w)
    except np.linalg.LinAlgError as exc:
        raise SingularWindowError(s, t, str(exc)) from exc
    r = w - U @ coef
    return float(r @ r), coef


def precompute_ar_cost(
    x: TimeSeries, order: int, delta: float = 1e-6
) -> CostMatrix:
    """Autoregressive cost table via recursive least squares, O(T^2 order^2).

    For each start s the window is grown one point at a time from
    max(s, order+1) (matching :func:`ar_cost_exact`).  The inverse Gram
    matrix starts at I/delta (a ridge seed pulling ties toward the
    minimum-norm solution).  The running sum

        v += e * e / (1 + u P u'),

    with e the prediction error before the coefficient update, is exactly
    the minimized ridge objective of the rows seen so far; subtracting the
    ridge penalty delta |coef|^2 leaves the plain squared prediction error,
    so the stored costs agree with the exact fit up to O(delta) instead of
    undercounting early errors the way a sum of one-step residuals does.

    Windows with fewer than order + 2 usable rows cannot identify the
    model; they are stored as 0 and flagged.  Windows whose stated start
    lies in the first ``order`` positions are marked as boundary windows.
    """
    T = len(x)
    if T <= order + 1:
        raise ValueError(f"series of length {T} too short for order {order}")
    if delta <= 0:
        raise ValueError("delta must be positive")
    U = lag_matrix(x.values, order)
    values = x.values
    dim = order + 1
    by_end = np.zeros((T, T))
    flagged = np.zeros((T, T), dtype=bool)
    boundary = np.zeros((T, T), dtype=bool)
    eye = np.eye(dim)
    for s in range(1, T + 1):
        P = eye / delta
        coef = np.zeros(dim)
        v = 0.0
        lo = max(s, order + 1)
        flagged[s - 1 : lo - 1, s - 1] = True  # windows ending before any usable row
        for t in range(lo, T + 1):
            u = U[t - 1]
            e = values[t - 1] - u @ coef
            Pu = P @ u
            denom = 1.0 + u @ Pu
            P -= np.outer(Pu, Pu) / denom
            coef = coef + (Pu / denom) * e
            v += e * e / denom
            if t - lo + 1 <= order + 1:
                flagged[t - 1, s - 1] = True
            else:
                by_end[t - 1, s - 1] = max(v - delta * (coef @ coef), 0.0)
        if s <= order:
            boundary[s - 1 :, s - 1] = True
    return CostMatrix(
        by_end=by_end,
        model_tag="ar",
        model_params={"order": order, "delta": delta},
        flagged=flagged,
        boundary=boundary,
    )


# ---------------------------------------------------------------------------
# polynomial trend model
# ---------------------------------------------------------------------------

def poly_cost(
    x: TimeSeries, s: int, t: int, degree: int
) -> tuple[float, np.ndarray]:
    """Least-squares polynomial in the within-segment offset 1..(t-s+1).

    Returns (squared residual, coefficients [a_0, ..., a_degree]).
    """
    if not (1 <= s <= t <= len(x)):
        raise ValueError(f"window [{s}, {t}] out of range for T={len(x)}")
    n = t - s + 1
    if n <= degree + 1:
        raise ValueError(
            f"window [{s}, {t}] has {n} points, not enough for degree {degree}"
        )
    design = np.vander(np.arange(1.0, n + 1.0), degree + 1, increasing=True)
    w = x.values[s - 1 : t]
    coef, _, rank, _ = np.linalg.lstsq(design, w, rcond=None)
    if rank < degree + 1:
        raise SingularWindowError(s, t, "rank-deficient polynomial design")
    r = w - design @ coef
    return float(r @ r), coef


def precompute_poly_cost(x: TimeSeries, degree: int) -> CostMatrix:
    """Polynomial cost table; short windows are stored as 0 and flagged."""
    T = len(x)
    if T <= degree + 1:
        raise ValueError(f"series of length {T} too short for degree {degree}")
    by_end = np.zeros((T, T))
    flagged = np.zeros((T, T), dtype=bool)
    for t in range(1, T + 1):
        for s in range(1, t + 1):
            if t - s + 1 <= degree + 1:
                flagged[t - 1, s - 1] = True
            else:
                by_end[t - 1, s - 1] = poly_cost(x, s, t, degree)[0]
    return CostMatrix(
        by_end=by_end,
        model_tag="poly",
        model_params={"order": degree},
        flagged=flagged,
    )


def build_cost_matrix(
    x: TimeSeries,
    model: str = "means",
    order: int | None = None,
    delta: float = 1e-6,
) -> CostMatrix:
    """Dispatch to the matrix builder for ``model`` in {means, ar, poly}."""
    if model == "means":
        return precompute_means_cost(x)
    if order is None:
        raise ValueError(f"cost model {model!r} needs an order")
    if model == "ar":
        return precompute_ar_cost(x, order, delta)
    if model == "poly":
        return precompute_poly_cost(x, order)
    raise ValueError(f"unknown cost model {model!r}")
