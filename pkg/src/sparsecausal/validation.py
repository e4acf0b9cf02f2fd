"""Link- and network-level statistical validation.

A transfer entropy ``T`` estimated from ``q`` observations is a log
likelihood ratio per observation, so ``r * q * T`` (``r = 2``) is compared
with a chi-square with ``d`` degrees of freedom. The retrieved network as a
whole is scored against the truth with a hypergeometric tail probability.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DimensionError, InvalidArgumentError
from .estimators import ZERO_TOL, PrecisionMatrix
from .simulator import CausalityNetwork, column_index

D_RULES = ("tau", "block")


@dataclass(frozen=True)
class ValidationParams:
    p_v: float = 0.01
    r: float = 2.0
    bonferroni: bool = False
    d_rule: str = "tau"

    def __post_init__(self):
        # p_v = 1 is accepted as the vacuous test that keeps every T > 0
        if not 0.0 < self.p_v <= 1.0:
            raise InvalidArgumentError(f"p_v must lie in (0, 1], got {self.p_v!r}")
        if not self.r > 0:
            raise InvalidArgumentError(f"r must be positive, got {self.r!r}")
        if self.d_rule not in D_RULES:
            raise InvalidArgumentError(f"d_rule must be one of {D_RULES}")


@dataclass(frozen=True)
class ConfusionCounts:
    TP: int
    FP: int
    FN: int
    TN: int

    @property
    def n(self):
        """Retrieved links."""
        return self.TP + self.FP

    @property
    def K(self):
        """True links."""
        return self.TP + self.FN

    @property
    def m(self):
        """True non-links."""
        return self.FP + self.TN

    @property
    def total(self):
        return self.TP + self.FP + self.FN + self.TN

    @property
    def tp_rate(self):
        return self.TP / self.K if self.K else float("nan")

    @property
    def fp_over_n(self):
        """False positives scaled by the number of true links (can exceed 1)."""
        return self.FP / self.K if self.K else float("nan")

    @property
    def fp_rate(self):
        return self.FP / self.m if self.m else float("nan")


def chi2_cdf(x, d):
    """Chi-square CDF as the regularized lower incomplete gamma ``P(d/2, x/2)``."""
    if d < 1:
        raise InvalidArgumentError(f"degrees of freedom must be >= 1, got {d!r}")
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise InvalidArgumentError("chi2_cdf is defined for x >= 0")
    out = special.gammainc(0.5 * d, 0.5 * x)
    return float(out) if out.ndim == 0 else out


def chi2_sf(x, d):
    """Upper tail ``1 - chi2_cdf``, computed directly to keep tiny p-values."""
    if d < 1:
        raise InvalidArgumentError(f"degrees of freedom must be >= 1, got {d!r}")
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise InvalidArgumentError("chi2_sf is defined for x >= 0")
    out = special.gammaincc(0.5 * d, 0.5 * x)
    return float(out) if out.ndim == 0 else out


def degrees_of_freedom(tau, params, source_dim=1, target_dim=1):
    if params.d_rule == "block":
        return tau * source_dim * target_dim
    return tau


def te_pvalue(T, q, tau, params=None, source_dim=1, target_dim=1):
    """Null probability of a transfer entropy at least ``T``.

    Vectorized over ``T``; NaN entries (e.g. a diagonal) map to NaN.
    """
    params = params or ValidationParams()
    if q < 1:
        raise InvalidArgumentError(f"q must be >= 1, got {q!r}")
    T = np.asarray(T, dtype=float)
    if np.any(T[~np.isnan(T)] < 0):
        raise InvalidArgumentError("transfer entropy must be non-negative")
    d = degrees_of_freedom(tau, params, source_dim, target_dim)
    stat = params.r * q * np.where(np.isnan(T), 0.0, T)
    pv = np.where(np.isnan(T), np.nan, special.gammaincc(0.5 * d, 0.5 * stat))
    return float(pv) if pv.ndim == 0 else pv


def bonferroni_threshold(p_v, p):
    """Per-link threshold controlling the family of ``p^2 - p`` ordered pairs."""
    if p < 2:
        raise InvalidArgumentError(f"p must be >= 2, got {p!r}")
    return p_v / (p * p - p)


def effective_threshold(params, p):
    return bonferroni_threshold(params.p_v, p) if params.bonferroni else params.p_v


def inference_network(J, tau, p=None):
    """Edge ``i -> j`` iff some lagged column of ``i`` couples to ``(j, lag 0)`` in ``J``."""
    Jm = J.J if isinstance(J, PrecisionMatrix) else np.asarray(J, dtype=float)
    if p is None:
        p = Jm.shape[0] // (tau + 1)
    if p * (tau + 1) != Jm.shape[0]:
        raise DimensionError(f"J of size {Jm.shape[0]} does not match p={p}, tau={tau}")
    targets = [column_index(j, 0, p) for j in range(p)]
    adj = np.zeros((p, p), dtype=bool)
    for lag in range(1, tau + 1):
        sources = [column_index(i, lag, p) for i in range(p)]
        adj |= np.abs(Jm[np.ix_(sources, targets)]) > ZERO_TOL
    return CausalityNetwork(adj)


def validated_network(te, q, tau, params=None):
    """Keep the pairs whose transfer entropy is significant at the effective threshold."""
    params = params or ValidationParams()
    values = te.values if hasattr(te, "values") else np.asarray(te, dtype=float)
    p = values.shape[0]
    pv = te_pvalue(values, q, tau, params)
    threshold = effective_threshold(params, p)
    with np.errstate(invalid="ignore"):
        adj = ((pv < threshold) | (threshold >= 1.0)) & (values > 0)
    return CausalityNetwork(adj)


def confusion(retrieved, truth):
    """Confusion counts over the ``p^2 - p`` ordered pairs (self-loops excluded)."""
    R = retrieved.adjacency if isinstance(retrieved, CausalityNetwork) else np.asarray(retrieved, bool)
    T = truth.adjacency if isinstance(truth, CausalityNetwork) else np.asarray(truth, bool)
    if R.shape != T.shape:
        raise DimensionError(f"network shapes differ: {R.shape} vs {T.shape}")
    off = ~np.eye(R.shape[0], dtype=bool)
    R, T = R & off, T & off
    tp = int(np.sum(R & T))
    fp = int(np.sum(R & ~T))
    fn = int(np.sum(~R & T & off))
    tn = int(np.sum(~R & ~T & off))
    return ConfusionCounts(tp, fp, fn, tn)


def _log_comb(n, k):
    return special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)


def hypergeometric_log_pmf(k, n, K, p):
    """log P(X = k) for ``n`` draws from ``p^2 - p`` pairs of which ``K`` are true."""
    M = p * p - p
    k = np.asarray(k, dtype=float)
    return _log_comb(K, k) + _log_comb(M - K, n - k) - _log_comb(M, n)


def hypergeometric_pvalue(TP, n, K, p):
    """``P(X >= TP)``: chance of at least ``TP`` true links among ``n`` random picks."""
    M = p * p - p
    if not (0 <= TP <= min(n, K)) or n > M or K > M or n < 0 or K < 0:
        raise InvalidArgumentError(f"inconsistent counts TP={TP}, n={n}, K={K}, p={p}")
    if TP == 0:
        return 1.0
    lo = max(TP, n - (M - K))
    hi = min(n, K)
    if lo > hi:
        return 0.0
    logs = hypergeometric_log_pmf(np.arange(lo, hi + 1), n, K, p)
    return float(min(1.0, np.exp(special.logsumexp(logs))))
