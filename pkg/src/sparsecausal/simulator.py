"""Sparse upper-triangular VAR(tau) processes with a known causal structure.

Orientation convention
----------------------
Row ``i`` of every coefficient matrix ``A_lag`` is the equation of variable
``i``::

    Z[t, i] = sum_lag sum_j A_lag[i, j] * Z[t - lag, j] + U[t, i]

so a nonzero ``A_lag[i, j]`` means *column variable j causes row variable i*.
A :class:`CausalityNetwork` stores ``adjacency[src, dst]``; the true network
is therefore the transpose of the union of nonzero off-diagonal coefficients.
Upper-triangular matrices make higher-index variables drive lower-index ones,
which cannot form a cycle.

Lagged panel layout
-------------------
Column ``lag * p + var`` of a :class:`LaggedPanel` holds ``var`` at ``lag``:
the lag-0 block of all ``p`` variables comes first, then lag 1, and so on.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._backend import kernels
from .errors import InsufficientLengthError, InvalidArgumentError, NumericOverflowError

DEFAULT_MAGNITUDE_BOUND = 1e8
RHO_TARGET = 0.95
DIAG_SCALE = 0.5
DIAG_CLIP = 0.9


@dataclass
class ProcessSpec:
    p: int
    tau: int
    coeffs: np.ndarray  # shape (tau, p, p); coeffs[lag - 1] is A_lag
    seed: int | None = None

    @property
    def n_links(self):
        return int(np.count_nonzero(true_network(self).adjacency))


@dataclass
class CausalityNetwork:
    """Directed graph over ``p`` variables; ``adjacency[i, j]`` means i -> j."""

    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise InvalidArgumentError(f"adjacency must be square, got {adj.shape}")
        np.fill_diagonal(adj, False)
        self.adjacency = adj

    @property
    def p(self):
        return self.adjacency.shape[0]

    @property
    def n_edges(self):
        return int(self.adjacency.sum())

    def edges(self):
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adjacency))]

    @classmethod
    def empty(cls, p):
        return cls(np.zeros((p, p), dtype=bool))


@dataclass
class TimeSeriesPanel:
    data: np.ndarray  # (q_raw, p), rows are time
    spec_seed: int | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise InvalidArgumentError("panel data must be a 2-d array")
        if not np.all(np.isfinite(self.data)):
            raise InvalidArgumentError("panel data contains non-finite values")

    @property
    def p(self):
        return self.data.shape[1]

    @property
    def q_raw(self):
        return self.data.shape[0]

    def head(self, rows):
        """The first ``rows`` observations, as a new panel."""
        return TimeSeriesPanel(self.data[:rows].copy(), self.spec_seed)


@dataclass
class LaggedPanel:
    data: np.ndarray  # (q, p * (tau + 1))
    p: int
    tau: int
    column_map: dict = field(default_factory=dict)

    @property
    def q(self):
        return self.data.shape[0]

    @property
    def n_columns(self):
        return self.data.shape[1]

    def column(self, var, lag):
        return self.column_map[(var, lag)]


def column_index(var, lag, p):
    return lag * p + var


def companion_matrix(coeffs):
    """Companion (state-transition) matrix of a VAR with ``coeffs[lag - 1] = A_lag``."""
    tau, p, _ = coeffs.shape
    F = np.zeros((p * tau, p * tau))
    F[:p, :] = np.concatenate(list(coeffs), axis=1)
    if tau > 1:
        F[p:, :-p] = np.eye(p * (tau - 1))
    return F


def spectral_radius(coeffs):
    return float(np.max(np.abs(np.linalg.eigvals(companion_matrix(coeffs)))))


def generate_process_spec(p, tau, n_links=None, rng_seed=None, self_links=None):
    """Draw a sparse, stationary, upper-triangular VAR(tau).

    ``n_links`` distinct pairs ``(i, j)`` with ``i < j`` receive one N(0, 1)
    coefficient each, at a lag drawn uniformly from ``1..tau``. By default
    every variable gets a lag-1 self coefficient from N(0, 0.5^2) clipped into
    (-0.9, 0.9). If the companion spectral radius reaches 0.95 the whole
    tensor is scaled down until it does not.

    Parameters
    ----------
    p : int
        Number of variables, at least 2.
    tau : int
        Maximum lag, at least 1.
    n_links : int, optional
        Number of off-diagonal causal pairs. Defaults to ``p`` (capped at the
        ``p(p-1)/2`` slots available).
    rng_seed : int, optional
        Seed for :func:`numpy.random.default_rng`.
    self_links : int, optional
        Number of variables, chosen uniformly, that keep their lag-1 self
        coefficient. Defaults to ``p``. Smaller values leave the draws for
        the cross links unchanged.

    Returns
    -------
    ProcessSpec
    """
    if not isinstance(p, (int, np.integer)) or p < 2:
        raise InvalidArgumentError(f"p must be an integer >= 2, got {p!r}")
    if not isinstance(tau, (int, np.integer)) or tau < 1:
        raise InvalidArgumentError(f"tau must be an integer >= 1, got {tau!r}")
    slots = p * (p - 1) // 2
    if n_links is None:
        n_links = min(p, slots)
    if not isinstance(n_links, (int, np.integer)) or not 1 <= n_links <= slots:
        raise InvalidArgumentError(f"n_links must lie in [1, {slots}], got {n_links!r}")
    if self_links is None:
        self_links = p
    if not isinstance(self_links, (int, np.integer)) or not 0 <= self_links <= p:
        raise InvalidArgumentError(f"self_links must lie in [0, {p}], got {self_links!r}")

    rng = np.random.default_rng(rng_seed)
    coeffs = np.zeros((tau, p, p))
    rows, cols = np.triu_indices(p, k=1)
    chosen = rng.choice(slots, size=n_links, replace=False)
    lags = rng.integers(0, tau, size=n_links)
    values = rng.standard_normal(n_links)
    # a N(0, 1) draw can be exactly zero only with probability zero, but a
    # vanished link would silently break the link budget
    values[values == 0.0] = 1.0
    coeffs[lags, rows[chosen], cols[chosen]] = values

    diag = np.clip(DIAG_SCALE * rng.standard_normal(p), -DIAG_CLIP, DIAG_CLIP)
    if self_links < p:
        keep = np.zeros(p, dtype=bool)
        if self_links:
            keep[rng.choice(p, size=self_links, replace=False)] = True
        diag[~keep] = 0.0
    coeffs[0, np.arange(p), np.arange(p)] = diag

    rho = spectral_radius(coeffs)
    while rho >= RHO_TARGET:
        coeffs *= RHO_TARGET / rho * 0.999
        rho = spectral_radius(coeffs)
    return ProcessSpec(p=int(p), tau=int(tau), coeffs=coeffs, seed=rng_seed)


def true_network(spec):
    """Causality network implied by the nonzero off-diagonal coefficients.

    Edge ``j -> i`` exists iff some ``A_lag[i, j] != 0`` with ``i != j``.
    """
    nonzero = np.any(spec.coeffs != 0.0, axis=0)
    return CausalityNetwork(nonzero.T.copy())


def default_burn_in(tau):
    return 100 * (tau + 1)


def simulate(spec, q_raw, burn_in=None, rng_seed=None,
             magnitude_bound=DEFAULT_MAGNITUDE_BOUND):
    """Sample path of the process with i.i.d. standard-normal innovations.

    The recursion starts from a zero state and the first ``burn_in`` rows are
    discarded. Raises :class:`NumericOverflowError` if any value exceeds
    ``magnitude_bound`` in absolute value.
    """
    if q_raw < spec.tau + 1:
        raise InsufficientLengthError(f"q_raw={q_raw} must be at least tau+1={spec.tau + 1}")
    if burn_in is None:
        burn_in = default_burn_in(spec.tau)
    if burn_in < 0:
        raise InvalidArgumentError("burn_in must be non-negative")
    rng = np.random.default_rng(rng_seed)
    out = rng.standard_normal((burn_in + q_raw, spec.p))
    kernels.var_recursion(np.ascontiguousarray(spec.coeffs, dtype=np.float64), out)
    if not np.all(np.isfinite(out)) or np.max(np.abs(out)) > magnitude_bound:
        raise NumericOverflowError(
            f"simulated values exceed {magnitude_bound:g}; the process is not stationary"
        )
    return TimeSeriesPanel(out[burn_in:].copy(), spec_seed=spec.seed)


def build_lagged_panel(panel, tau):
    """Stack every variable at lags ``0..tau`` side by side.

    Row ``r`` corresponds to raw time ``t = r + tau``, so ``q = q_raw - tau``.
    """
    data = panel.data if isinstance(panel, TimeSeriesPanel) else np.asarray(panel, dtype=float)
    q_raw, p = data.shape
    q = q_raw - tau
    if q <= 0:
        raise InsufficientLengthError(f"panel has {q_raw} rows; need more than tau={tau}")
    blocks = [data[tau - lag: q_raw - lag] for lag in range(tau + 1)]
    column_map = {(k, lag): column_index(k, lag, p) for lag in range(tau + 1) for k in range(p)}
    return LaggedPanel(np.hstack(blocks), p=p, tau=tau, column_map=column_map)


def population_covariance(spec):
    """Exact stationary covariance of the lagged frame ``(Z_t, ..., Z_{t-tau})``.

    Uses the discrete Lyapunov equation of a companion system padded with an
    all-zero ``A_{tau+1}`` so the state holds ``tau + 1`` lags. Column order
    matches :func:`build_lagged_panel`.
    """
    p, tau = spec.p, spec.tau
    padded = np.concatenate([spec.coeffs, np.zeros((1, p, p))], axis=0)
    F = companion_matrix(padded)
    Q = np.zeros_like(F)
    Q[:p, :p] = np.eye(p)
    gamma = scipy.linalg.solve_discrete_lyapunov(F, Q)
    return 0.5 * (gamma + gamma.T)


def replicate_seeds(master_seed, replicate):
    """Independent (spec, noise) seeds for one replicate.

    ``SeedSequence([master_seed, replicate, stage])`` with stage 0 for the
    process coefficients and 1 for the innovations; any replicate can be
    rebuilt without running the others.
    """
    spec_seed = int(np.random.SeedSequence([master_seed, replicate, 0]).generate_state(1)[0])
    noise_seed = int(np.random.SeedSequence([master_seed, replicate, 1]).generate_state(1)[0])
    return spec_seed, noise_seed
