"""Gaussian information measures read off a precision matrix.

For a precision matrix ``J`` over variables split into groups 1, 2 and the
rest:

* ``inv(J_11)`` is the covariance of group 1 given everything else;
* ``inv(J_11 - J_12 inv(J_22) J_21)`` is its covariance given everything
  except group 2;
* the conditional mutual information between groups 1 and 2 given the rest
  is ``-1/2 log det(J_11 - J_12 inv(J_22) J_21) + 1/2 log det(J_11)``.

Transfer entropy ``i -> j`` is that CMI with group 1 the lag-0 column of
``j`` and group 2 the lagged columns of ``i``. All values are in nats.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionError,
    InvalidArgumentError,
    NotPositiveDefiniteError,
    NumericalIntegrityError,
    SingularMatrixError,
    SparseCausalError,
)
from .estimators import CovarianceModel, PrecisionMatrix, estimate, cholesky_logdet
from .simulator import column_index

EPS_NUM = 1e-10
LOG_2PI_E = np.log(2 * np.pi * np.e)
MODES = ("conditional", "unconditional")


@dataclass
class IndexGroup:
    """Column indices into the lagged frame, split by role."""

    target: list
    source: list
    context: list = field(default_factory=list)

    def __post_init__(self):
        self.target = [int(i) for i in self.target]
        self.source = [int(i) for i in self.source]
        self.context = [int(i) for i in self.context]
        if not self.target:
            raise InvalidArgumentError("target group must be nonempty")
        seen = self.target + self.source + self.context
        if len(set(seen)) != len(seen):
            raise InvalidArgumentError("index groups must be disjoint")

    @classmethod
    def for_pair(cls, i, j, p, tau):
        """Groups used for transfer entropy ``i -> j``."""
        return cls(
            target=[column_index(j, 0, p)],
            source=[column_index(i, lag, p) for lag in range(1, tau + 1)],
            context=[column_index(j, lag, p) for lag in range(1, tau + 1)],
        )


@dataclass
class TEMatrix:
    values: np.ndarray  # values[i, j] = T(i -> j); diagonal is NaN
    mode: str
    method: str | None = None
    gamma: float | None = None

    @property
    def p(self):
        return self.values.shape[0]


def _J(J):
    return J.J if isinstance(J, PrecisionMatrix) else np.asarray(J, dtype=float)


def _logdet(A):
    try:
        return cholesky_logdet(A)
    except NotPositiveDefiniteError:
        raise
    except np.linalg.LinAlgError as exc:  # pragma: no cover - cholesky_logdet wraps these
        raise NotPositiveDefiniteError(str(exc)) from exc


def clamp(value, what="information"):
    """Map round-off negatives in ``[-EPS_NUM, 0)`` to 0; reject anything lower."""
    if not np.isfinite(value):
        raise NumericalIntegrityError(f"{what} is not finite: {value!r}")
    if value < -EPS_NUM:
        raise NumericalIntegrityError(f"{what} is negative beyond round-off: {value!r}")
    return max(float(value), 0.0)


def gaussian_entropy(Sigma):
    """Differential entropy ``1/2 log det Sigma + n/2 log(2 pi e)``."""
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    return 0.5 * _logdet(Sigma) + 0.5 * Sigma.shape[0] * LOG_2PI_E


def _solve_spd(A, B, what):
    try:
        c = scipy.linalg.cho_factor(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"{what} is singular or not positive definite") from exc
    return scipy.linalg.cho_solve(c, B)


def _groups(idx):
    if isinstance(idx, IndexGroup):
        return idx.target
    return [int(i) for i in np.atleast_1d(idx)]


def cond_cov_given_rest(J, idx):
    """Covariance of ``idx`` conditioned on every other variable: ``inv(J_11)``."""
    Jm = _J(J)
    idx = _groups(idx)
    if not idx:
        raise InvalidArgumentError("index group must be nonempty")
    J11 = Jm[np.ix_(idx, idx)]
    return _solve_spd(J11, np.eye(len(idx)), "J_11 block")


def _schur(Jm, idx1, idx2):
    J11 = Jm[np.ix_(idx1, idx1)]
    if not idx2:
        return J11
    J12 = Jm[np.ix_(idx1, idx2)]
    J22 = Jm[np.ix_(idx2, idx2)]
    return J11 - J12 @ _solve_spd(J22, J12.T, "J_22 block")


def cond_cov_partial(J, idx1, idx2):
    """Covariance of ``idx1`` conditioned on everything except ``idx2``."""
    Jm = _J(J)
    idx1, idx2 = _groups(idx1), _groups(idx2)
    if set(idx1) & set(idx2):
        raise InvalidArgumentError("idx1 and idx2 must be disjoint")
    M = _schur(Jm, idx1, idx2)
    return _solve_spd(0.5 * (M + M.T), np.eye(len(idx1)), "Schur complement")


def conditional_mutual_information(J, idx1, idx2):
    """``I(1; 2 | rest)`` in nats, from precision sub-blocks only."""
    Jm = _J(J)
    idx1, idx2 = _groups(idx1), _groups(idx2)
    if not idx1 or not idx2:
        raise InvalidArgumentError("both groups must be nonempty")
    if set(idx1) & set(idx2):
        raise InvalidArgumentError("idx1 and idx2 must be disjoint")
    J11 = Jm[np.ix_(idx1, idx1)]
    M = _schur(Jm, idx1, idx2)
    value = -0.5 * _logdet(0.5 * (M + M.T)) + 0.5 * _logdet(J11)
    return clamp(value, "conditional mutual information")


def conditional_transfer_entropy(J, i, j, tau, p=None):
    """Transfer entropy ``i -> j`` conditioned on all other columns of the frame."""
    if i == j:
        raise InvalidArgumentError("source and target must differ")
    Jm = _J(J)
    if p is None:
        p = Jm.shape[0] // (tau + 1)
    if p * (tau + 1) != Jm.shape[0]:
        raise DimensionError(f"J has size {Jm.shape[0]}, not p*(tau+1) = {p * (tau + 1)}")
    g = IndexGroup.for_pair(i, j, p, tau)
    return conditional_mutual_information(Jm, g.target, g.source)


def _te_block(Jm, p, tau):
    """All conditional transfer entropies at once.

    Target j uses the scalar ``J[(j,0),(j,0)]``; for each source the tau x tau
    block of its lags is solved with a batched Cholesky.
    """
    te = np.full((p, p), np.nan)
    src_cols = np.array([[column_index(i, lag, p) for lag in range(1, tau + 1)]
                         for i in range(p)])
    J22 = Jm[src_cols[:, :, None], src_cols[:, None, :]]  # (p, tau, tau)
    try:
        L = np.linalg.cholesky(J22)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("a source-lag block of J is not positive definite") from exc
    for j in range(p):
        t = column_index(j, 0, p)
        J11 = Jm[t, t]
        J12 = Jm[t, src_cols]  # (p, tau)
        y = np.linalg.solve(L, J12[:, :, None])[:, :, 0]  # L y = J21
        schur = J11 - np.einsum("ij,ij->i", y, y)
        for i in range(p):
            if i == j:
                continue
            if not np.any(J12[i]):
                te[i, j] = 0.0
                continue
            if schur[i] <= 0.0 or J11 <= 0.0:
                raise NotPositiveDefiniteError(f"non-positive Schur complement for pair {i}->{j}")
            te[i, j] = clamp(0.5 * (np.log(J11) - np.log(schur[i])), f"TE {i}->{j}")
    return te


def _unconditional_columns(i, j, p, tau):
    g = IndexGroup.for_pair(i, j, p, tau)
    cols = g.target + g.source + g.context
    # positions inside the local frame
    return cols, [0], list(range(1, tau + 1))


def unconditional_transfer_entropy(model, i, j, tau, method="ridge", gamma=0.1,
                                   source="local", J=None, p=None, **estimator_kwargs):
    """Transfer entropy ``i -> j`` without conditioning on the other variables.

    Only the ``2 tau + 1`` columns ``{Z_j,t; Z_i lags; Z_j lags}`` are used.

    Parameters
    ----------
    model : CovarianceModel
        Covariance of the full lagged frame.
    source : {"local", "global"}
        ``"local"`` re-estimates a precision on the selected columns with the
        same method and gamma. ``"global"`` instead marginalises the global
        estimate ``J`` (which must then be given) onto those columns.
    """
    if i == j:
        raise InvalidArgumentError("source and target must differ")
    S = model.S
    if p is None:
        p = S.shape[0] // (tau + 1)
    cols, tgt, src = _unconditional_columns(i, j, p, tau)
    if source == "local":
        sub = CovarianceModel(S=S[np.ix_(cols, cols)], q=model.q, standardized=model.standardized)
        local = _local_estimate(sub, method, gamma, **estimator_kwargs)
    elif source == "global":
        if J is None:
            raise InvalidArgumentError("source='global' needs the global precision J")
        marg = np.linalg.inv(_J(J))[np.ix_(cols, cols)]
        local = np.linalg.inv(0.5 * (marg + marg.T))
    else:
        raise InvalidArgumentError(f"source must be 'local' or 'global', got {source!r}")
    return conditional_mutual_information(_J(local), tgt, src)


def _local_estimate(sub, method, gamma, **kwargs):
    # LoGo on fewer than 4 columns: the whole set is a single clique, which
    # is exactly the ridge blend
    if method == "logo" and sub.n < 4:
        return estimate(sub, "ridge", gamma)
    return estimate(sub, method, gamma, **kwargs)


def te_matrix(source, mode="conditional", tau=None, method=None, gamma=None,
              model=None, unconditional_source="local", **estimator_kwargs):
    """Transfer entropies over all ordered pairs ``i != j``.

    Parameters
    ----------
    source : PrecisionMatrix, ndarray, or CovarianceModel
        For ``mode="conditional"`` a precision over the full frame. For
        ``mode="unconditional"`` the covariance model (or pass ``model=``).
    mode : {"conditional", "unconditional"}
    tau : int
        Maximum lag of the frame.
    method, gamma
        Estimator used by the unconditional local re-estimation.

    Errors raised for individual pairs are re-raised with the pair attached.
    """
    if mode not in MODES:
        raise InvalidArgumentError(f"mode must be one of {MODES}, got {mode!r}")
    if tau is None:
        raise InvalidArgumentError("tau is required")
    if mode == "conditional":
        Jm = _J(source)
        n = Jm.shape[0]
        if n % (tau + 1):
            raise DimensionError(f"J of size {n} does not match tau={tau}")
        p = n // (tau + 1)
        values = _te_block(Jm, p, tau)
        if isinstance(source, PrecisionMatrix):
            method = method or source.method
            gamma = source.gamma if gamma is None else gamma
        return TEMatrix(values, mode, method, gamma)

    if model is None and isinstance(source, CovarianceModel):
        model = source
    if not isinstance(model, CovarianceModel):
        raise InvalidArgumentError("unconditional mode needs a CovarianceModel")
    if method is None or gamma is None:
        raise InvalidArgumentError("unconditional mode needs method and gamma")
    p = model.n // (tau + 1)
    J_global = source if unconditional_source == "global" else None
    if unconditional_source == "global" and not isinstance(source, PrecisionMatrix):
        raise InvalidArgumentError("global unconditional TE needs the global PrecisionMatrix")
    values = np.full((p, p), np.nan)
    for i in range(p):
        for j in range(p):
            if i == j:
                continue
            try:
                values[i, j] = unconditional_transfer_entropy(
                    model, i, j, tau, method=method, gamma=gamma,
                    source=unconditional_source, J=J_global, p=p, **estimator_kwargs)
            except SparseCausalError as exc:
                raise type(exc)(f"pair {i}->{j}: {exc}") from exc
    return TEMatrix(values, mode, method, gamma)
