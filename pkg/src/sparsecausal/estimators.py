"""Precision-matrix estimators over the lagged frame.

All three estimators share the regularizer ``gamma``:

* ridge  : ``J = ((1 - gamma) S + gamma I)^-1``, dense.
* glasso : maximizer of ``log det J - tr(S J) - gamma * |J|_1`` (diagonal
  penalized too), by block coordinate descent over columns.
* logo   : sum of local clique inverses minus separator inverses on the TMFG
  of ``S``; each local block uses the same ridge blend.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._backend import kernels
from .errors import (
    ConvergenceError,
    InsufficientLengthError,
    InvalidArgumentError,
    NearSingularCliqueError,
    NotPositiveDefiniteError,
    SingularMatrixError,
    ZeroVarianceError,
)
from .tmfg import tmfg

ZERO_TOL = 1e-10
GLASSO_TOL = 1e-4
GLASSO_MAX_ITER = 200
CLIQUE_COND_CAP = 1e12
METHODS = ("ridge", "glasso", "logo")


@dataclass
class CovarianceModel:
    S: np.ndarray
    q: int
    standardized: bool = True

    @property
    def n(self):
        return self.S.shape[0]


@dataclass
class PrecisionMatrix:
    J: np.ndarray
    method: str
    gamma: float
    support: np.ndarray | None = None  # boolean N x N off-diagonal mask; None = dense
    column_map: dict | None = None
    graph: object = None  # the TMFG for logo
    n_iter: int | None = None

    @property
    def n(self):
        return self.J.shape[0]

    def support_pairs(self):
        mask = self.support if self.support is not None else ~np.eye(self.n, dtype=bool)
        i, j = np.nonzero(np.triu(mask, k=1))
        return set(zip(i.tolist(), j.tolist()))


def covariance(panel, standardize=True):
    """Maximum-likelihood covariance (divisor ``q``) of the lagged columns.

    With ``standardize`` the columns are scaled to unit sample variance, so
    ``S`` is the correlation matrix.
    """
    X = panel.data if hasattr(panel, "data") else np.asarray(panel, dtype=float)
    X = np.asarray(X, dtype=np.float64)
    q = X.shape[0]
    if q < 2:
        raise InsufficientLengthError(f"need at least 2 observations, got {q}")
    Xc = X - X.mean(axis=0)
    S = Xc.T @ Xc / q
    var = np.diag(S).copy()
    scale = np.maximum(np.abs(X).max(axis=0), 1.0)
    bad = var <= (1e-14 * scale) ** 2
    if np.any(bad):
        raise ZeroVarianceError(f"columns with zero variance: {np.nonzero(bad)[0].tolist()}")
    if standardize:
        d = 1.0 / np.sqrt(var)
        S = S * d[:, None] * d[None, :]
        np.fill_diagonal(S, 1.0)
    S = 0.5 * (S + S.T)
    return CovarianceModel(S=S, q=q, standardized=standardize)


def _as_matrix(model):
    return model.S if isinstance(model, CovarianceModel) else np.asarray(model, dtype=float)


def cholesky_logdet(A):
    """``log det A`` for symmetric positive definite ``A``; raises otherwise."""
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def _spd_inverse(A, what="matrix"):
    try:
        c, low = scipy.linalg.cho_factor(A, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularMatrixError(f"{what} is singular or not positive definite") from exc
    inv = scipy.linalg.cho_solve((c, low), np.eye(A.shape[0]))
    return 0.5 * (inv + inv.T)


def _check_pd(J, method):
    try:
        np.linalg.cholesky(J)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"{method} estimate is not positive definite") from exc


def _check_gamma(gamma, upper=None):
    if not np.isfinite(gamma) or gamma < 0 or (upper is not None and gamma > upper):
        bound = f"[0, {upper}]" if upper is not None else "[0, inf)"
        raise InvalidArgumentError(f"gamma must lie in {bound}, got {gamma!r}")


def ridge_precision(model, gamma):
    """Inverse of the identity-blended covariance ``(1 - gamma) S + gamma I``."""
    _check_gamma(gamma, upper=1.0)
    S = _as_matrix(model)
    blended = (1.0 - gamma) * S + gamma * np.eye(S.shape[0])
    J = _spd_inverse(blended, "ridge-blended covariance")
    _check_pd(J, "ridge")
    return PrecisionMatrix(J=J, method="ridge", gamma=float(gamma))


def glasso_objective(J, S, gamma):
    """Penalized log-likelihood ``log det J - tr(S J) - gamma * sum |J_ij|``."""
    return cholesky_logdet(J) - float(np.sum(S * J)) - gamma * float(np.abs(J).sum())


def _glasso_theta(W, B):
    """Precision from the covariance iterate and the lasso coefficients."""
    n = W.shape[0]
    theta = np.empty_like(W)
    for j in range(n):
        beta = B[j].copy()
        beta[j] = 0.0
        tjj = 1.0 / (W[j, j] - W[:, j] @ beta)
        theta[:, j] = -beta * tjj
        theta[j, j] = tjj
    return 0.5 * (theta + theta.T)


def _kkt_excess(theta, S, gamma):
    t = theta.copy()
    t[np.abs(t) <= ZERO_TOL] = 0.0
    try:
        R = np.abs(S - np.linalg.inv(t))
    except np.linalg.LinAlgError:
        return np.inf
    np.fill_diagonal(R, 0.0)
    return float(R.max()) - gamma


def glasso_precision(model, gamma, tol=GLASSO_TOL, max_iter=GLASSO_MAX_ITER, backend=None):
    """Graphical lasso by block coordinate descent.

    Parameters
    ----------
    model : CovarianceModel or (N, N) array
    gamma : float
        l1 penalty, applied to every entry including the diagonal, so the
        covariance estimate keeps ``W_ii = S_ii + gamma``.
    tol : float
        Stop when the duality gap ``tr(S J) + gamma |J|_1 - N`` is below
        ``tol`` and no off-diagonal ``|S - J^-1|`` exceeds ``gamma + tol``.
    max_iter : int
        Maximum number of full sweeps over the columns.

    Raises
    ------
    ConvergenceError
        After ``max_iter`` sweeps; carries the last iterate and its gap.
    """
    _check_gamma(gamma)
    k = backend or kernels
    S = np.ascontiguousarray(_as_matrix(model), dtype=np.float64)
    n = S.shape[0]
    W = S + gamma * np.eye(n)
    W = np.ascontiguousarray(W)
    B = np.zeros((n, n))
    inner_tol = max(tol * 1e-3, 1e-12)
    gap = np.inf
    theta = None
    for it in range(1, max_iter + 1):
        change = k.glasso_sweep(W, S, B, float(gamma), inner_tol, 10000)
        theta = _glasso_theta(W, B)
        gap = float(np.sum(S * theta) + gamma * np.abs(theta).sum() - n)
        if abs(gap) < tol and change < tol and _kkt_excess(theta, S, gamma) < tol:
            break
    else:
        raise ConvergenceError(
            f"glasso did not converge in {max_iter} sweeps (duality gap {gap:.3g})",
            iterate=theta, residual=gap,
        )
    theta[np.abs(theta) <= ZERO_TOL] = 0.0
    _check_pd(theta, "glasso")
    support = theta != 0.0
    np.fill_diagonal(support, False)
    return PrecisionMatrix(J=theta, method="glasso", gamma=float(gamma), support=support, n_iter=it)


def _local_inverse(S, idx, gamma, cond_cap):
    block = (1.0 - gamma) * S[np.ix_(idx, idx)] + gamma * np.eye(len(idx))
    if gamma == 0.0 and np.linalg.cond(block) > cond_cap:
        raise NearSingularCliqueError(
            f"local block {tuple(idx)} has condition number above {cond_cap:g}"
        )
    return _spd_inverse(block, f"local block {tuple(idx)}")


def logo_precision(model, gamma, cond_cap=CLIQUE_COND_CAP, backend=None, graph=None):
    """Local-global sparse precision on the TMFG of ``S``.

    ``J = sum_c embed(inv(S'_cc)) - sum_s embed(inv(S'_ss))`` over the 4-cliques
    ``c`` and triangular separators ``s``, with ``S' = (1 - gamma) S + gamma I``.
    Entries outside the TMFG edges and the diagonal are exactly zero.
    """
    _check_gamma(gamma, upper=1.0)
    S = _as_matrix(model)
    n = S.shape[0]
    if graph is None:
        graph = tmfg(S, backend=backend)
    J = np.zeros((n, n))
    # fixed accumulation order: cliques then separators, by insertion index
    for clique in graph.cliques:
        idx = list(clique)
        J[np.ix_(idx, idx)] += _local_inverse(S, idx, gamma, cond_cap)
    for sep in graph.separators:
        idx = list(sep)
        J[np.ix_(idx, idx)] -= _local_inverse(S, idx, gamma, cond_cap)
    J = 0.5 * (J + J.T)
    support = graph.adjacency()
    J[~(support | np.eye(n, dtype=bool))] = 0.0
    _check_pd(J, "logo")
    return PrecisionMatrix(J=J, method="logo", gamma=float(gamma), support=support, graph=graph)


def estimate(model, method, gamma, **kwargs):
    """Dispatch to one of ``ridge``, ``glasso``, ``logo``."""
    if method == "ridge":
        return ridge_precision(model, gamma)
    if method == "glasso":
        return glasso_precision(model, gamma, **kwargs)
    if method == "logo":
        return logo_precision(model, gamma, **kwargs)
    raise InvalidArgumentError(f"unknown method {method!r}; expected one of {METHODS}")


def _precision_array(J):
    return J.J if isinstance(J, PrecisionMatrix) else np.asarray(J, dtype=float)


def trace_product(J, model):
    """``tr(S J)``."""
    return float(np.sum(_as_matrix(model) * _precision_array(J)))


def log_likelihood(J, model, q=None):
    """Gaussian log-likelihood ``q/2 (log|J| - tr(S J) - N log 2 pi)``."""
    Jm = _precision_array(J)
    if q is None:
        q = model.q
    n = Jm.shape[0]
    return 0.5 * q * (cholesky_logdet(Jm) - trace_product(Jm, model) - n * np.log(2 * np.pi))


def kkt_residual(J, model):
    """Largest off-diagonal ``|S_ij - (J^-1)_ij|``."""
    Jm = _precision_array(J)
    R = np.abs(_as_matrix(model) - np.linalg.inv(Jm))
    np.fill_diagonal(R, 0.0)
    return float(R.max())
