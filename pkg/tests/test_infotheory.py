import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_spd
from sparsecausal.errors import InvalidArgumentError, NotPositiveDefiniteError, NumericalIntegrityError
from sparsecausal.estimators import CovarianceModel, covariance, estimate, ridge_precision
from sparsecausal.infotheory import (
    IndexGroup,
    clamp,
    cond_cov_given_rest,
    cond_cov_partial,
    conditional_mutual_information,
    conditional_transfer_entropy,
    gaussian_entropy,
    te_matrix,
    unconditional_transfer_entropy,
)
from sparsecausal.io import write_te_matrix
from sparsecausal.simulator import (
    ProcessSpec,
    TimeSeriesPanel,
    build_lagged_panel,
    generate_process_spec,
    population_covariance,
    simulate,
)


def bivariate(a):
    c = np.zeros((1, 2, 2))
    c[0, 0, 1] = a  # variable 1 drives variable 0
    return ProcessSpec(2, 1, c)


def sigma_side_partial(Sigma, idx1, idx2):
    # covariance of idx1 given everything outside idx1 and idx2, from Sigma only
    n = Sigma.shape[0]
    rest = [k for k in range(n) if k not in idx1 and k not in idx2]
    S11 = Sigma[np.ix_(idx1, idx1)]
    if not rest:
        return S11
    S1r = Sigma[np.ix_(idx1, rest)]
    Srr = Sigma[np.ix_(rest, rest)]
    return S11 - S1r @ np.linalg.solve(Srr, S1r.T)


def split(rng, n):
    perm = rng.permutation(n)
    a = int(rng.integers(1, n))
    b = int(rng.integers(0, n - a + 1))
    return sorted(perm[:a].tolist()), sorted(perm[a:a + b].tolist())


def test_entropy_closed_forms(rng):
    assert gaussian_entropy(np.eye(1)) == pytest.approx(1.41894, abs=1e-5)
    assert gaussian_entropy(np.array([[4.0]])) == pytest.approx(2.11208, abs=1e-5)
    S = random_spd(rng, 3)
    x = rng.multivariate_normal(np.zeros(3), S, size=200000)
    J = np.linalg.inv(S)
    logpdf = -0.5 * np.einsum("ij,jk,ik->i", x, J, x) - 0.5 * np.linalg.slogdet(S)[1] \
        - 1.5 * np.log(2 * np.pi)
    assert gaussian_entropy(S) == pytest.approx(-logpdf.mean(), rel=0.02)
    with pytest.raises(NotPositiveDefiniteError):
        gaussian_entropy(-np.eye(2))


def test_cond_cov_given_rest(rng):
    assert np.allclose(cond_cov_given_rest(np.eye(5), [1, 3]), np.eye(2))
    assert cond_cov_given_rest(np.array([[2.0, 1.0], [1.0, 2.0]]), [0])[0, 0] == pytest.approx(0.5)
    for _ in range(20):
        n = int(rng.integers(2, 12))
        S = random_spd(rng, n)
        idx, _ = split(rng, n)
        assert np.allclose(cond_cov_given_rest(np.linalg.inv(S), idx),
                           sigma_side_partial(S, idx, []), atol=1e-8)


def test_cond_cov_partial_examples(rng):
    J = np.zeros((4, 4))
    J[:2, :2] = [[2.0, 0.5], [0.5, 1.0]]
    J[2:, 2:] = [[3.0, 1.0], [1.0, 2.0]]
    assert np.allclose(cond_cov_partial(J, [0, 1], [2, 3]), np.linalg.inv(J[:2, :2]))
    S = random_spd(rng, 6)
    Jr = np.linalg.inv(S)
    assert np.allclose(cond_cov_partial(Jr, [0, 2], []), cond_cov_given_rest(Jr, [0, 2]))
    with pytest.raises(InvalidArgumentError):
        cond_cov_partial(Jr, [0, 1], [1, 2])


def test_schur_identity_suite():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 21))
        S = random_spd(rng, n)
        idx1, idx2 = split(rng, n)
        got = cond_cov_partial(np.linalg.inv(S), idx1, idx2)
        worst = max(worst, np.max(np.abs(got - sigma_side_partial(S, idx1, idx2))))
    assert worst < 1e-8


def test_cmi_zero_and_symmetry(rng):
    J = np.eye(4)
    J[2, 3] = J[3, 2] = 0.3
    assert conditional_mutual_information(J, [0, 1], [2, 3]) == 0.0
    for _ in range(30):
        n = int(rng.integers(2, 10))
        S = random_spd(rng, n)
        a, b = split(rng, n)
        if not b:
            continue
        J = np.linalg.inv(S)
        assert conditional_mutual_information(J, a, b) == pytest.approx(
            conditional_mutual_information(J, b, a), abs=1e-10)


def test_cmi_partial_correlation(rng):
    for _ in range(10):
        S = random_spd(rng, 3)
        J = np.linalg.inv(S)
        rho = -J[0, 1] / np.sqrt(J[0, 0] * J[1, 1])
        assert conditional_mutual_information(J, [0], [1]) == pytest.approx(
            -0.5 * np.log(1 - rho ** 2), abs=1e-12)
        # independent route: residual covariances from Sigma
        C = sigma_side_partial(S, [0, 1], [])
        r2 = C[0, 1] ** 2 / (C[0, 0] * C[1, 1])
        assert conditional_mutual_information(J, [0], [1]) == pytest.approx(-0.5 * np.log(1 - r2), abs=1e-10)


def test_cmi_entropy_route(rng):
    # I(1;2|3) = H(1,3) + H(2,3) - H(3) - H(1,2,3), from Sigma
    for _ in range(10):
        S = random_spd(rng, 6)
        a, b, c = [0, 1], [2], [3, 4, 5]
        H = lambda idx: gaussian_entropy(S[np.ix_(idx, idx)])
        ref = H(a + c) + H(b + c) - H(c) - H(a + b + c)
        assert conditional_mutual_information(np.linalg.inv(S), a, b) == pytest.approx(ref, abs=1e-10)


def test_clamp():
    assert clamp(-5e-11) == 0.0
    assert clamp(0.25) == 0.25
    with pytest.raises(NumericalIntegrityError):
        clamp(-1e-6)
    with pytest.raises(NumericalIntegrityError):
        clamp(np.nan)


def test_index_group():
    g = IndexGroup.for_pair(1, 0, 3, 2)
    assert g.target == [0] and g.source == [4, 7] and g.context == [3, 6]
    with pytest.raises(InvalidArgumentError):
        IndexGroup([0], [0])
    with pytest.raises(InvalidArgumentError):
        IndexGroup([], [1])


@pytest.mark.parametrize("a", [0.5, 1.0])
def test_bivariate_population_closed_form(a):
    spec = bivariate(a)
    J = np.linalg.inv(population_covariance(spec))
    assert conditional_transfer_entropy(J, 1, 0, 1) == pytest.approx(0.5 * np.log(1 + a * a), abs=1e-12)
    assert conditional_transfer_entropy(J, 0, 1, 1) == pytest.approx(0.0, abs=1e-12)


def test_bivariate_long_sample():
    lp = build_lagged_panel(simulate(bivariate(1.0), 20001, rng_seed=5), 1)
    J = ridge_precision(covariance(lp), 1e-6)
    assert conditional_transfer_entropy(J, 1, 0, 1) == pytest.approx(0.346574, rel=0.05)
    assert conditional_transfer_entropy(J, 0, 1, 1) < 5e-4


def test_sparse_zero_block_exact():
    p, tau = 3, 2
    J = np.eye(p * (tau + 1))
    J[0, 4] = J[4, 0] = 0.2  # (var 1, lag 1) -> (var 0, lag 0)
    te = te_matrix(J, tau=tau)
    assert te.values[1, 0] > 0
    assert te.values[2, 0] == 0.0 and te.values[0, 1] == 0.0
    assert conditional_transfer_entropy(J, 2, 0, tau) == 0.0


def test_te_matrix_matches_pairwise(rng):
    spec = generate_process_spec(6, 2, 6, 1)
    m = covariance(build_lagged_panel(simulate(spec, 300, rng_seed=2), 2))
    for method in ("ridge", "glasso", "logo"):
        P = estimate(m, method, 0.1)
        te = te_matrix(P, tau=2)
        assert te.method == method and te.gamma == 0.1
        for i in range(6):
            assert np.isnan(te.values[i, i])
            for j in range(6):
                if i != j:
                    assert te.values[i, j] == pytest.approx(
                        conditional_transfer_entropy(P, i, j, 2), abs=1e-12)
                    assert te.values[i, j] >= 0


def test_te_matrix_p2():
    J = np.linalg.inv(population_covariance(bivariate(1.0)))
    te = te_matrix(J, tau=1)
    assert np.count_nonzero(~np.isnan(te.values)) == 2


def test_conditional_equals_unconditional_p2():
    spec = bivariate(1.0)
    S = population_covariance(spec)
    m = CovarianceModel(S, 1000, False)
    for method in ("ridge", "logo"):
        J = estimate(m, method, 0.0)
        for i, j in ((0, 1), (1, 0)):
            c = conditional_transfer_entropy(J, i, j, 1)
            u = unconditional_transfer_entropy(m, i, j, 1, method=method, gamma=0.0)
            assert c == pytest.approx(u, abs=1e-8)


def test_unconditional_ignores_unrelated(rng):
    spec = generate_process_spec(5, 2, 5, 4)
    data = simulate(spec, 400, rng_seed=3).data
    m = covariance(build_lagged_panel(TimeSeriesPanel(data), 2))
    shuffled = data.copy()
    shuffled[:, 4] = rng.permutation(shuffled[:, 4])
    m2 = covariance(build_lagged_panel(TimeSeriesPanel(shuffled), 2))
    for i, j in ((0, 1), (2, 3), (3, 0)):
        a = unconditional_transfer_entropy(m, i, j, 2, "ridge", 0.1)
        b = unconditional_transfer_entropy(m2, i, j, 2, "ridge", 0.1)
        assert a == pytest.approx(b, abs=1e-12)


def test_unconditional_independent_vanishes():
    spec = ProcessSpec(2, 2, np.zeros((2, 2, 2)))
    means = []
    for q in (100, 10000):
        vals = [unconditional_transfer_entropy(
            covariance(build_lagged_panel(simulate(spec, q + 2, rng_seed=s), 2)), 0, 1, 2, "ridge", 1e-6)
            for s in range(20)]
        means.append(np.mean(vals))
    assert means[1] < means[0]
    # mean below the 1% critical value tau-dof chi-square / (2 q)
    assert means[1] < 9.21 / (2 * 10000)


def test_unconditional_global_source():
    spec = generate_process_spec(4, 1, 3, 7)
    m = covariance(build_lagged_panel(simulate(spec, 500, rng_seed=1), 1))
    P = estimate(m, "glasso", 0.05)
    te_g = te_matrix(P, mode="unconditional", tau=1, method="glasso", gamma=0.05, model=m,
                     unconditional_source="global")
    te_l = te_matrix(m, mode="unconditional", tau=1, method="glasso", gamma=0.05)
    off = ~np.eye(4, dtype=bool)
    assert np.all(te_g.values[off] >= 0) and np.all(te_l.values[off] >= 0)
    with pytest.raises(InvalidArgumentError):
        te_matrix(m, mode="unconditional", tau=1, method="glasso", gamma=0.05,
                  unconditional_source="global")


def test_te_matrix_errors():
    with pytest.raises(InvalidArgumentError):
        te_matrix(np.eye(4), mode="other", tau=1)
    with pytest.raises(InvalidArgumentError):
        te_matrix(np.eye(4), mode="unconditional", tau=1)
    with pytest.raises(InvalidArgumentError):
        conditional_transfer_entropy(np.eye(4), 1, 1, 1)


def test_te_csv(tmp_path):
    te = te_matrix(np.linalg.inv(population_covariance(bivariate(1.0))), tau=1)
    path = tmp_path / "te.csv"
    write_te_matrix(te, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "i,j,T,mode" and len(lines) == 3


@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 15))
@settings(max_examples=50, deadline=None)
def test_cmi_nonnegative(seed, n):
    rng = np.random.default_rng(seed)
    J = np.linalg.inv(random_spd(rng, n))
    a, b = split(rng, n)
    if b:
        assert conditional_mutual_information(J, a, b) >= 0.0
