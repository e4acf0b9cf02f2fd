import numpy as np
import pytest

from sparsecausal import harness
from sparsecausal.errors import InvalidArgumentError
from sparsecausal.estimators import covariance, estimate
from sparsecausal.harness import (
    CellResult,
    ExperimentConfig,
    aggregate,
    desk_preset,
    format_table,
    read_cells,
    roc_points,
    run_experiment,
    run_replicate,
    write_cells,
    write_outputs,
)
from sparsecausal.infotheory import te_matrix
from sparsecausal.simulator import (
    build_lagged_panel,
    generate_process_spec,
    replicate_seeds,
    simulate,
    true_network,
)
from sparsecausal.validation import (
    ValidationParams,
    confusion,
    hypergeometric_pvalue,
    inference_network,
    validated_network,
)


def small(**kw):
    base = dict(p=6, tau=2, n_links=6, replicates=3, q_grid=[40, 120], gamma_grid=[0.1],
                pv_grid=[0.01, 0.05], master_seed=11)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_defaults_mirror_table_settings():
    cfg = ExperimentConfig()
    assert (cfg.p, cfg.tau, cfg.n_links, cfg.replicates) == (100, 5, 100, 100)
    assert cfg.q_grid == [10, 20, 30, 50, 200, 300, 1000, 20000]
    assert min(cfg.gamma_grid) == 1e-8 and max(cfg.gamma_grid) == 0.5


@pytest.mark.parametrize("bad", [
    {"replicates": 0}, {"q_grid": []}, {"methods": ["pca"]}, {"modes": ["x"]},
    {"pv_grid": [0.0]}, {"gamma_grid": [2.0]}, {"unknown": 1}, {"p": 3, "n_links": 4},
])
def test_config_rejects(bad):
    base = small().to_dict()
    base.update(bad)
    with pytest.raises(InvalidArgumentError):
        ExperimentConfig.from_dict(base)


def test_single_cell_equals_hand_run():
    cfg = small(replicates=1, q_grid=[60], pv_grid=[0.01], methods=["logo"], modes=["conditional"])
    res = run_experiment(cfg)
    spec_seed, noise_seed = replicate_seeds(cfg.master_seed, 0)
    spec = generate_process_spec(cfg.p, cfg.tau, cfg.n_links, spec_seed)
    panel = simulate(spec, 60 + cfg.tau, rng_seed=noise_seed)
    lp = build_lagged_panel(panel, cfg.tau)
    P = estimate(covariance(lp), "logo", 0.1)
    net = validated_network(te_matrix(P, tau=cfg.tau), lp.q, cfg.tau, ValidationParams(0.01))
    c = confusion(net, true_network(spec))
    cell = res.cell("logo", "conditional", 60)
    assert cell.tp_rate == c.TP / c.K and cell.fp_over_n == c.FP / c.K and cell.fp_rate == c.FP / c.m
    flag_p = hypergeometric_pvalue(c.TP, c.n, c.K, cfg.p)
    expect = "double-star" if flag_p < 1e-8 else "star" if flag_p < 0.05 else "none"
    assert cell.sig_flag == expect and cell.n_replicates == 1


def test_prefix_reuse():
    cfg = small(replicates=1)
    spec_seed, noise_seed = replicate_seeds(cfg.master_seed, 0)
    spec = generate_process_spec(cfg.p, cfg.tau, cfg.n_links, spec_seed)
    long = simulate(spec, max(cfg.q_grid) + cfg.tau, rng_seed=noise_seed)
    short = long.head(40 + cfg.tau)
    lp_short = build_lagged_panel(short, cfg.tau)
    lp_long = build_lagged_panel(long, cfg.tau)
    assert np.array_equal(lp_short.data, lp_long.data[:40])


def test_aggregates_are_mean_of_ratios():
    cfg = small(replicates=2, q_grid=[40], pv_grid=[0.01], methods=["ridge"], modes=["conditional"])
    recs = [
        dict(replicate=0, method="ridge", mode="conditional", q=40, gamma=0.1, pv=0.01,
             TP=1, FP=2, FN=1, TN=26, hyper_p=1e-9, error=None),
        dict(replicate=1, method="ridge", mode="conditional", q=40, gamma=0.1, pv=0.01,
             TP=3, FP=0, FN=7, TN=20, hyper_p=0.01, error=None),
    ]
    (cell,) = aggregate(cfg, recs)
    assert cell.tp_rate == pytest.approx((1 / 2 + 3 / 10) / 2)
    assert cell.tp_rate != pytest.approx(4 / 12)
    assert cell.fp_over_n == pytest.approx((2 / 2 + 0) / 2)
    assert cell.fp_rate == pytest.approx((2 / 28 + 0 / 20) / 2)
    assert cell.sig_flag == "star"
    recs[1]["hyper_p"] = 1e-10
    assert aggregate(cfg, recs)[0].sig_flag == "double-star"
    recs[1]["hyper_p"] = 0.2
    assert aggregate(cfg, recs)[0].sig_flag == "none"
    recs[1].update(TP=None, FP=None, FN=None, TN=None, hyper_p=None, error="boom")
    cell = aggregate(cfg, recs)[0]
    assert cell.sig_flag == "none" and cell.n_replicates == 1 and cell.failures == ["boom"]


def test_failed_cells_recorded_not_fatal():
    cfg = small(replicates=2, q_grid=[5, 60], gamma_grid=[0.0], methods=["ridge", "logo"],
                modes=["conditional"], pv_grid=[0.01])
    res = run_experiment(cfg)
    bad = res.cell("ridge", "conditional", 5)
    assert np.isnan(bad.tp_rate) and bad.failures
    assert res.warnings
    assert not np.isnan(res.cell("ridge", "conditional", 60).tp_rate)


def test_inference_ridge_complete_graph():
    res = run_experiment(small(methods=["ridge"], modes=["inference"]))
    for c in res.cells:
        assert c.tp_rate == 1.0 and c.fp_rate == 1.0
        assert c.fp_over_n == pytest.approx((30 - 6) / 6)


def test_determinism_and_outputs(tmp_path):
    cfg = small()
    a = write_outputs(run_experiment(cfg), tmp_path / "a")
    b = write_outputs(run_experiment(cfg), tmp_path / "b")
    for name in ("cells.csv", "roc.csv", "replicates.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    report = (a / "report.txt").read_text()
    assert "wall time" in report and "prefix reuse" in report and '"master_seed": 11' in report
    header = (a / "cells.csv").read_text().splitlines()[0]
    assert header == "method,mode,q,gamma,pv,tp_rate,fp_over_n,fp_rate,sig_flag,n_replicates"


def test_parallel_matches_serial(tmp_path):
    cfg = small()
    serial = run_experiment(cfg)
    par = run_experiment(small(n_jobs=2))
    assert [c.__dict__ for c in serial.cells] == [c.__dict__ for c in par.cells]


def test_replicate_isolation():
    cfg = small(replicates=3)
    full = run_experiment(cfg)
    alone = run_replicate(cfg, 2)
    assert alone == [r for r in full.records if r["replicate"] == 2]


def test_cells_roundtrip_and_six_digits(tmp_path):
    cells = [CellResult("logo", "conditional", 30, 0.1, 0.01, 1 / 3, 2 / 7, 0.0123456789,
                        "star", 20)]
    write_cells(cells, tmp_path / "c.csv")
    text = (tmp_path / "c.csv").read_text().splitlines()[1]
    assert text == "logo,conditional,30,0.1,0.01,0.333333,0.285714,0.0123457,star,20"
    back = read_cells(tmp_path / "c.csv")
    assert back[0].tp_rate == 0.333333 and back[0].sig_flag == "star"
    assert format_table(back, 0.1, 0.01) == format_table(
        [CellResult("logo", "conditional", 30, 0.1, 0.01, 0.333333, 0.285714, 0.0123457,
                    "star", 20)], 0.1, 0.01)


def test_roc_points():
    perfect = CellResult("logo", "conditional", 30, 0.1, 0.01, 1.0, 0.0, 0.0, "double-star", 5)
    assert roc_points([perfect])[0][-2:] == (0.0, 1.0)
    with pytest.raises(InvalidArgumentError):
        roc_points([])


def test_roc_random_guess_near_diagonal():
    # retrieving a shuffled truth scores like a random guess: TP/n close to FP/m
    rng = np.random.default_rng(0)
    tp, fp = [], []
    for s in range(200):
        spec = generate_process_spec(20, 2, 20, s)
        truth = true_network(spec).adjacency
        off = ~np.eye(20, dtype=bool)
        guess = np.zeros_like(truth)
        vals = truth[off].copy()
        rng.shuffle(vals)
        guess[off] = vals
        c = confusion(guess, truth)
        tp.append(c.tp_rate)
        fp.append(c.fp_rate)
    assert abs(np.mean(tp) - np.mean(fp)) < 0.02


def test_table_layout():
    res = run_experiment(small(q_grid=[40, 120]))
    text = format_table(res.cells, 0.1, 0.01)
    rows = [ln.split()[0] + " " + ln.split()[1] for ln in text.splitlines()[1:7]]
    assert rows == ["ridge TP/n", "ridge FP/n", "Glasso TP/n", "Glasso FP/n", "LoGo TP/n", "LoGo FP/n"]
    assert text.splitlines()[0].split()[1:] == ["40", "120"]
    with pytest.raises(InvalidArgumentError):
        format_table(res.cells, 0.5, 0.01)


def test_desk_preset():
    cfg = desk_preset()
    assert (cfg.p, cfg.tau, cfg.n_links, cfg.replicates, cfg.q_grid) == (20, 3, 20, 20, [30, 100, 1000])
    assert harness.full_scale_preset().p == 100
    assert desk_preset().self_links is None


def test_self_links_reach_the_generator(monkeypatch):
    with pytest.raises(InvalidArgumentError):
        ExperimentConfig(p=20, self_links=25)
    seen = []
    real = harness.generate_process_spec

    def spy(*args):
        spec = real(*args)
        seen.append(np.count_nonzero(np.diag(spec.coeffs[0])))
        return spec

    monkeypatch.setattr(harness, "generate_process_spec", spy)
    for k in (0, 5, None):
        cfg = desk_preset(replicates=1, q_grid=[50], methods=["ridge"], modes=["inference"],
                          self_links=k)
        run_experiment(cfg)
    assert seen == [0, 5, 20]


@pytest.mark.parametrize("name", ["desk.json", "full_table.json", "full_bonferroni.json"])
def test_shipped_configs_validate(name):
    from pathlib import Path

    cfg = ExperimentConfig.from_json(Path(__file__).parent.parent / "configs" / name)
    assert cfg.p in (20, 100)
    if name == "desk.json":
        assert cfg == desk_preset()
    else:
        assert cfg.self_links == 0 and cfg.self_links == harness.full_scale_preset().self_links
