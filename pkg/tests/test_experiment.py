import pytest

from _helpers import full, planted6
from netmle.errors import ConfigError
from netmle.experiment import (
    COLUMNS, RiskReport, RiskRow, config_from_mapping, emit_csv, format_csv, load_config,
    parse_csv, rate_check, read_csv, run_experiment,
)
from netmle.fit import FitConfig, fit_exact
from netmle.netcore import BlockModel, Labeling, frob


def base(**over):
    doc = {"n": [6], "rho": 1.0, "seed": 3, "trials": 1, "latent": "grid",
           "graphon": {"kind": "planted", "params": {"k": 2, "p": 1.0, "q": 0.0}},
           "fit": {"k": 2, "method": "exact", "gamma": 0.05, "rho": 0.95}}
    for key, val in over.items():
        doc[key] = val
    return config_from_mapping(doc)


class TestConfig:
    def test_empty_grid(self):
        with pytest.raises(ConfigError):
            base(n=[])

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="fit.kk"):
            config_from_mapping({"n": [6], "rho": 0.5, "graphon": {"kind": "constant", "params": {"c": 0.5}},
                                 "fit": {"kk": 2}})

    def test_k_xor_alpha(self):
        with pytest.raises(ConfigError):
            config_from_mapping({"n": [6], "rho": 0.5, "graphon": {"kind": "constant", "params": {"c": 0.5}}})

    def test_bad_graphon(self):
        with pytest.raises(ConfigError):
            base(graphon={"kind": "affine", "params": {"c0": 0.9, "c1": 0.5}})

    def test_toml(self, tmp_path):
        p = tmp_path / "c.toml"
        p.write_text('n = [8, 10]\nrho = 0.3\ntrials = 2\ngraphon.kind = "affine"\n'
                     'graphon.params = { c0 = 0.3, c1 = 0.5 }\nmissing.p = [1.0, 0.5]\nfit.k = 2\n')
        cfg = load_config(p)
        assert cfg.cells == [(8, 1.0), (8, 0.5), (10, 1.0), (10, 0.5)]
        assert cfg.graphon_params == {"c0": 0.3, "c1": 0.5}

    def test_malformed_toml(self, tmp_path):
        p = tmp_path / "c.toml"
        p.write_text("n = [\n")
        with pytest.raises(ConfigError):
            load_config(p)


class TestRun:
    def test_clamp_residual(self):
        rep = run_experiment(base())
        (row,) = rep.rows
        assert row.status == "ok"
        # 15 pairs, each 0.05 away from its 0/1 truth after clamping
        assert row.frob_risk == pytest.approx(15 * 0.05 ** 2, rel=1e-12)

    def test_zero_residual_when_truth_is_clamped_value(self):
        a, lab = planted6()
        res = fit_exact(a, full(6), FitConfig(2, 0.05, 0.95))
        truth = BlockModel([[0.95, 0.05], [0.05, 0.95]], Labeling(lab, 2)).theta()
        assert frob(truth, res.theta_hat) == 0.0

    def test_row_count_and_nonnegative(self):
        cfg = base(n=[6, 7], trials=3, graphon={"kind": "affine", "params": {"c0": 0.3, "c1": 0.5}},
                   rho=0.5, missing={"p": [1.0, 0.5]})
        rep = run_experiment(cfg)
        assert len(rep.rows) == 4 * 3
        for r in rep.rows:
            assert r.status == "ok"
            assert r.frob_risk >= 0 and r.frob_risk_weighted >= 0 and r.kl_oracle_gap >= 0
            assert r.wall_time is None
        assert [(r.n, r.p, r.trial) for r in rep.rows][:4] == [(6, 1.0, 0), (6, 1.0, 1), (6, 1.0, 2), (6, 0.5, 0)]

    def test_oracle_absent_beyond_budget(self):
        cfg = base(n=[24], fit={"k": 2, "gamma": 0.05, "rho": 0.95})
        (row,) = run_experiment(cfg).rows
        assert row.kl_oracle_gap is None

    def test_jobs_independent(self):
        cfg = base(n=[10, 12], trials=3, rho=0.5,
                   graphon={"kind": "affine", "params": {"c0": 0.3, "c1": 0.5}},
                   fit={"k": 2, "restarts": 3}, missing={"p": [1.0, 0.6]}, latent="uniform")
        assert format_csv(run_experiment(cfg, jobs=1)) == format_csv(run_experiment(cfg, jobs=3))

    def test_error_row_rest_of_cell(self):
        # an all-zero hold-out is certain when the graphon is zero
        cfg = base(n=[6], trials=3, graphon={"kind": "constant", "params": {"c": 0.0}},
                   fit={"k": 2, "bounds": "adaptive"})
        rep = run_experiment(cfg)
        assert len(rep.rows) == 3
        assert all(r.status.startswith("error: DegenerateSampleError") for r in rep.rows)

    def test_designs(self):
        dy = base(n=[8], rho=0.5, graphon={"kind": "affine", "params": {"c0": 0.3, "c1": 0.5}},
                  missing={"kind": "dyad", "P": [[0.9, 0.4], [0.4, 0.7]]},
                  fit={"k": 2, "restarts": 2})
        (row,) = run_experiment(dy).rows
        assert row.status == "ok" and row.p == 0.4 and row.design == "dyad"
        ex = base(n=[8], rho=0.5, graphon={"kind": "affine", "params": {"c0": 0.3, "c1": 0.5}},
                  missing={"kind": "exo", "sampled_nodes": [0, 1]}, fit={"k": 2, "restarts": 2})
        (row,) = run_experiment(ex).rows
        assert row.design == "dependent-mask"
        assert row.p == pytest.approx(13 / 28)

    def test_tradeoff_and_alpha(self):
        cfg = base(n=[9], rho=0.5, graphon={"kind": "affine", "params": {"c0": 0.3, "c1": 0.5}},
                   fit={"alpha": 1.0, "bounds": "tradeoff", "restarts": 2})
        (row,) = run_experiment(cfg).rows
        assert row.status == "ok" and row.k >= 1


class TestCSV:
    def test_header_only(self, tmp_path):
        emit_csv(RiskReport([]), tmp_path / "r.csv")
        assert (tmp_path / "r.csv").read_text() == ",".join(COLUMNS) + "\n"
        assert read_csv(tmp_path / "r.csv").rows == []

    def test_column_order(self):
        assert COLUMNS == ("n", "p", "rho", "k", "trial", "frob_risk", "frob_risk_weighted",
                           "kl_oracle_gap", "objective", "wall_time", "design", "status")

    def test_roundtrip(self):
        rows = [RiskRow(n=6, p=0.5, rho=0.3, k=2, trial=0, frob_risk=0.123456789012,
                        frob_risk_weighted=0.1, kl_oracle_gap=None, objective=3.5, design="uniform"),
                RiskRow(n=7, p=None, rho=0.3, k=None, trial=1, design="dyad", status="error: x")]
        text = format_csv(RiskReport(rows))
        assert parse_csv(text).rows == rows
        assert format_csv(parse_csv(text)) == text

    def test_twelve_digits(self):
        text = format_csv(RiskReport([RiskRow(n=6, p=1.0, rho=0.3, k=2, trial=0,
                                              frob_risk=1 / 3)]))
        assert "0.333333333333," in text

    def test_bad_header(self):
        with pytest.raises(ValueError):
            parse_csv("a,b\n")

    def test_bad_path(self, tmp_path):
        with pytest.raises(OSError, match="nope"):
            emit_csv(RiskReport([]), tmp_path / "nope" / "r.csv")


def synth(axis_vals, risk_fn, axis="p"):
    rows = []
    for v in axis_vals:
        for t in range(3):
            kw = {"n": 8, "p": 1.0}
            kw[axis] = v
            rows.append(RiskRow(rho=0.3, k=2, trial=t, frob_risk=risk_fn(v), **kw))
    return RiskReport(rows)


class TestRateCheck:
    def test_inverse_p(self):
        res = rate_check(synth([1.0, 0.5, 0.25], lambda p: 3.0 / p), "p")
        assert res.slope == pytest.approx(-1.0, abs=1e-12)
        # ascending p: each ratio is risk(2p) / risk(p)
        assert res.ratios == pytest.approx((0.5, 0.5))

    def test_constant(self):
        res = rate_check(synth([16, 32, 64], lambda n: 5.0, axis="n"), "n")
        assert res.slope == pytest.approx(0.0, abs=1e-12)

    def test_too_few(self):
        with pytest.raises(ValueError):
            rate_check(synth([1.0], lambda p: 1.0), "p")

    def test_skips_error_rows(self):
        rep = synth([1.0, 0.5], lambda p: 1 / p)
        rep.rows.append(RiskRow(n=8, p=0.25, rho=0.3, k=2, trial=0, status="error: x"))
        assert rate_check(rep, "p").values == (0.5, 1.0)
