import json
import math

import numpy as np
import pytest

from triplet_portfolio import (
    DataError,
    StageError,
    emit_plot_data,
    emit_table,
    run_analysis,
    synthetic_price_panel,
    write_panel_csv,
)
from triplet_portfolio.analysis import AnalysisConfig
from triplet_portfolio.cli import build_config, main, parse_intervals, parse_scales
from triplet_portfolio.returns import portfolio_return, portfolio_variance


@pytest.fixture(scope="module")
def small_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "small.csv"
    panel = synthetic_price_panel(n_days=320, seed=5)
    write_panel_csv(panel, path)
    return path


@pytest.fixture(scope="module")
def small_report(small_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    config = AnalysisConfig(
        input_path=small_csv,
        output_dir=out,
        intervals=(1, 2, 3),
        grid_resolution=40,
    )
    return run_analysis(config)


class TestParsers:
    def test_interval_range(self):
        assert parse_intervals("1..10") == tuple(range(1, 11))

    def test_interval_list(self):
        assert parse_intervals("1,3,9") == (1, 3, 9)

    def test_interval_single(self):
        assert parse_intervals("4") == (4,)

    def test_interval_garbage(self):
        with pytest.raises(DataError, match="intervals"):
            parse_intervals("one..ten")

    def test_scales_auto(self):
        assert parse_scales("5:auto") == (5, None, 20)

    def test_scales_explicit(self):
        assert parse_scales("8:256:15") == (8, 256, 15)

    def test_scales_garbage(self):
        with pytest.raises(DataError, match="scales"):
            parse_scales("5")


class TestBuildConfig:
    BASE = {
        "input": "prices.csv",
        "out": "results",
        "intervals": "1..3",
        "grid": "50",
        "dfa_order": "1",
        "scales": "5:auto",
        "covariance": "sample",
        "gamma": "1.0",
        "heron": "standard",
    }

    def test_heron_paper_maps_to_thirds(self):
        config = build_config({**self.BASE, "heron": "paper"})
        assert config.heron_convention == "thirds"

    def test_missing_input(self):
        options = dict(self.BASE)
        del options["input"]
        with pytest.raises(DataError, match="input"):
            build_config(options)

    def test_date_range(self):
        config = build_config({**self.BASE, "from": "2020-01-01", "to": "2020-06-30"})
        assert config.date_range[0].isoformat() == "2020-01-01"
        assert config.date_range[1].isoformat() == "2020-06-30"

    def test_config_invariants(self):
        with pytest.raises(DataError, match=">= 10"):
            build_config({**self.BASE, "grid": "5"})
        with pytest.raises(DataError, match="intervals"):
            build_config({**self.BASE, "intervals": "0..3"})


class TestRunAnalysis:
    def test_block_structure(self, small_report):
        assert len(small_report.blocks) == 3
        for block in small_report.blocks:
            for w in (block.triangle.w_r, block.triangle.w_sigma, block.triangle.w_h):
                assert abs(w.as_array().sum() - 1.0) <= 1e-9
            assert abs(block.optimum.centroid.as_array().sum() - 1.0) <= 1e-9

    def test_averaged_block_present(self, small_report):
        averaged = small_report.averaged
        assert averaged.vertices.n_intervals == 3
        assert averaged.summary("w_R") is not None
        assert averaged.summary("pareto") is not None
        assert averaged.summary("w_R").sem_weight.shape == (3,)

    def test_files_written(self, small_report):
        out = small_report.config.output_dir
        assert (out / "report.txt").exists()
        for which in ("local", "global", "averaged"):
            assert (out / "tables" / f"{which}.csv").exists()
        for tau in (1, 2, 3):
            for kind in ("dfa", "investing_space", "subspace"):
                assert (out / "plots" / f"{kind}_tau{tau}.csv").exists()

    def test_symmetric_panel_sanity(self, tmp_path):
        # Equal-variance uncorrelated assets keep the minimum-variance
        # point near equal weights and all persistence estimates near 1/2.
        rng = np.random.default_rng(0)
        import datetime as dt

        from triplet_portfolio import AssetPanel

        n = 600
        prices = np.exp(np.cumsum(rng.standard_normal((3, n)) * 0.01, axis=1)) * 100.0
        panel = AssetPanel(
            asset_ids=("X", "Y", "Z"),
            dates=tuple(dt.date(2020, 1, 1) + dt.timedelta(days=k) for k in range(n)),
            prices=prices,
        )
        path = tmp_path / "sym.csv"
        write_panel_csv(panel, path)
        report = run_analysis(
            AnalysisConfig(
                input_path=path,
                output_dir=tmp_path / "out",
                intervals=(1,),
                grid_resolution=50,
            )
        )
        block = report.blocks[0]
        assert np.max(np.abs(block.stats.hurst - 0.5)) < 0.1
        assert np.max(np.abs(block.triangle.w_sigma.as_array() - 1 / 3)) <= 0.15


class TestEmitters:
    def test_local_table_rows(self, small_report):
        rendering = emit_table(small_report, "local")
        assert "LOW" in rendering.text
        assert "DMR" in rendering.text
        assert "VR" in rendering.text
        header, *rows = rendering.csv.strip().splitlines()
        assert header.startswith("interval_days,vertex,asset_id")
        # 3 intervals x 3 vertices x 3 assets
        assert len(rows) == 27

    def test_global_table_rows(self, small_report):
        rendering = emit_table(small_report, "global")
        assert "OW" in rendering.text
        assert "ODMR" in rendering.text

    def test_averaged_table_rows(self, small_report):
        rendering = emit_table(small_report, "averaged")
        for label in ("ALOW", "ADMR", "SE", "SEM", "AOW", "AODMR"):
            assert label in rendering.text

    def test_unknown_table(self, small_report):
        with pytest.raises(DataError, match="unknown table"):
            emit_table(small_report, "weekly")

    def test_csv_round_trip_reproduces_metrics(self, small_report):
        # Weights parsed back from the machine-readable table must
        # reproduce the recorded return and volatility exactly.
        lines = emit_table(small_report, "local").csv.strip().splitlines()[1:]
        by_key = {}
        for line in lines:
            tau, vertex, asset, weight, dmr, vr = line.split(",")
            by_key.setdefault((int(tau), vertex), {"w": [], "dmr": dmr, "vr": vr})[
                "w"
            ].append(float(weight))
        for (tau, _vertex), rec in by_key.items():
            block = next(b for b in small_report.blocks if b.interval_days == tau)
            w = np.asarray(rec["w"])
            dmr = portfolio_return(w, block.stats) / tau
            vr = math.sqrt(portfolio_variance(w, block.stats))
            assert dmr == pytest.approx(float(rec["dmr"]), abs=1e-12)
            assert vr == pytest.approx(float(rec["vr"]), abs=1e-12)

    def test_dfa_plot_rows_match_scale_count(self, small_report):
        files = emit_plot_data(small_report)
        block = small_report.blocks[0]
        lines = files["plots/dfa_tau1.csv"].strip().splitlines()[1:]
        expected = sum(len(r.fluctuations) for r in block.dfa_results)
        assert len(lines) == expected

    def test_investing_space_rows_match_grid(self, small_report):
        files = emit_plot_data(small_report)
        lines = files["plots/investing_space_tau1.csv"].strip().splitlines()[1:]
        assert len(lines) == math.comb(40 + 2, 2)

    def test_subspace_structure(self, small_report):
        files = emit_plot_data(small_report)
        lines = files["plots/subspace_tau1.csv"].strip().splitlines()[1:]
        kinds = [line.split(",")[0] for line in lines]
        assert kinds == ["vertex"] * 3 + ["optimum"] * 3 + ["radius"]


class TestCliMain:
    def test_end_to_end(self, small_csv, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(
            [
                "analyze",
                "--input", str(small_csv),
                "--out", str(out),
                "--intervals", "1..2",
                "--grid", "40",
            ]
        )
        assert code == 0
        captured = capsys.readouterr()
        assert "report written" in captured.out
        assert (out / "report.txt").exists()

    def test_byte_identical_reruns(self, small_csv, tmp_path):
        out = tmp_path / "runs"
        argv = [
            "analyze", "--input", str(small_csv), "--out", str(out),
            "--intervals", "1..2", "--grid", "40",
        ]
        assert main(argv) == 0
        snapshot = {
            p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()
        }
        assert main(argv) == 0
        for rel, blob in snapshot.items():
            assert (out / rel).read_bytes() == blob

    def test_missing_file_is_stage_tagged(self, tmp_path, capsys):
        code = main(
            ["analyze", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")]
        )
        assert code == 1
        captured = capsys.readouterr()
        assert "[load]" in captured.err

    def test_env_override(self, small_csv, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("TRIPLET_PORTFOLIO_INTERVALS", "1")
        monkeypatch.setenv("TRIPLET_PORTFOLIO_GRID", "40")
        out = tmp_path / "env"
        code = main(["analyze", "--input", str(small_csv), "--out", str(out)])
        assert code == 0
        report = (out / "report.txt").read_text()
        assert "intervals = 1\n" in report
        assert "grid_resolution = 40" in report

    def test_cli_beats_env(self, small_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("TRIPLET_PORTFOLIO_GRID", "40")
        out = tmp_path / "prec"
        code = main(
            ["analyze", "--input", str(small_csv), "--out", str(out),
             "--intervals", "1", "--grid", "60"]
        )
        assert code == 0
        assert "grid_resolution = 60" in (out / "report.txt").read_text()

    def test_json_config_file(self, small_csv, tmp_path):
        cfg = tmp_path / "settings.json"
        cfg.write_text(json.dumps({"intervals": "1", "grid": "40"}))
        out = tmp_path / "jsonout"
        code = main(
            ["analyze", "--input", str(small_csv), "--out", str(out), "--config", str(cfg)]
        )
        assert code == 0
        assert "grid_resolution = 40" in (out / "report.txt").read_text()

    def test_toml_config_file(self, small_csv, tmp_path):
        cfg = tmp_path / "settings.toml"
        cfg.write_text('intervals = "1"\ngrid = "40"\nheron = "paper"\n')
        out = tmp_path / "tomlout"
        code = main(
            ["analyze", "--input", str(small_csv), "--out", str(out), "--config", str(cfg)]
        )
        assert code == 0
        assert "heron_convention = thirds" in (out / "report.txt").read_text()

    def test_unknown_config_key(self, small_csv, tmp_path, capsys):
        cfg = tmp_path / "settings.json"
        cfg.write_text(json.dumps({"granularity": "9"}))
        code = main(
            ["analyze", "--input", str(small_csv), "--out", str(tmp_path / "x"),
             "--config", str(cfg)]
        )
        assert code == 1
        assert "unknown config keys" in capsys.readouterr().err

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["analyze", "--grid"])
        assert excinfo.value.code == 2


class TestStageIsolation:
    def test_dfa_failure_names_asset_and_writes_nothing(self, tmp_path):
        # A constant price series has no fluctuation signal, so the DFA
        # stage must fail, name the offending asset, and leave no files.
        panel = synthetic_price_panel(n_days=200, seed=6)
        prices = np.array(panel.prices, copy=True)
        prices[1, :] = 42.0
        from conftest import make_panel

        broken = make_panel(prices, asset_ids=("GOOD", "FLAT", "OK"))
        path = tmp_path / "flat.csv"
        write_panel_csv(broken, path)
        out = tmp_path / "out"
        config = AnalysisConfig(
            input_path=path, output_dir=out, intervals=(1,), grid_resolution=40
        )
        with pytest.raises(StageError, match=r"dfa\[asset=FLAT"):
            run_analysis(config)
        assert not out.exists()
