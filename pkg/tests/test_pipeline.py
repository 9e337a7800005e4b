"""Config ingestion, orchestration, reports, and the CLI driver."""

import csv
import json

import pytest

from dramtile import cli
from dramtile.access_model import BASELINE, ROMANET
from dramtile.pipeline import (ConfigError, bundled_hardware, bundled_network,
                               bundled_path, compare, config_hash,
                               load_hardware, load_network, parse_hardware,
                               parse_network, plans_from_doc, plans_to_doc,
                               run_network, write_compare_csv, write_run_csv)
from dramtile.trace_gen import BURST, NONBURST

TOY_NET = {
    "name": "toynet",
    "layers": [
        {"name": "c1", "kind": "conv", "H": 8, "W": 8, "I": 4,
         "P": 3, "Q": 3, "J": 4, "str": 1, "bits": 16},
        {"name": "c2", "kind": "conv", "H": 6, "W": 6, "I": 4,
         "P": 3, "Q": 3, "J": 8, "str": 1, "bits": 16},
    ],
}

TOY_HW = {
    "buffers": {"ifm": 4096, "wgh": 4096, "ofm": 4096},
    "sram": {"banks": 8, "rows_per_bank": 512, "word_bytes": 2},
    "dram": {"banks_per_chip": 8, "rows_per_bank": 256,
             "columns_per_row": 128, "word_bits": 16, "burst_length": 8},
}


@pytest.fixture
def net():
    return parse_network(TOY_NET)


@pytest.fixture
def hw():
    return parse_hardware(TOY_HW)


@pytest.fixture
def config_files(tmp_path):
    net_path = tmp_path / "net.json"
    hw_path = tmp_path / "hw.json"
    net_path.write_text(json.dumps(TOY_NET))
    hw_path.write_text(json.dumps(TOY_HW))
    return net_path, hw_path


class TestConfig:
    def test_parse_network(self, net):
        assert net.name == "toynet"
        assert [l.name for l in net.layers] == ["c1", "c2"]
        assert net.layers[0].bit_ifm == 16
        assert net.layers[0].bit_psum == 32

    def test_missing_field(self):
        with pytest.raises(ConfigError, match="missing field"):
            parse_network({"name": "x", "layers": [{"kind": "conv"}]})

    def test_unknown_kind(self):
        bad = {"name": "x", "layers": [dict(TOY_NET["layers"][0],
                                            kind="pool")]}
        with pytest.raises(ConfigError, match="unknown kind"):
            parse_network(bad)

    def test_load_errors(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_network(tmp_path / "nope.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_hardware(bad)

    def test_parse_hardware(self, hw):
        assert hw.buffers == (4096, 4096, 4096)
        assert hw.dram.word_bits == 16
        assert hw.Dp == 1
        assert hw.timing.CL == 11
        assert hw.energy.e_act > 0

    def test_bundled_fixtures(self):
        for name in ("alexnet", "vgg16", "mobilenet", "mobilenet_amc"):
            network = bundled_network(name)
            assert len(network.layers) > 0
        hwc = bundled_hardware()
        assert hwc.buffers == (65536, 65536, 65536)
        with pytest.raises(ConfigError):
            bundled_path("resnet")

    def test_config_hash_stable(self, hw):
        assert config_hash("a", hw) == config_hash("a", hw)
        assert config_hash("a", hw) != config_hash("b", hw)


class TestRunNetwork:
    def test_totals_sum_layers(self, net, hw):
        run = run_network(net, hw, ROMANET, BURST)
        assert len(run.layers) == 2
        assert run.total_words == sum(r.counts.total_words
                                      for r in run.layers)
        assert run.stats.n_requests == run.total_requests
        assert run.energy_total > 0
        assert run.throughput(hw.timing) > 0

    def test_model_matches_simulated_words(self, net, hw):
        for mode in (ROMANET, BASELINE):
            run = run_network(net, hw, mode, BURST)
            s = run.stats
            assert s.rd_words + s.wr_words == run.total_words

    def test_bad_mode(self, net, hw):
        with pytest.raises(ConfigError):
            run_network(net, hw, "optimal")
        with pytest.raises(ConfigError):
            run_network(net, hw, ROMANET, burst="fast")

    def test_compare_toy_net(self, net, hw):
        report = compare(net, hw, BURST)
        assert report.access_reduction_pct >= 0
        assert report.romanet.total_words <= report.baseline.total_words


class TestReports:
    def test_run_csv(self, net, hw, tmp_path):
        run = run_network(net, hw, ROMANET, BURST)
        path = tmp_path / "run.csv"
        write_run_csv(run, hw, path)
        rows = list(csv.DictReader(path.open()))
        assert [r["layer"] for r in rows] == ["c1", "c2"]
        assert sum(int(r["total_words"]) for r in rows) == run.total_words

    def test_compare_csv(self, net, hw, tmp_path):
        report = compare(net, hw, BURST)
        path = tmp_path / "cmp.csv"
        write_compare_csv(report, path)
        text = path.read_text()
        assert "romanet_vs_baseline" in text
        assert f"{report.access_reduction_pct:.2f}" in text

    def test_plans_round_trip(self, net, hw):
        run = run_network(net, hw, ROMANET, BURST)
        plans = [r.result for r in run.layers]
        doc = plans_to_doc(net, plans, ROMANET)
        back = plans_from_doc(json.loads(json.dumps(doc)), net)
        for a, b in zip(plans, back):
            assert a.plan.factors == b.plan.factors
            assert a.schedule.nest == b.schedule.nest
            assert a.min_accesses.total_words == b.min_accesses.total_words


class TestCli:
    def test_dse(self, config_files, tmp_path, capsys):
        net_path, hw_path = config_files
        out = tmp_path / "out"
        rc = cli.main(["dse", "--net", str(net_path), "--hw", str(hw_path),
                       "--out", str(out), "--steps", "1"])
        assert rc == 0
        doc = json.loads((out / "toynet_romanet_plans.json").read_text())
        assert [p["layer"] for p in doc["plans"]] == ["c1", "c2"]

    def test_trace_then_sim(self, config_files, tmp_path, capsys):
        net_path, hw_path = config_files
        out = tmp_path / "out"
        rc = cli.main(["trace", "--net", str(net_path), "--hw", str(hw_path),
                       "--out", str(out), "--steps", "1", "--layer", "0",
                       "--mode", "romanet", "--burst", "burst"])
        assert rc == 0
        trace_file = next(out.glob("*.trace"))
        rc = cli.main(["sim", "--hw", str(hw_path), "--out", str(out),
                       str(trace_file)])
        assert rc == 0
        assert "requests=" in capsys.readouterr().out

    def test_compare_and_report(self, config_files, tmp_path, capsys):
        net_path, hw_path = config_files
        out = tmp_path / "out"
        rc = cli.main(["compare", "--net", str(net_path), "--hw",
                       str(hw_path), "--out", str(out), "--steps", "1"])
        assert rc == 0
        assert (out / "toynet_compare_burst.csv").exists()
        rc = cli.main(["report", "--out", str(out)])
        assert rc == 0
        assert "romanet_vs_baseline" in capsys.readouterr().out

    def test_report_empty_dir(self, tmp_path, capsys):
        assert cli.main(["report", "--out", str(tmp_path)]) == 1

    def test_missing_file_is_error_not_crash(self, tmp_path):
        assert cli.main(["dse", "--net", str(tmp_path / "no.json"),
                         "--out", str(tmp_path)]) == 1

    def test_sweep(self, config_files, tmp_path):
        net_path, hw_path = config_files
        out = tmp_path / "out"
        rc = cli.main(["sweep", "--net", str(net_path), "--hw", str(hw_path),
                       "--out", str(out), "--axis", "step", "--steps", "1"])
        assert rc == 0
        rows = list(csv.DictReader((out / "toynet_sweep_step.csv").open()))
        assert {r["layer"] for r in rows} == {"c1", "c2"}
