"""Benchmark harness outputs and the command-line interface."""

import csv
import json
import os
import subprocess
import sys

import pytest

from rechain.bench import BenchConfig, run_static_bench
from rechain.cli import main
from rechain.model import make_scheme


def small_config(**overrides):
    base = dict(m=6, n=3, c=2, loads=[0.5, 1.0], phases=3, seed=11, measure_ops=200)
    base.update(overrides)
    return BenchConfig(**base)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def strip_timing(rows):
    return [{k: v for k, v in row.items() if k != "wall_ns"} for row in rows]


class TestBenchConfig:
    def test_rejects_unknown_keys(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            BenchConfig.from_json({"bogus": 1})

    def test_rejects_bad_loads_and_phases(self):
        with pytest.raises(ValueError):
            BenchConfig(loads=[1.5])
        with pytest.raises(ValueError):
            BenchConfig(phases=1)
        with pytest.raises(ValueError):
            BenchConfig(mode="sideways")

    def test_weight_shape(self):
        cfg = BenchConfig(wT=[1, 2], wL=[1, 1, 1])
        shape = cfg.shape()
        assert shape.n == 2 and shape.m == 3
        assert shape.capacity[1][0] == 4


class TestStaticBench:
    def test_records_are_internally_consistent(self, tmp_path):
        cfg = small_config()
        records = run_static_bench(cfg, out_dir=str(tmp_path), fmt="both")
        assert records
        for rec in records:
            denom = rec.num_conn_t + rec.num_conn_t1
            assert 0.0 <= rec.rr <= 1.0
            if denom:
                assert rec.rr == pytest.approx(rec.num_rearr / denom)

    def test_csv_rr_column_recomputes(self, tmp_path):
        cfg = small_config()
        run_static_bench(cfg, out_dir=str(tmp_path), fmt="csv", figures=False)
        paths = sorted(p for p in os.listdir(tmp_path) if p.endswith(".csv"))
        assert paths == ["static_bench_l0.50.csv", "static_bench_l1.00.csv"]
        for p in paths:
            for row in read_csv(os.path.join(tmp_path, p)):
                denom = int(row["num_conn_t"]) + int(row["num_conn_t1"])
                if denom:
                    assert float(row["rr"]) == pytest.approx(
                        int(row["num_rearr"]) / denom, abs=1e-6
                    )

    def test_deterministic_apart_from_timing(self, tmp_path):
        cfg = small_config()
        run_static_bench(cfg, out_dir=str(tmp_path / "a"), fmt="csv", figures=False)
        run_static_bench(cfg, out_dir=str(tmp_path / "b"), fmt="csv", figures=False)
        for name in os.listdir(tmp_path / "a"):
            ra = strip_timing(read_csv(str(tmp_path / "a" / name)))
            rb = strip_timing(read_csv(str(tmp_path / "b" / name)))
            assert ra == rb

    def test_identical_demands_give_zero_rr(self):
        # uniform traffic with a 5s pair cycle aggregates identically over any
        # 3600s window, so both demand phases coincide and nothing rewires
        cfg = small_config(loads=[1.0], phases=2, model="uniform", rate=6)
        records = run_static_bench(cfg)
        assert records[0].num_rearr == 0
        assert records[0].rr == 0.0

    def test_discontinuous_mode_runs(self, tmp_path):
        cfg = small_config(mode="discontinuous", loads=[0.5])
        records = run_static_bench(cfg, out_dir=str(tmp_path), fmt="json", figures=False)
        assert records
        body = json.loads((tmp_path / "static_bench.json").read_text())
        assert body["config"]["mode"] == "discontinuous"
        assert "counting" in body

    def test_figures_rendered(self, tmp_path):
        cfg = small_config(loads=[0.5])
        run_static_bench(cfg, out_dir=str(tmp_path), fmt="csv", figures=True)
        names = set(os.listdir(tmp_path))
        assert "static_bench_rr.png" in names
        assert "static_bench_chain_lengths.png" in names


class TestCli:
    def test_no_arguments_prints_usage_and_fails(self, capsys):
        assert main([]) == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_subcommand_exits_one(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_gen_trace_deterministic_bytes(self):
        out1 = subprocess.run(
            [sys.executable, "-m", "rechain.cli", "gen-trace", "--model", "uniform",
             "--seed", "7", "--racks", "3", "--duration", "5"],
            capture_output=True, text=True,
        )
        out2 = subprocess.run(
            [sys.executable, "-m", "rechain.cli", "gen-trace", "--model", "uniform",
             "--seed", "7", "--racks", "3", "--duration", "5"],
            capture_output=True, text=True,
        )
        assert out1.returncode == out2.returncode == 0
        assert out1.stdout == out2.stdout

    def test_seed_env_fallback(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("RECHAIN_SEED", "99")
        path = tmp_path / "trace.csv"
        assert main(["gen-trace", "--racks", "3", "--duration", "2", "--out", str(path)]) == 0
        assert path.exists()
        monkeypatch.setenv("RECHAIN_SEED", "not-a-number")
        assert main(["gen-trace", "--racks", "3", "--duration", "2"]) == 1

    def test_static_bench_end_to_end(self, tmp_path, capsys):
        cfg = dict(m=6, n=3, c=2, loads=[0.5], phases=3, seed=2)
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        code = main(["static-bench", "--config", str(cfg_path), "--out", str(tmp_path / "out")])
        assert code == 0
        names = set(os.listdir(tmp_path / "out"))
        assert "static_bench_l0.50.csv" in names
        assert "static_bench.json" in names
        assert "static_bench_rr.png" in names

    def test_dynamic_bench_end_to_end(self, tmp_path):
        cfg = dict(m=8, n=4, c=4, loads=[0.3], phases=2, seed=2,
                   measure_ops=150, warmup_ops=100, rate=8)
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        code = main(["dynamic-bench", "--config", str(cfg_path),
                     "--out", str(tmp_path / "out"), "--no-figures"])
        assert code == 0
        rows = read_csv(str(tmp_path / "out" / "dynamic_bench.csv"))
        assert len(rows) == 1
        assert float(rows[0]["rearr_per_op"]) >= 0.0

    def test_convert_subcommand(self, tmp_path):
        instance = {
            "shape": {"m": 3, "n": 2, "capacity": [[2, 2, 2], [2, 2, 2]]},
            "demand": {"m": 3, "demand": [[0, 1, 1], [1, 0, 1], [1, 1, 0]]},
            "scheme": {"n": 2, "m": 3, "scheme": make_scheme(2, 3)},
        }
        instance["scheme"]["scheme"][0][0][1] = 1
        instance["scheme"]["scheme"][0][1][0] = 1
        src = tmp_path / "inst.json"
        src.write_text(json.dumps(instance))
        dst = tmp_path / "sym.json"
        assert main(["convert", "--in", str(src), "--out", str(dst)]) == 0
        body = json.loads(dst.read_text())
        assert body["symmetric"]["capacity"] == [[1, 1, 1], [1, 1, 1]]
        directed = body["directed_scheme"]
        assert directed[0][0][1] + directed[0][1][0] == 1
        total = sum(sum(row) for row in body["directed_demand"])
        assert total == 3  # half of the six demanded entries

    def test_convert_rejects_odd_capacity(self, tmp_path, capsys):
        instance = {"shape": {"m": 2, "n": 1, "capacity": [[1, 2]]}}
        src = tmp_path / "inst.json"
        src.write_text(json.dumps(instance))
        assert main(["convert", "--in", str(src), "--out", str(tmp_path / "o.json")]) == 1

    def test_verify_subcommand_agrees(self, tmp_path, capsys):
        instance = {
            "shape": {"m": 3, "n": 2, "capacity": [[2, 2, 2], [2, 2, 2]]},
            "demand": {"m": 3, "demand": [[0, 2, 1], [2, 0, 2], [1, 2, 0]]},
            "scheme": {
                "n": 2, "m": 3,
                "scheme": [
                    [[0, 0, 0], [0, 0, 2], [0, 2, 0]],
                    [[0, 1, 1], [1, 0, 0], [1, 0, 0]],
                ],
            },
            "pair": [0, 1],
        }
        src = tmp_path / "inst.json"
        src.write_text(json.dumps(instance))
        assert main(["verify", "--in", str(src), "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "agrees" in out

    def test_missing_file_is_validation_error(self):
        assert main(["verify", "--in", "/nonexistent/x.json"]) == 1
