"""Sweep driver, export determinism and CLI tests."""

import dataclasses
import json

import numpy as np
import pytest

from otfssim.cli import main
from otfssim.sim import PointSummary, SweepConfig, export, run_sweep, run_trial
from otfssim.zak import FrameConfig


SMALL = SweepConfig(schemes=("s1d", "ep"), equalizers=("mrc",),
                    alphas=(0.2, 0.5), trials=3)


class TestSweepConfig:
    def test_defaults_are_valid(self):
        assert SweepConfig().validate() == []

    def test_noise_var_follows_snr(self):
        assert np.isclose(SweepConfig(snr_db=15.0).noise_var, 10 ** -1.5)
        assert SweepConfig(snr_db=None).noise_var == 0.0

    def test_dict_round_trip(self):
        cfg = dataclasses.replace(SMALL, ep_pilot_location=(8, 8),
                                  frame=FrameConfig(M=24, cp_len=8))
        clone = SweepConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert clone == cfg

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            SweepConfig.from_dict({"trials": 3, "bogus": 1})

    @pytest.mark.parametrize("field,value,needle", [
        ("schemes", ("ofdm",), "unknown scheme"),
        ("equalizers", (), "not be empty"),
        ("alphas", (0.0,), "alpha"),
        ("n_iter", 0, "n_iter"),
        ("trials", 0, "trials"),
        ("qam_order", 8, "qam_order"),
        ("n_paths", 0, "n_paths"),
        ("omp_threshold", -1.0, "omp_threshold"),
        ("pilot_column", 99, "pilot_column"),
    ])
    def test_validation_messages(self, field, value, needle):
        cfg = dataclasses.replace(SMALL, **{field: value})
        assert any(needle in p for p in cfg.validate())

    def test_run_sweep_refuses_invalid_config(self):
        with pytest.raises(ValueError, match="unknown scheme"):
            run_sweep(dataclasses.replace(SMALL, schemes=("bad",)))


class TestRunTrial:
    def test_identical_seeds_reproduce_exactly(self):
        a = run_trial(SMALL, "s1d", "mrc", 0.4, seed=9)
        b = run_trial(SMALL, "s1d", "mrc", 0.4, seed=9)
        assert a == b

    def test_seed_changes_the_draw(self):
        a = run_trial(SMALL, "s1d", "mrc", 0.4, seed=9)
        b = run_trial(SMALL, "s1d", "mrc", 0.4, seed=10)
        assert a.papr_db != b.papr_db

    def test_icsi_reports_zero_nmse_and_no_passes(self):
        cfg = dataclasses.replace(SMALL, icsi=True)
        rec = run_trial(cfg, "ep", "mrc", 0.3, seed=4)
        assert rec.nmse == 0.0
        assert rec.iterations == 0

    def test_trace_rows_follow_the_record(self):
        cfg = dataclasses.replace(SMALL, n_iter=2)
        rec, rows = run_trial(cfg, "s1d", "mrc", 0.4, seed=3, with_trace=True)
        assert [r["iteration"] for r in rows] == [1, 2]
        assert rows[-1]["ber"] == rec.ber
        assert rows[-1]["nmse"] == rec.nmse

    def test_unknown_scheme_is_rejected(self):
        with pytest.raises(ValueError, match="unknown scheme"):
            run_trial(SMALL, "cp-ofdm", "mrc", 0.4, seed=1)

    def test_bit_accounting_is_consistent(self):
        rec = run_trial(SMALL, "ep", "lmmse", 0.2, seed=2)
        assert rec.bits_total == 496
        assert rec.ber == rec.bit_errors / rec.bits_total


class TestRunSweep:
    def test_grid_is_fully_covered(self):
        res = run_sweep(SMALL)
        keys = [(p.scheme, p.equalizer, p.alpha) for p in res.points]
        assert keys == [(s, "mrc", a) for s in ("s1d", "ep")
                        for a in (0.2, 0.5)]
        assert all(p.trials == 3 for p in res.points)

    def test_parallel_equals_serial(self):
        serial = run_sweep(SMALL)
        parallel = run_sweep(SMALL, threads=2)
        assert serial.points == parallel.points

    def test_progress_callback_sees_every_point(self):
        seen = []
        run_sweep(SMALL, progress=seen.append)
        assert len(seen) == 4
        assert all(isinstance(p, PointSummary) for p in seen)

    def test_keep_records_stores_per_trial_rows(self):
        res = run_sweep(dataclasses.replace(SMALL, keep_records=True))
        batch = res.records[("s1d", "mrc", 0.2)]
        assert len(batch) == 3
        assert [r.seed for r in batch] == [1, 2, 3]


class TestExport:
    def test_rerun_is_byte_identical(self, tmp_path):
        res = run_sweep(SMALL)
        a_csv, a_man = export(res, tmp_path / "a")
        b_csv, b_man = export(run_sweep(SMALL), tmp_path / "b")
        assert open(a_csv, "rb").read() == open(b_csv, "rb").read()
        assert open(a_man, "rb").read() == open(b_man, "rb").read()

    def test_csv_layout(self, tmp_path):
        csv_path, _ = export(run_sweep(SMALL), tmp_path)
        lines = open(csv_path).read().splitlines()
        assert lines[0].startswith("scheme,equalizer,alpha,trials,nmse,ber")
        assert len(lines) == 1 + 4

    def test_manifest_config_round_trips(self, tmp_path):
        _, man_path = export(run_sweep(SMALL), tmp_path)
        manifest = json.load(open(man_path))
        assert SweepConfig.from_dict(manifest["config"]) == SMALL
        assert manifest["kernel_backend"] in ("numba", "numpy")


class TestCli:
    def write_config(self, tmp_path, cfg):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        return str(path)

    def test_validate_accepts_good_config(self, tmp_path, capsys):
        path = self.write_config(tmp_path, SMALL)
        assert main(["validate", "--config", path]) == 0
        assert "ok" in capsys.readouterr().out

    def test_validate_flags_bad_config(self, tmp_path, capsys):
        cfg = dataclasses.replace(SMALL, n_iter=0)
        path = self.write_config(tmp_path, cfg)
        assert main(["validate", "--config", path]) == 1
        assert "invalid" in capsys.readouterr().err

    def test_trial_prints_trace_and_record(self, capsys):
        assert main(["trial", "--scheme", "ep", "--alpha", "0.2",
                     "--seed", "3", "--n-iter", "2"]) == 0
        out = capsys.readouterr().out
        assert "pass 1:" in out and "pass 2:" in out
        record = json.loads(out[out.index("{"):])
        assert record["scheme"] == "ep"
        assert record["seed"] == 3

    def test_sweep_writes_outputs(self, tmp_path, capsys):
        path = self.write_config(tmp_path, SMALL)
        out_dir = tmp_path / "results"
        assert main(["sweep", "--config", path, "--output-dir",
                     str(out_dir), "--trials", "2"]) == 0
        assert (out_dir / "sweep.csv").exists()
        assert (out_dir / "manifest.json").exists()
        manifest = json.load(open(out_dir / "manifest.json"))
        assert manifest["config"]["trials"] == 2
