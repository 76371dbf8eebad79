"""Configuration, drivers, record plumbing and the command line."""

import os

import numpy as np
import pytest

import freqbench.experiments as ex
from freqbench.cli import main as cli_main


def small(kind, **tweaks):
    cfg = ex.default_config(kind)
    cfg.trials = 2
    for key, value in tweaks.items():
        setattr(cfg, key, value)
    return cfg


class TestConfig:
    def test_canonical_round_trip(self):
        for kind in ("tiles", "model-sum", "size-decay"):
            cfg = ex.default_config(kind)
            again = ex.parse_config(ex.canonical_text(cfg))
            assert again == cfg

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown experiment kind"):
            ex.default_config("nope")

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key"):
            ex.parse_config("kind = tiles\nwobble = 3\n")

    def test_kind_required(self):
        with pytest.raises(ValueError, match="must set 'kind'"):
            ex.parse_config("trials = 3\n")

    def test_comments_and_blanks_ignored(self):
        cfg = ex.parse_config("# header\nkind = tiles  # inline\n\ntrials = 9\n")
        assert cfg.kind == "tiles" and cfg.trials == 9

    def test_non_conjugate_triple_needs_flag(self):
        cfg = small("model-sum", exponents=(1.5, 4.0, 4.0))
        with pytest.raises(ValueError, match="scaling identity"):
            ex.validate_config(cfg)
        cfg.allow_non_conjugate = True
        ex.validate_config(cfg)

    def test_conjugate_triple_accepted(self):
        cfg = small("model-sum", exponents=(5 / 3, 4.0, 20 / 3))
        ex.validate_config(cfg)

    def test_bad_scalars_rejected(self):
        for field, value, hint in (((("grid_n", 129, "grid_n"))),
                                   ("alpha", 1.5, "alpha"),
                                   ("theta2", 0.0, "theta"),
                                   ("trials", 0, "trials")):
            cfg = small("tiles")
            setattr(cfg, field, value)
            with pytest.raises(ValueError, match=hint):
                ex.validate_config(cfg)

    def test_hash_ignores_grid_but_not_seed(self):
        a = small("tiles")
        b = small("tiles", grid_n=2 * a.grid_n)
        c = small("tiles", seed=99)
        assert ex.config_hash(a) == ex.config_hash(b)
        assert ex.config_hash(a) != ex.config_hash(c)

    def test_env_override(self, tmp_path, monkeypatch):
        path = tmp_path / "t.cfg"
        path.write_text("kind = tiles\ntrials = 1\n")
        monkeypatch.setenv(ex.GRID_ENV, "512")
        cfg = ex.load_config(str(path))
        assert cfg.grid_n == 512

    def test_seed_override(self, tmp_path):
        path = tmp_path / "t.cfg"
        path.write_text("kind = tiles\nseed = 1\n")
        assert ex.load_config(str(path), seed=42).seed == 42


class TestInputs:
    def test_restricted_input_dominated_by_one(self):
        f = ex.restricted_input(512, 1.0, [(0.1, 0.3), (0.6, 0.62)], 0.02)
        vals = f.values.real
        assert np.abs(f.values.imag).max() < 1e-11
        assert vals.min() > -1e-11 and vals.max() < 1.0 + 1e-11
        assert f.integral().real == pytest.approx(0.22, abs=1e-12)

    def test_restricted_input_refines_exactly(self):
        # same trigonometric polynomial on both grids, so coarse samples
        # reappear among the fine ones
        coarse = ex.restricted_input(512, 32.0, [(4.0, 7.0)], 0.5)
        fine = ex.restricted_input(1024, 32.0, [(4.0, 7.0)], 0.5)
        assert np.abs(fine.values[::2] - coarse.values).max() < 1e-8

    def test_band_noise_confined_and_unit(self):
        rng = np.random.default_rng(5)
        f = ex.band_noise(256, 1.0, 8.0, rng)
        coeffs = f.spectrum()
        ks = np.arange(-128, 128)
        assert np.abs(coeffs[np.abs(ks) > 8]).max() < 1e-14
        assert f.norm() == pytest.approx(1.0, rel=1e-12)

    def test_trial_rng_reproducible(self):
        cfg = small("tiles", seed=11)
        a = ex.trial_rng(cfg, 3).normal(size=4)
        b = ex.trial_rng(cfg, 3).normal(size=4)
        c = ex.trial_rng(cfg, 4).normal(size=4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestDrivers:
    def test_runs_are_deterministic(self):
        r1 = ex.run(small("tiles", trials=4))
        r2 = ex.run(small("tiles", trials=4))
        assert ex.records_digest(r1.records) == ex.records_digest(r2.records)

    def test_tiles_clean(self):
        res = ex.run(small("tiles", trials=4))
        named = {r.metric: r.value for r in res.records}
        assert res.passed
        assert named["violations"] == 0
        assert named["triples_checked"] > 0

    def test_hs_oracle_within_tolerance(self):
        res = ex.run(small("hs-oracle"))
        named = {r.metric: r.value for r in res.records}
        assert res.passed
        for s in (1, 2, 5):
            assert named[f"rel_err_s{s}_max"] < 1e-3
        assert named["identity_rel_max"] < 1e-12

    def test_forest_bessel_bounded(self):
        res = ex.run(small("forest-bessel"))
        named = {r.metric: r.value for r in res.records}
        assert res.passed
        assert 0 < named["bessel_max"] <= 1.0
        assert np.isfinite(named["global_max"])
        assert named["levels_t0c0"] >= 1

    def test_paraproduct_residual_and_foil(self):
        res = ex.run(small("paraproduct"))
        named = {r.metric: r.value for r in res.records}
        assert res.passed
        assert named["telescope_rel_max"] < 1e-10
        # shifting the diagonal couplings by one leaves a visible defect
        assert named["naive_rel_min"] > 1e-4
        assert named["martingale_p2_max"] >= 1.0 - 1e-9

    def test_polygon_scan_overlaps(self):
        res = ex.run(small("polygon-scan", mu_max=4))
        named = {r.metric: r.value for r in res.records}
        assert res.passed
        for i in (1, 2, 3):
            assert named[f"overlap_mu10_i{i}"] == named[f"overlap_mu20_i{i}"] == 2

    def test_model_sum_audits(self):
        res = ex.run(small("model-sum"))
        named = {r.metric: r.value for r in res.records}
        assert res.passed
        assert 0 <= named["audit_ratio_max"] <= 1.0
        assert np.isfinite(named["form_ratio_max"])

    def test_size_decay_rate_positive(self):
        res = ex.run(ex.default_config("size-decay"))
        named = {r.metric: r.value for r in res.records}
        assert res.passed
        assert named["decay_rate"] > 0
        assert named["layer2_size"] < named["layer1_size"] < named["layer0_size"]


class TestRecords:
    def test_round_trip_values_exact(self, tmp_path):
        res = ex.run(small("tiles", trials=3))
        path = tmp_path / "records.csv"
        ex.write_records(str(path), res.records)
        back = ex.read_records(str(path))
        assert [(r.metric, r.value) for r in back] == \
               [(r.metric, r.value) for r in res.records]

    def test_append_keeps_single_header(self, tmp_path):
        res = ex.run(small("tiles", trials=2))
        path = tmp_path / "records.csv"
        ex.write_records(str(path), res.records)
        ex.write_records(str(path), res.records)
        lines = path.read_text().splitlines()
        assert lines.count(ex.CSV_HEADER) == 1
        assert len(lines) == 1 + 2 * len(res.records)

    def test_digest_blind_to_wall_time(self):
        res = ex.run(small("tiles", trials=2))
        slow = [ex.ResultRecord(r.config, r.seed, r.metric, r.value,
                                r.grid_n, r.wall_time + 7.0)
                for r in res.records]
        assert ex.records_digest(slow) == ex.records_digest(res.records)


def write_run(res, outdir):
    os.makedirs(outdir, exist_ok=True)
    ex.write_records(os.path.join(outdir, "records.csv"), res.records)
    ex.write_summary(os.path.join(outdir, "summary.txt"), res)


class TestCompare:
    def test_identical_runs_ok(self, tmp_path):
        res = ex.run(small("tiles", trials=3))
        write_run(res, tmp_path / "a")
        write_run(res, tmp_path / "b")
        rep = ex.compare_runs(str(tmp_path / "a"), str(tmp_path / "b"))
        assert rep.status == "ok" and rep.exit_code == 0
        assert rep.worst_drift == 0.0

    def test_value_drift_breaches(self, tmp_path):
        res = ex.run(small("tiles", trials=3))
        write_run(res, tmp_path / "a")
        bumped = [r if r.metric != "tiles_max" else
                  ex.ResultRecord(r.config, r.seed, r.metric, 2.0 * r.value,
                                  r.grid_n, r.wall_time)
                  for r in res.records]
        write_run(ex.RunResult(res.config, bumped, [], 0.0), tmp_path / "b")
        rep = ex.compare_runs(str(tmp_path / "a"), str(tmp_path / "b"))
        assert rep.status == "drift" and rep.exit_code == 1
        assert any("tiles_max" in msg for msg in rep.breaches)

    def test_small_absolute_changes_floored(self, tmp_path):
        res = ex.run(small("tiles", trials=3))
        write_run(res, tmp_path / "a")
        nudged = [ex.ResultRecord(r.config, r.seed, r.metric,
                                  r.value + 1e-5, r.grid_n, r.wall_time)
                  for r in res.records]
        write_run(ex.RunResult(res.config, nudged, [], 0.0), tmp_path / "b")
        rep = ex.compare_runs(str(tmp_path / "a"), str(tmp_path / "b"))
        assert rep.status == "ok"

    def test_missing_metric_breaches(self, tmp_path):
        res = ex.run(small("tiles", trials=3))
        write_run(res, tmp_path / "a")
        write_run(ex.RunResult(res.config, res.records[:-1], [], 0.0),
                  tmp_path / "b")
        rep = ex.compare_runs(str(tmp_path / "a"), str(tmp_path / "b"))
        assert rep.status == "drift"
        assert any("only one run" in msg for msg in rep.breaches)

    def test_seed_change_requests_rebaseline(self, tmp_path):
        write_run(ex.run(small("tiles", trials=3, seed=0)), tmp_path / "a")
        write_run(ex.run(small("tiles", trials=3, seed=1)), tmp_path / "b")
        rep = ex.compare_runs(str(tmp_path / "a"), str(tmp_path / "b"))
        assert rep.status == "rebaseline" and rep.exit_code == 0

    def test_other_config_change_is_mismatch(self, tmp_path):
        write_run(ex.run(small("tiles", trials=3)), tmp_path / "a")
        write_run(ex.run(small("tiles", trials=4)), tmp_path / "b")
        rep = ex.compare_runs(str(tmp_path / "a"), str(tmp_path / "b"))
        assert rep.status == "mismatch" and rep.exit_code == 2
        assert any("trials" in msg for msg in rep.breaches)

    def test_grid_doubling_is_comparable(self, tmp_path):
        write_run(ex.run(small("forest-bessel", grid_n=512)), tmp_path / "a")
        write_run(ex.run(small("forest-bessel", grid_n=1024)), tmp_path / "b")
        rep = ex.compare_runs(str(tmp_path / "a"), str(tmp_path / "b"))
        assert rep.status == "ok"
        assert rep.worst_drift < 1e-6


class TestCli:
    def test_list_exits_zero(self, capsys):
        assert cli_main(["list-experiments"]) == 0
        out = capsys.readouterr().out
        for kind, _ in ex.experiment_kinds():
            assert kind in out

    def test_run_writes_artifacts(self, tmp_path, capsys):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("kind = tiles\ntrials = 2\n")
        out = tmp_path / "run"
        assert cli_main(["run", "--config", str(cfg),
                         "--out", str(out)]) == 0
        assert (out / "records.csv").exists()
        assert (out / "summary.txt").exists()
        assert "passed = true" in capsys.readouterr().out

    def test_run_invalid_config_exits_two(self, tmp_path, capsys):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("kind = model-sum\nexponents = 1.5, 4, 4\ntrials = 1\n")
        assert cli_main(["run", "--config", str(cfg),
                         "--out", str(tmp_path / "x")]) == 2
        assert "scaling identity" in capsys.readouterr().err

    def test_compare_flow(self, tmp_path):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("kind = tiles\ntrials = 2\n")
        for name in ("a", "b"):
            assert cli_main(["run", "--config", str(cfg),
                             "--out", str(tmp_path / name)]) == 0
        assert cli_main(["compare", str(tmp_path / "a"),
                         str(tmp_path / "b")]) == 0

    def test_compare_missing_dir_exits_two(self, tmp_path, capsys):
        assert cli_main(["compare", str(tmp_path / "no"),
                         str(tmp_path / "pe")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_seed_flag_changes_records(self, tmp_path):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("kind = tiles\ntrials = 2\n")
        cli_main(["run", "--config", str(cfg), "--seed", "5",
                  "--out", str(tmp_path / "a")])
        recs = ex.read_records(str(tmp_path / "a" / "records.csv"))
        assert all(r.seed == 5 for r in recs)
