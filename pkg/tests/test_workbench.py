import copy
import json
from importlib import resources

import numpy as np
import pytest

from graysid import io
from graysid import workbench as wb
from graysid.cli import main
from graysid.config import ConfigError, ExperimentConfig, builtin_configs, load_config
from graysid.figures import Figure
from graysid.regions import critical_zeta


def raw(name="second_order"):
    return json.loads((resources.files("graysid") / "configs" / f"{name}.json").read_text())


def cfg_from(obj, **over):
    return ExperimentConfig.from_dict(obj).with_overrides(**over)


def read_svg_points(svg_text):
    import re
    return re.findall(r'points="([^"]+)"', svg_text)


class TestConfig:
    def test_builtins(self):
        assert builtin_configs() == ["fourth_order", "second_order", "second_order_priors"]
        cfg = load_config("second_order")
        assert cfg.samples == 134
        assert [c.name for c in cfg.cases] == ["inner", "conservative"]
        assert load_config("fourth_order").samples == 400

    def test_case_defaults_merge(self):
        cfg = load_config("second_order_priors")
        assert all(c.regions.overshoot == "conservative" and c.regions.conic for c in cfg.cases)

    @pytest.mark.parametrize("mutate, match", [
        (lambda o: o.update(version=2), "version"),
        (lambda o: o.update(bogus=1), "bogus"),
        (lambda o: o.update(ts=-0.1), "ts"),
        (lambda o: o["plant"].pop("den"), "den"),
        (lambda o: o.update(plant={"model_file": "/nonexistent.json"}), "not found"),
        (lambda o: o["cases"].append({"name": "inner"}), "duplicate"),
        (lambda o: o["cases"].append({"name": "unconstrained"}), "reserved"),
        (lambda o: o.update(montecarlo={"runs": 0}), "runs"),
        (lambda o: o.update(seed=-3), "seed"),
        (lambda o: o["excitation"].update(bits=40), "bits"),
    ])
    def test_rejects(self, mutate, match):
        obj = raw()
        mutate(obj)
        with pytest.raises(ConfigError, match=match):
            ExperimentConfig.from_dict(obj)

    def test_unknown_name(self):
        with pytest.raises(ConfigError):
            load_config("sec99")

    def test_model_file_plant(self, tmp_path):
        cfg = load_config("second_order")
        io.write_model(tmp_path / "plant.json", cfg.plant)
        obj = raw()
        obj["plant"] = {"model_file": "plant.json"}
        path = tmp_path / "c.json"
        path.write_text(json.dumps(obj))
        back = load_config(path)
        np.testing.assert_allclose(back.plant.a, cfg.plant.a)

    def test_overrides(self):
        cfg = load_config("second_order").with_overrides(seed=7, runs=3, workers=2)
        assert (cfg.seed, cfg.runs, cfg.workers) == (7, 3, 2)
        with pytest.raises(ConfigError):
            cfg.with_overrides(runs=0)


class TestSeeds:
    def test_spawned_seeds_are_stable(self):
        cfg = load_config("second_order")
        assert wb.run_seeds(cfg, 5)[:3] == wb.run_seeds(cfg, 3)
        assert len(set(wb.run_seeds(cfg, 50))) == 50

    def test_step_snr(self):
        cfg = load_config("second_order")
        noisy, clean = wb.step_test(cfg)
        noise = noisy.y[:, 0] - clean.y[:, 0]
        snr = 10 * np.log10(np.var(clean.y[:, 0]) / np.var(noise))
        assert snr == pytest.approx(5.0, abs=1e-9)


class TestPipeline:
    def test_region_stage_error(self, tmp_path):
        obj = raw()
        obj["cases"] = [{"name": "empty", "regions": {}}]
        with pytest.raises(wb.StageError) as exc:
            wb.run_pipeline(ExperimentConfig.from_dict(obj), tmp_path, figures=False)
        assert exc.value.stage == "region"

    @staticmethod
    def infeasible_config():
        # a disk of radius e^-12 cannot carry margin 0.01 with P bounded by 100 I
        obj = raw()
        obj["priors"] = {"mode": "given", "estimates": [{"wd": 1.27, "zeta_wn": 40.0}]}
        obj["cases"] = [{"name": "clash", "regions": {"conic": True, "settling": True}}]
        obj["solver"]["margin"] = 0.01
        return obj

    def test_infeasible(self, tmp_path):
        cfg = ExperimentConfig.from_dict(self.infeasible_config())
        with pytest.raises(wb.InfeasibleError):
            wb.run_pipeline(cfg, tmp_path, figures=False)
        assert io.read_json(tmp_path / "summary.json")["infeasible"] == ["clash"]

    def test_infeasible_exit_code(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(self.infeasible_config()))
        assert main(["pipeline", "--config", str(p), "--out", str(tmp_path / "o")]) == 4

    def test_byte_identical(self, tmp_path):
        cfg = load_config("second_order")
        a = wb.run_pipeline(cfg, tmp_path / "a")
        b = wb.run_pipeline(cfg, tmp_path / "b")
        assert a["files"] == b["files"]
        for f in a["files"]:
            if f == "summary.json":
                continue
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f

    def test_artifacts_and_verification(self, tmp_path):
        cfg = load_config("second_order")
        summary = wb.run_pipeline(cfg, tmp_path)
        for name in ("config.json", "identification_data.csv", "model_unconstrained.json",
                     "singular_values.csv", "step_test.csv", "features.json", "validation.json",
                     "zplane.svg", "zplane.csv", "bode.svg", "step_test.svg"):
            assert (tmp_path / name).is_file(), name
        for case in ("inner", "conservative"):
            d = tmp_path / "cases" / case
            ver = io.read_json(d / "verification.json")
            assert ver["ok"]
            region = io.read_region(d / "region.json")
            model = io.read_model(d / "model.json")
            assert np.all(region.contains(model.poles(), 1e-6))
        assert summary["infeasible"] == []
        rec = io.read_signal(tmp_path / "identification_data.csv")
        assert len(rec) == 134

    def test_single_run_matches_pipeline(self, tmp_path):
        cfg = load_config("second_order")
        wb.run_pipeline(cfg, tmp_path, figures=False)
        rep = wb.run_montecarlo(cfg, runs=1)
        unc = io.read_model(tmp_path / "model_unconstrained.json")
        np.testing.assert_allclose(np.sort_complex(rep.unconstrained[0]), np.sort_complex(unc.poles()), atol=1e-10)
        for case in rep.cases:
            m = io.read_model(tmp_path / "cases" / case / "model.json")
            np.testing.assert_allclose(np.sort_complex(rep.constrained[case][0]),
                                       np.sort_complex(m.poles()), atol=1e-8)

    def test_workers_invariance(self):
        cfg = load_config("second_order")
        one = wb.run_montecarlo(cfg, runs=4, workers=1)
        two = wb.run_montecarlo(cfg, runs=4, workers=2)
        assert one.seeds == two.seeds
        for a, b in zip(one.unconstrained, two.unconstrained):
            np.testing.assert_array_equal(a, b)
        assert one.aggregate() == two.aggregate()

    def test_montecarlo_outputs(self, tmp_path):
        cfg = load_config("second_order")
        rep = wb.run_montecarlo(cfg, runs=3)
        files = wb.write_montecarlo(cfg, rep, tmp_path)
        names = {p.name for p in files}
        assert {"report.json", "eigenvalues.csv", "membership.csv", "step_bands.csv",
                "zplane.svg", "step_bands_figure.svg"} <= names
        header, rows = io.read_csv(tmp_path / "membership.csv")
        assert len(rows) == 3 * len(rep.cases)
        agg = io.read_json(tmp_path / "report.json")["aggregate"]
        assert agg["runs"] == 3

    def test_report_consistency_check(self):
        with pytest.raises(ValueError):
            wb.MonteCarloReport([1, 2], [None], [None, None], {}, {}, {}, {}, np.zeros(2))


class TestFigures:
    def test_csv_matches_svg(self, tmp_path):
        fig = Figure("t").line("a", [0, 1, 2], [0, 1, 4]).markers("b", [1], [2], marker="cross")
        svg, csv_ = fig.write(tmp_path / "f.svg")
        header, rows = io.read_csv(csv_)
        assert header == ["series", "kind", "index", "x", "y", "y2"]
        assert [(r[0], float(r[3]), float(r[4])) for r in rows] == \
            [("a", 0.0, 0.0), ("a", 1.0, 1.0), ("a", 2.0, 4.0), ("b", 1.0, 2.0)]
        # polyline has one vertex per CSV row of the line series
        pts = read_svg_points(svg.read_text())[0].split()
        assert len(pts) == 3

    def test_gallery_panels(self):
        figs = dict(wb.region_gallery([0.1, 0.5, 0.9], ts=0.3, wds=[1.27], zeta_wns=[0.5]))
        assert set(figs) == {"circles", "inner_ellipses", "conservative_ellipses", "conic_settling"}

    def test_gallery_errors(self):
        with pytest.raises(ValueError):
            wb.region_gallery([])
        with pytest.raises(ValueError):
            wb.region_gallery([], wds=[1.0])

    def test_critical_zeta_degenerates(self):
        zc = critical_zeta()
        figs = dict(wb.region_gallery([zc], points=181))
        circ = [s for s in figs["circles"].series if s.name.startswith("circle")][0]
        ell = [s for s in figs["inner_ellipses"].series if s.name.startswith("inner ellipse")][0]
        np.testing.assert_allclose(circ.x, ell.x, atol=1e-9)
        np.testing.assert_allclose(circ.y, ell.y, atol=1e-9)


class TestCli:
    def test_gallery(self, tmp_path):
        assert main(["gallery", "--zeta", "0.1", "0.5", "0.9", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "conservative_ellipses.csv").is_file()

    def test_gallery_empty(self, tmp_path):
        assert main(["gallery", "--out", str(tmp_path)]) == 2

    def test_bad_config(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"version": 1, "ts": 0.3}')
        assert main(["pipeline", "--config", str(p), "--out", str(tmp_path / "o")]) == 2

    def test_region_stage(self, tmp_path):
        obj = raw()
        obj["cases"] = [{"name": "empty", "regions": {}}]
        p = tmp_path / "c.json"
        p.write_text(json.dumps(obj))
        assert main(["pipeline", "--config", str(p), "--out", str(tmp_path / "o")]) == 3

    def test_region_command(self, tmp_path):
        rc = main(["region", "--ts", "0.05", "--zeta-wn-min", "0.48", "--settling",
                   "--out", str(tmp_path), "--format", "json"])
        assert rc == 0
        files = list(tmp_path.rglob("*.json"))
        assert files
        reg = io.read_region(files[0])
        assert reg.shapes[0]["r"] == pytest.approx(0.976286, abs=1e-6)

    def test_pipeline_and_constrain(self, tmp_path):
        out = tmp_path / "p"
        assert main(["pipeline", "--config", "second_order", "--out", str(out), "--format", "csv"]) == 0
        model = out / "model_unconstrained.json"
        region = out / "cases" / "conservative" / "region.json"
        assert main(["constrain", "--model", str(model), "--region", str(region),
                     "--out", str(tmp_path / "c"), "--format", "json"]) == 0

    def test_montecarlo(self, tmp_path):
        assert main(["montecarlo", "--config", "second_order", "--runs", "2", "--out", str(tmp_path),
                     "--format", "csv"]) == 0
        assert (tmp_path / "membership.csv").is_file()
