import csv
import json

import pytest

from hyprigid.cli import main
from hyprigid.scenario import ConfigError, Scenario, load_config
from hyprigid.surface import load_shape, perturb_sphere, save_shape


def write(path, obj):
    path.write_text(json.dumps(obj, indent=1))
    return path


def scenario(tmp_path, name="s", **kw):
    cfg = {"schema": 1, "name": name, "dimension": 3, "shape": {"kind": "sphere", "rho": 1.0, "band_limit": 0}}
    cfg.update(kw)
    return write(tmp_path / f"{name}.json", cfg)


def verdicts(path):
    return {row["name"]: row["verdict"] for row in csv.DictReader(path.open())}


class TestVerify:
    def test_sphere_all_equalities(self, tmp_path):
        cfg = scenario(tmp_path)
        assert main(["verify", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
        v = verdicts(tmp_path / "s.report.csv")
        assert "fail" not in v.values()
        for name in ("heintze_karcher", "weighted_minkowski_inequality[k=1]", "chain[k=2].closure"):
            assert v[name] == "equality-detected"
        report = json.loads((tmp_path / "s.report.json").read_text())
        assert report["meta"]["tolerances"]["equality_rel"] == 1e-8
        assert report["meta"]["functionals"]["area"] > 0
        assert all(e["anchor"] for e in report["checks"])

    def test_perturbed_strict(self, tmp_path):
        cfg = scenario(tmp_path, "p", shape={"kind": "perturbed", "rho": 1.0, "amplitude": 0.1, "seed": 7})
        assert main(["verify", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
        v = verdicts(tmp_path / "p.report.csv")
        assert "equality-detected" not in v.values() and "fail" not in v.values()

    def test_fail_exit_code(self, tmp_path, monkeypatch):
        from hyprigid import suite
        from hyprigid.reports import FAIL, CheckEntry

        real = suite.run_checks

        def broken(*a, **kw):
            rep = real(*a, **kw)
            rep.add(CheckEntry("injected", 1.0, 2.0, -1.0, -0.5, 1e-10, FAIL, "test"))
            return rep

        monkeypatch.setattr("hyprigid.cli.run_checks", broken)
        cfg = scenario(tmp_path, checks=["heintze_karcher"])
        assert main(["verify", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 2

    def test_k_out_of_range(self, tmp_path, capsys):
        cfg = scenario(tmp_path, k=3)
        assert main(["verify", "--config", str(cfg), "--out", str(tmp_path)]) == 1
        err = capsys.readouterr().err
        assert f"{cfg}:" in err and "k=3" in err

    def test_malformed_json_line_anchored(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text('{"schema": 1,\n "name": "x",\n "dimension": 3,\n "shape": {"kind": "sphere" "rho": 1}}\n')
        assert main(["verify", "--config", str(p)]) == 1
        assert f"{p}:4:" in capsys.readouterr().err

    def test_validation_error_line_anchored(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"schema": 1,\n "name": "x",\n "dimension": 3,\n "shape": {"kind": "sphere",\n  "rho": -1}}\n')
        with pytest.raises(ConfigError, match=r"bad.json:5: shape.sphere.rho"):
            load_config(p, Scenario)

    def test_unknown_field_rejected(self, tmp_path):
        cfg = scenario(tmp_path, colour="red")
        with pytest.raises(ConfigError, match="colour"):
            load_config(cfg, Scenario)

    def test_missing_file(self, tmp_path):
        assert main(["verify", "--config", str(tmp_path / "nope.json")]) == 1

    def test_usage_error(self):
        assert main(["verify"]) == 1
        assert main(["frobnicate"]) == 1

    def test_determinism(self, tmp_path):
        cfg = scenario(tmp_path, "d", shape={"kind": "perturbed", "rho": 1.0, "amplitude": 0.1, "seed": 3})
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            main(["verify", "--config", str(cfg), "--out", str(out), "--quiet"])
        for f in ("d.report.json", "d.report.csv"):
            assert (a / f).read_bytes() == (b / f).read_bytes()

    def test_seed_override(self, tmp_path):
        cfg = scenario(tmp_path, "o", shape={"kind": "perturbed", "rho": 1.0, "amplitude": 0.1, "seed": 3},
                       checks=["minkowski_integral"])
        main(["verify", "--config", str(cfg), "--out", str(tmp_path / "a"), "--quiet"])
        main(["verify", "--config", str(cfg), "--out", str(tmp_path / "b"), "--quiet", "--seed", "4"])
        ja = json.loads((tmp_path / "a" / "o.report.json").read_text())
        jb = json.loads((tmp_path / "b" / "o.report.json").read_text())
        assert ja["meta"]["shape"] != jb["meta"]["shape"]

    def test_file_and_inline_sources(self, tmp_path):
        s = perturb_sphere(1.0, 0.1, 5, 3, 2)
        save_shape(s, tmp_path / "shape.json")
        cfg = scenario(tmp_path, "f", dimension=2, shape={"kind": "file", "path": "shape.json"})
        assert main(["verify", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
        inline = {"kind": "inline", **{k: v for k, v in s.to_dict().items() if k != "dimension"}}
        cfg = scenario(tmp_path, "i", dimension=2, shape=inline)
        assert main(["verify", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
        a = json.loads((tmp_path / "f.report.json").read_text())["checks"]
        b = json.loads((tmp_path / "i.report.json").read_text())["checks"]
        assert a == b


class TestConvergence:
    def test_columns_and_decay(self, tmp_path):
        cfg = scenario(tmp_path, "c", shape={"kind": "perturbed", "rho": 1.0, "amplitude": 0.1, "seed": 7})
        code = main(["convergence", "--config", str(cfg), "--out", str(tmp_path), "--resolutions", "10,20", "--quiet"])
        assert code == 0
        rows = list(csv.DictReader((tmp_path / "c.convergence.csv").open()))
        assert list(rows[0]) == ["resolution", "check", "residual"]
        res = {(int(r["resolution"]), r["check"]): float(r["residual"]) for r in rows}
        assert res[(10, "minkowski_integral[k=1]")] / res[(20, "minkowski_integral[k=1]")] > 10

    def test_sphere_machine_floor(self, tmp_path):
        cfg = scenario(tmp_path, "cs", shape={"kind": "sphere", "rho": 1.0, "band_limit": 4})
        main(["convergence", "--config", str(cfg), "--out", str(tmp_path), "--resolutions", "10,20,40", "--quiet"])
        rows = list(csv.DictReader((tmp_path / "cs.convergence.csv").open()))
        assert max(float(r["residual"]) for r in rows) < 1e-12


class TestProbe:
    def probe_cfg(self, tmp_path, shape, **kw):
        cfg = {"schema": 1, "name": "pr", "dimension": 3, "k": 1, "shape": shape}
        cfg.update(kw)
        return write(tmp_path / "pr.json", cfg)

    def test_sphere_immediate(self, tmp_path):
        cfg = self.probe_cfg(tmp_path, {"kind": "sphere", "rho": 1.0, "band_limit": 4})
        assert main(["probe", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
        res = json.loads((tmp_path / "pr.probe.json").read_text())
        assert res["verdict"] == "sphere-reached" and res["evaluations"] == 1

    def test_perturbed(self, tmp_path):
        cfg = self.probe_cfg(tmp_path, {"kind": "perturbed", "rho": 1.0, "amplitude": 0.1, "seed": 1}, k=2, j=1)
        assert main(["probe", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
        assert (tmp_path / "pr.history.csv").read_text().startswith("iteration,J,radius_spread,defect")

    def test_inconclusive(self, tmp_path):
        cfg = self.probe_cfg(tmp_path, {"kind": "perturbed", "rho": 1.0, "amplitude": 0.1, "seed": 1},
                             max_evaluations=3)
        assert main(["probe", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 3

    def test_negative_radius(self, tmp_path):
        shape = {"kind": "inline", "band_limit": 1, "coefficients": [[0, 0, -1.0]]}
        cfg = self.probe_cfg(tmp_path, shape)
        assert main(["probe", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 1

    def test_bad_indices(self, tmp_path):
        cfg = self.probe_cfg(tmp_path, {"kind": "sphere", "rho": 1.0, "band_limit": 4}, k=2, j=2)
        assert main(["probe", "--config", str(cfg), "--quiet"]) == 1


class TestMakeShape:
    @pytest.mark.parametrize("kind", ["sphere", "perturbed", "off-center"])
    def test_writes_loadable_shape(self, tmp_path, kind):
        out = tmp_path / f"{kind}.json"
        assert main(["make-shape", "--kind", kind, "--dimension", "2", "--seed", "3", "--out", str(out), "--quiet"]) == 0
        s = load_shape(out)
        assert s.dimension == 2

    def test_round_trip_through_cli(self, tmp_path):
        out = tmp_path / "a.json"
        main(["make-shape", "--kind", "perturbed", "--seed", "9", "--out", str(out), "--quiet"])
        s = load_shape(out)
        save_shape(s, tmp_path / "b.json")
        assert (tmp_path / "b.json").read_bytes() == out.read_bytes()
        assert s == perturb_sphere(1.0, 0.1, 9, 4, 3)

    def test_stdout(self, capsys):
        assert main(["make-shape", "--kind", "sphere", "--band-limit", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["band_limit"] == 1
