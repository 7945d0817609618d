"""Tests for configuration parsing, file formats, and the CLI."""

import json
import math
import os

import numpy as np
import pytest

from chbesov import cli
from chbesov import config as cf
from chbesov import io as cio
from chbesov import model as md
from chbesov import stepping as st


def minimal_config(**extra):
    doc = {
        "grid": {"n_modes": 64},
        "time": {"t_end": 0.5},
        "initial": {
            "m": {"type": "cosine", "amplitude": 1.0},
            "n": {"type": "cosine", "amplitude": 1.0},
        },
    }
    doc.update(extra)
    return doc


class TestParseConfig:
    def test_defaults_filled(self):
        cfg = cf.parse_config(json.dumps(minimal_config()))
        assert cfg.n_modes == 64
        assert cfg.t_end == 0.5
        assert cfg.cfl == 0.4
        assert cfg.dt_max == 0.01
        assert cfg.series_every == 1
        assert cfg.snapshot_every == 0
        assert cfg.form == "nonlocal"
        assert cfg.lam is None
        assert cfg.alpha_spec == {"type": "constant", "value": 1.0}
        assert cfg.gamma_spec == {"type": "zero"}
        assert cfg.lp_filter == "smooth"
        assert cfg.constant_c == 1.0
        assert cfg.epsilon == 0.25
        assert cfg.r == 2.0
        assert cfg.overrides == {}
        assert cfg.output_dir == "run"

    def test_all_errors_collected_with_paths(self):
        doc = {
            "grid": {"n_modes": 30},
            "time": {"cfl": 2.0},
            "model": {"form": "damped_forq"},
            "initial": {"m": {"type": "cosine"}},
            "extra": {"x": 1},
        }
        with pytest.raises(cf.ConfigError) as err:
            cf.parse_config(json.dumps(doc))
        messages = err.value.errors
        joined = "\n".join(messages)
        for needle in ("grid.n_modes", "time.t_end", "time.cfl",
                       "model.lambda", "initial.n", "extra"):
            assert needle in joined
        assert len(messages) == 6

    def test_odd_n_modes_rejected(self):
        doc = minimal_config(grid={"n_modes": 65})
        with pytest.raises(cf.ConfigError, match="even"):
            cf.parse_config(json.dumps(doc))

    def test_lambda_forbidden_for_nonlocal(self):
        doc = minimal_config(model={"form": "nonlocal", "lambda": 1.0})
        with pytest.raises(cf.ConfigError, match="model.lambda"):
            cf.parse_config(json.dumps(doc))

    def test_damped_form_parses(self):
        doc = minimal_config(model={"form": "damped_sqq", "lambda": 2.5})
        cfg = cf.parse_config(json.dumps(doc))
        assert cfg.form == "damped_sqq"
        assert cfg.lam == 2.5
        assert isinstance(cfg.dynamics(), md.DampedDynamics)

    def test_unknown_key_inside_spec(self):
        doc = minimal_config(
            coefficients={"alpha": {"type": "constant", "value": 1.0, "frequency": 2}}
        )
        with pytest.raises(cf.ConfigError, match="coefficients.alpha.frequency"):
            cf.parse_config(json.dumps(doc))

    def test_bad_modes_shape(self):
        doc = minimal_config()
        doc["initial"]["m"] = {"type": "fourier_modes", "modes": [[1, 2.0]]}
        with pytest.raises(cf.ConfigError, match="initial.m.modes"):
            cf.parse_config(json.dumps(doc))

    def test_harness_r_inf_string(self):
        doc = minimal_config(harness={"r": "inf"})
        assert cf.parse_config(json.dumps(doc)).r == math.inf

    def test_harness_r_rejects_other_values(self):
        doc = minimal_config(harness={"r": 3})
        with pytest.raises(cf.ConfigError, match="harness.r"):
            cf.parse_config(json.dumps(doc))

    def test_override_keys_validated(self):
        doc = minimal_config(harness={"overrides": {"critical": 2.0, "bogus": 1.0}})
        with pytest.raises(cf.ConfigError, match="harness.overrides.bogus"):
            cf.parse_config(json.dumps(doc))

    def test_epsilon_window(self):
        doc = minimal_config(harness={"epsilon": 0.5})
        with pytest.raises(cf.ConfigError, match="harness.epsilon"):
            cf.parse_config(json.dumps(doc))

    def test_invalid_json(self):
        with pytest.raises(cf.ConfigError, match="invalid JSON"):
            cf.parse_config("{not json")

    def test_top_level_must_be_mapping(self):
        with pytest.raises(cf.ConfigError, match="top level"):
            cf.parse_config("[1, 2]")

    def test_builders(self):
        cfg = cf.parse_config(json.dumps(minimal_config()))
        integ = cfg.integrator()
        assert isinstance(integ, st.IntegratorConfig)
        assert integ.t_end == 0.5
        bank = cfg.filter_bank()
        assert bank.n_modes == 64
        state = cfg.initial()
        assert state.n_modes == 64
        assert isinstance(cfg.dynamics(), md.NonlocalDynamics)

    def test_zero_initial_type(self):
        doc = minimal_config()
        doc["initial"] = {"m": {"type": "zero"}, "n": {"type": "zero"}}
        state = cf.parse_config(json.dumps(doc)).initial()
        assert np.all(state.m.coeffs == 0)

    def test_output_root_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cf.ENV_OUTPUT_ROOT, str(tmp_path))
        cfg = cf.parse_config(json.dumps(minimal_config(output={"directory": "abc"})))
        assert cfg.resolved_output_dir() == str(tmp_path / "abc")
        absolute = str(tmp_path / "elsewhere")
        cfg2 = cf.parse_config(json.dumps(minimal_config(output={"directory": absolute})))
        assert cfg2.resolved_output_dir() == absolute


class TestSeriesIO:
    def test_empty_series_is_header_only(self, tmp_path):
        path = tmp_path / "series.csv"
        cio.write_series(st.TimeSeries(), str(path))
        text = path.read_text()
        assert text == ",".join(st.SERIES_COLUMNS) + "\n"
        assert len(cio.read_series(str(path))) == 0

    def test_round_trip_is_lossless(self, tmp_path):
        rng = np.random.default_rng(5)
        ts = st.TimeSeries()
        for _ in range(7):
            row = {}
            for i, c in enumerate(st.SERIES_COLUMNS):
                v = rng.standard_normal() * 10.0 ** rng.integers(-300, 300)
                row[c] = float(v)
            ts.record(**row)
        path = tmp_path / "series.csv"
        cio.write_series(ts, str(path))
        back = cio.read_series(str(path))
        for c in st.SERIES_COLUMNS:
            assert back.data[c] == ts.data[c]

    def test_header_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError, match="header"):
            cio.read_series(str(path))

    def test_short_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(st.SERIES_COLUMNS) + "\n1,2\n")
        with pytest.raises(ValueError, match="columns"):
            cio.read_series(str(path))


class TestSnapshotIO:
    def test_round_trip(self, tmp_path):
        state = md.State(
            md.fourier_modes_field(32, [(1, 1.3, 0.2)]),
            md.fourier_modes_field(32, [(2, 0.7, 1.1)]),
        )
        path = tmp_path / "snap.json"
        cio.write_snapshot(state, 0.375, str(path))
        t, back = cio.read_snapshot(str(path))
        assert t == 0.375
        assert np.array_equal(back.m.coeffs, state.m.coeffs)
        assert np.array_equal(back.n.coeffs, state.n.coeffs)

    def test_text_rendering(self):
        state = md.State(md.cosine_field(32), md.cosine_field(32))
        text = cio.render_snapshot_text(state, 0.25)
        lines = text.strip().split("\n")
        assert lines[0].startswith("# t = 0.25")
        assert len(lines) == 3 + 32

    def test_rejects_non_snapshot_document(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"hello": 1}')
        with pytest.raises(ValueError, match="snapshot"):
            cio.read_snapshot(str(path))


class TestCli:
    def write_config(self, tmp_path, doc, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    def quick_doc(self, directory, n_modes=32, t_end=0.1):
        return {
            "grid": {"n_modes": n_modes},
            "time": {"t_end": t_end, "dt_max": 0.01, "series_every": 2},
            "initial": {
                "m": {"type": "cosine", "amplitude": 1.0},
                "n": {"type": "cosine", "amplitude": 1.0},
            },
            "output": {"directory": directory},
        }

    def test_simulate_success(self, tmp_path, capsys):
        doc = self.quick_doc(str(tmp_path / "out"))
        code = cli.main(["simulate", self.write_config(tmp_path, doc)])
        assert code == 0
        out = capsys.readouterr().out
        assert "status: completed" in out
        for name in ("manifest.json", "series.csv", "snapshot_initial.json",
                     "snapshot_final.json"):
            assert (tmp_path / "out" / name).exists()
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["status"] == "completed"
        assert manifest["bounds"]["f0"] > 0

    def test_simulate_validation_failure(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"grid": {"n_modes": 30}}')
        code = cli.main(["simulate", str(path)])
        assert code == 1
        err = capsys.readouterr().err
        assert "grid.n_modes" in err
        assert "time.t_end" in err

    def test_simulate_blowup_exit_code(self, tmp_path, capsys):
        doc = {
            "grid": {"n_modes": 128},
            "time": {"t_end": 1.0, "dt_max": 0.005},
            "initial": {
                "m": {"type": "cosine", "amplitude": 60.0},
                "n": {"type": "fourier_modes",
                      "modes": [[1, 50.0, 0.4], [2, 25.0, 0.0]]},
            },
            "output": {"directory": str(tmp_path / "blow")},
        }
        code = cli.main(["simulate", self.write_config(tmp_path, doc)])
        assert code == 3
        manifest = json.loads((tmp_path / "blow" / "manifest.json").read_text())
        assert manifest["status"] == "blowup_detected"
        assert manifest["t_star_num"] is not None
        assert manifest["calibration"]["consistent"] is True
        # outputs are complete despite the early stop
        assert (tmp_path / "blow" / "series.csv").exists()
        assert (tmp_path / "blow" / "snapshot_final.json").exists()

    def test_simulate_deterministic(self, tmp_path):
        doc1 = self.quick_doc(str(tmp_path / "a"))
        doc2 = self.quick_doc(str(tmp_path / "b"))
        assert cli.main(["simulate", self.write_config(tmp_path, doc1, "c1.json")]) == 0
        assert cli.main(["simulate", self.write_config(tmp_path, doc2, "c2.json")]) == 0
        assert (tmp_path / "a" / "series.csv").read_bytes() == \
            (tmp_path / "b" / "series.csv").read_bytes()
        ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
        mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
        for k in ("created", "finished"):
            ma.pop(k), mb.pop(k)
        ma["config"]["output"] = mb["config"]["output"] = None
        assert ma == mb

    def test_analyze_snapshot(self, tmp_path, capsys):
        doc = self.quick_doc(str(tmp_path / "out"))
        cli.main(["simulate", self.write_config(tmp_path, doc)])
        capsys.readouterr()
        snap = str(tmp_path / "out" / "snapshot_initial.json")
        code = cli.main(["analyze", snap, "--s", "0.5", "--p", "2", "--r", "1"])
        assert code == 0
        out = capsys.readouterr().out
        assert "B^0.5_{2,1}(m)" in out
        # initial data is cos with amplitude 1: norm 1/2 in this scale
        value = float(out.split("B^0.5_{2,1}(m) = ")[1].split("\n")[0])
        assert value == pytest.approx(0.5, rel=1e-10)

    def test_analyze_accepts_inf_axes(self, tmp_path, capsys):
        doc = self.quick_doc(str(tmp_path / "out"))
        cli.main(["simulate", self.write_config(tmp_path, doc)])
        capsys.readouterr()
        snap = str(tmp_path / "out" / "snapshot_final.json")
        code = cli.main(["analyze", snap, "--s", "0", "--p", "inf", "--r", "inf",
                         "--homogeneous"])
        assert code == 0
        assert "hB^0_{inf,inf}" in capsys.readouterr().out

    def test_bounds_zero_data(self, tmp_path, capsys):
        doc = self.quick_doc(str(tmp_path / "out"))
        doc["initial"] = {"m": {"type": "zero"}, "n": {"type": "zero"}}
        code = cli.main(["bounds", self.write_config(tmp_path, doc)])
        assert code == 0
        out = capsys.readouterr().out
        assert "lifespan" in out
        stored = json.loads((tmp_path / "out" / "bounds.json").read_text())
        assert stored["lifespan"] == "inf"
        assert stored["blowup_critical"] == "inf"
        assert stored["f0"] == 0.0
        assert stored["blowup_noncritical"] == pytest.approx(1.0 / (8.0 * math.e**6))

    def test_equivalence_line(self, tmp_path, capsys):
        doc = self.quick_doc(str(tmp_path / "out"), n_modes=32, t_end=0.25)
        doc["time"]["dt_max"] = 0.005
        doc["model"] = {"form": "damped_forq", "lambda": 1.0}
        code = cli.main(["equivalence", self.write_config(tmp_path, doc),
                         "--lambda", "1.0"])
        assert code == 0
        out = capsys.readouterr().out
        disc = float(out.split("max discrepancy: ")[1])
        assert disc < 1e-6

    def test_iterate(self, tmp_path, capsys):
        doc = self.quick_doc(str(tmp_path / "out"), t_end=0.1)
        code = cli.main(["iterate", self.write_config(tmp_path, doc), "--k", "4"])
        assert code == 0
        out = capsys.readouterr().out
        assert "k=4" in out
        csv_path = tmp_path / "out" / "iterates.csv"
        lines = csv_path.read_text().strip().split("\n")
        assert lines[0] == "k,x12_sup_norm,diff_from_previous"
        assert len(lines) == 5

    def test_iterate_rejects_damped_form(self, tmp_path, capsys):
        doc = self.quick_doc(str(tmp_path / "out"))
        doc["model"] = {"form": "damped_forq", "lambda": 1.0}
        code = cli.main(["iterate", self.write_config(tmp_path, doc)])
        assert code == 1
        assert "nonlocal" in capsys.readouterr().err

    def test_probe_inequalities(self, capsys):
        code = cli.main(["probe-inequalities", "--trials", "8", "--seed", "3",
                         "--n-modes", "64"])
        assert code == 0
        out = capsys.readouterr().out
        for name in ("moser", "endpoint", "log_interp", "real_interp", "commutator"):
            assert f"{name}: C_emp =" in out

    def test_continuity_output(self, tmp_path, capsys):
        doc = self.quick_doc(str(tmp_path / "out"), n_modes=64, t_end=0.2)
        code = cli.main(["continuity", self.write_config(tmp_path, doc),
                         "--deltas", "1e-2,1e-3"])
        assert code == 0
        out = capsys.readouterr().out
        assert "log-log slope" in out
        rows = [line for line in out.split("\n") if line.startswith("1.000e-")]
        assert len(rows) == 2

    def test_continuity_rejects_bad_deltas(self, tmp_path, capsys):
        doc = self.quick_doc(str(tmp_path / "out"))
        code = cli.main(["continuity", self.write_config(tmp_path, doc),
                         "--deltas", "-1"])
        assert code == 1

    def test_usage_error_exits_via_argparse(self):
        with pytest.raises(SystemExit):
            cli.main([])

    def test_missing_config_file(self, capsys):
        code = cli.main(["simulate", "/nonexistent/nowhere.json"])
        assert code == 1
        assert "cannot read" in capsys.readouterr().err
