import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tzitzeica import cli
from tzitzeica.config import SCHEMA, default_config, help_text, parse_config, parse_lines
from tzitzeica.csvio import fmt, read_csv, write_csv
from tzitzeica.errors import ConfigError


def write_config(tmp_path, *lines):
    p = tmp_path / "run.cfg"
    p.write_text("\n".join(lines) + "\n")
    return str(p)


def run(tmp_path, command, *lines):
    out = tmp_path / "out"
    return cli.main([command, "-c", write_config(tmp_path, *lines), "-o", str(out)]), out


class TestConfig:
    def test_empty_file_gives_defaults(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, "# nothing", ""))
        ref = default_config()
        assert dataclasses.replace(cfg, workers=1) == dataclasses.replace(ref, workers=1)
        assert cfg.compare.times == (20.0, 30.0, 40.0, 50.0)
        assert cfg.pde_config.time_step == pytest.approx(0.018)

    def test_time_step_follows_dx(self):
        cfg = parse_lines(["pde.dx = 0.01"])
        assert cfg.pde_config.time_step == pytest.approx(0.009)

    def test_bad_value_names_key_and_line(self):
        with pytest.raises(ConfigError) as info:
            parse_lines(["grid.count = 100", "grid.lambda_max = -1"])
        assert info.value.key == "grid.lambda_max"
        assert info.value.line == 2
        assert "grid.lambda_max" in str(info.value) and "line 2" in str(info.value)

    @pytest.mark.parametrize("lines,key,line", [
        (["", "foo.bar = 1"], "foo.bar", 2),
        (["pde.dx = 0.02", "pde.dx = 0.01"], "pde.dx", 2),
        (["pde.dx = abc"], "pde.dx", 1),
        (["pde.cfl = 1.5"], "pde.cfl", 1),
        (["grid.lambda_min = 5", "grid.lambda_max = 2"], "grid.lambda_max", 2),
        (["compare.times = 20, 60", "pde.t_max = 50"], "compare.times", 1),
        (["data.kind = file"], "data.file", None),
    ])
    def test_errors(self, lines, key, line):
        with pytest.raises(ConfigError) as info:
            parse_lines(lines)
        assert info.value.key == key
        assert info.value.line == line

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_lines(["just words"])

    def test_help_lists_every_key(self):
        text = help_text()
        for k in SCHEMA:
            line = next(ln for ln in text.splitlines() if ln.strip().startswith(k.name + " "))
            assert f"[{k.unit}]" in line
            assert (k.default or '""') in line

    def test_auto_values(self):
        cfg = parse_lines(["parallel.workers = 3", "data.x_max = auto"])
        assert cfg.workers == 3 and cfg.data.x_max is None

    @given(st.floats(1e-3, 0.5))
    def test_float_round_trip(self, dx):
        assert parse_lines([f"pde.dx = {fmt(dx)}"]).pde.dx == dx


class TestCsv:
    @given(st.floats(allow_nan=False))
    def test_fmt_round_trip(self, v):
        assert float(fmt(v)) == v

    def test_mixed_columns(self, tmp_path):
        p = write_csv(tmp_path / "a.csv", ["a", "b", "c"], [[1.5, 2.0], ["I", "IV"], [True, False]])
        c = read_csv(p)
        assert np.array_equal(c["a"], [1.5, 2.0])
        assert c["b"] == ["I", "IV"]
        assert np.array_equal(c["c"], [1.0, 0.0])

    def test_unequal_columns(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "a.csv", ["a", "b"], [[1.0], [1.0, 2.0]])


class TestExitCodes:
    def test_help(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["--help"])
        assert info.value.code == 0
        out = capsys.readouterr().out
        assert "exit codes" in out and "pde.dx" in out

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as info:
            cli.main(["bogus"])
        assert info.value.code == cli.EXIT_CONFIG

    def test_missing_config(self, tmp_path):
        assert cli.main(["scatter", "-c", str(tmp_path / "none.cfg")]) == cli.EXIT_CONFIG

    def test_config_error(self, tmp_path, capsys):
        code, _ = run(tmp_path, "scatter", "grid.lambda_max = -1")
        assert code == cli.EXIT_CONFIG
        assert "line 1: key 'grid.lambda_max'" in capsys.readouterr().err

    def test_numerical_error(self, tmp_path, capsys):
        code, _ = run(tmp_path, "scatter", "data.x_max = 3")
        assert code == cli.EXIT_NUMERIC
        assert "stage 'data' failed" in capsys.readouterr().err

    def test_scatter_zero_data(self, tmp_path):
        code, out = run(tmp_path, "scatter", "data.kind = zero", "grid.count = 8")
        assert code == cli.EXIT_OK
        c = read_csv(out / "reflection.csv")
        assert c["lambda"].size == 16
        assert not np.any(c["abs_r"])
        assert not np.any(c["det_residual"])

    def test_evolve(self, tmp_path):
        code, out = run(tmp_path, "evolve", "compare.times = 2, 4")
        assert code == cli.EXIT_OK
        snaps = read_csv(out / "snapshots.csv")
        assert snaps["file"] == ["field_t2.csv", "field_t4.csv"]
        f = read_csv(out / "field_t4.csv")
        assert set(f) == {"x", "u", "ut"}

    def test_asymptotics_zero_data(self, tmp_path):
        code, out = run(tmp_path, "asymptotics", "data.kind = zero", "grid.count = 8",
                        "compare.times = 10")
        assert code == cli.EXIT_OK
        c = read_csv(out / "asymptotic_t10.csv")
        assert not np.any(c["u_asym"])
        assert c["x"].max() == pytest.approx(15.0)

    def test_validation_failure(self, tmp_path):
        code, out = run(tmp_path, "compare", "grid.count = 40", "compare.times = 4, 6, 8",
                        "compare.rel_rms_bound = 1e-9")
        assert code == cli.EXIT_VALIDATION
        assert (out / "report.csv").exists()


@pytest.mark.slow
class TestDefaults:
    def test_compare(self, tmp_path):
        code = cli.main(["compare", "-o", str(tmp_path)])
        assert code == cli.EXIT_OK
        fit = read_csv(tmp_path / "fit.csv")
        assert fit["exponent_ok"][0] == 1.0
        rep = read_csv(tmp_path / "report.csv")
        assert list(rep["t"]) == [20.0, 30.0, 40.0, 50.0]
        assert all(math.isfinite(v) for v in rep["rel_rms"])

    def test_validate(self, tmp_path):
        assert cli.main(["validate", "-o", str(tmp_path)]) == cli.EXIT_OK
        c = read_csv(tmp_path / "validation.csv")
        assert np.all(c["passed"] == 1.0)
        assert len(c["check"]) >= 20
