import logging
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from darkcqed.cli import (
    PRESETS,
    ConfigError,
    Grid,
    ScenarioConfig,
    main,
    parse_config,
    run_scenario,
    serialize_config,
)
from darkcqed.effective import effective_params, resonance_delta2
from darkcqed.hilbert import ProbeDrive, SystemParams

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*.cfg"))


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_parse(path):
    cfg = parse_config(path.read_text())
    assert parse_config(serialize_config(cfg)) == cfg


def test_empty_config_lists_required_keys():
    with pytest.raises(ConfigError, match="required keys: scenario"):
        parse_config("# nothing here\n\n")


def test_grammar_features():
    text = "[run]\nscenario=rabi preset=setB  # trailing comment\n\nrtol = 1e-9\n"
    cfg = parse_config(text)
    assert cfg.scenario == "rabi" and cfg.preset == "setB" and cfg.rtol == 1e-9
    assert cfg.params.delta2 == resonance_delta2(cfg.params)


def test_explicit_values_beat_preset(caplog):
    with caplog.at_level(logging.INFO, logger="darkcqed.cli"):
        cfg = parse_config("scenario = rabi\npreset = setA\nJ = 7\ndelta2 = 0.5\n")
    assert cfg.params.J == 7.0 and cfg.params.delta2 == 0.5
    assert cfg.params.delta1 == PRESETS["setA"]["delta1"]
    assert "overrides preset" in caplog.text


def test_overrides_beat_file():
    cfg = parse_config("scenario = rabi\npreset = setA\n", {"preset": "setB", "cutoffs": "3,2"})
    assert cfg.params.kappa1 == 10.0
    assert (cfg.params.n1_cutoff, cfg.params.n2_cutoff) == (3, 2)


@pytest.mark.parametrize("text,line", [
    ("scenario = rabi\npreset = setA\nbogus = 1\n", 3),
    ("scenario = rabi\npreset = setA\npreset = setB\n", 3),
    ("scenario = rabi\n\ng = one\n", 3),
    ("scenario = spectrum\npreset = setA\ngrid = 0, 1\n", 3),
    ("scenario = nope\n", 1),
    ("scenario = rabi preset = setA\n  junk\n", 2),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_missing_parameters_and_grid():
    with pytest.raises(ConfigError, match="missing parameters"):
        parse_config("scenario = rabi\ng = 1\n")
    with pytest.raises(ConfigError, match="requires grid"):
        parse_config("scenario = g2-scan\npreset = setB\n")
    with pytest.raises(ConfigError, match="grid2"):
        parse_config("scenario = regime-map\npreset = setA\ngrid = 1, 2, 3\n")
    with pytest.raises(ConfigError):
        Grid(0.0, 1.0, 1)


def test_g2_scan_defaults_to_guard_level_cutoffs():
    cfg = parse_config("scenario = g2-scan\npreset = setB\ngrid = -0.1, 0.1, 3\n")
    assert (cfg.params.n1_cutoff, cfg.params.n2_cutoff) == (3, 3)


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_subnormal=False)
rate = st.floats(min_value=0.0, max_value=1e3, allow_subnormal=False)


@st.composite
def configs(draw):
    scenario = draw(st.sampled_from(["rabi", "spectrum", "g2-scan", "eigen-scan",
                                     "kappa-scan", "regime-map", "effective-params"]))
    params = SystemParams(draw(finite), draw(finite), draw(finite), draw(finite),
                          draw(rate), draw(rate), draw(rate),
                          draw(st.integers(1, 3)), draw(st.integers(1, 3)))
    start = draw(finite)
    grid = Grid(start, start + draw(st.floats(1e-3, 1e3)), draw(st.integers(2, 500)))
    eps = draw(st.none() | st.floats(0, 10, allow_subnormal=False))
    return ScenarioConfig(
        scenario=scenario,
        params=params,
        drive=None if eps is None else ProbeDrive(eps),
        grid=grid,
        grid2=grid if scenario == "regime-map" else None,
        output=draw(st.none() | st.sampled_from(["out.csv", "results/run_1.csv"])),
        rtol=draw(st.floats(1e-12, 1e-3)),
        atol=draw(st.floats(1e-14, 1e-3)),
        hold=draw(st.sampled_from(["ratio", "delta1"])),
    )


@settings(max_examples=200, deadline=None)
@given(configs())
def test_serialize_round_trip(cfg):
    assert parse_config(serialize_config(cfg)) == cfg


def test_csv_is_deterministic(tmp_path):
    text = "scenario = eigen-scan\npreset = setA\ngrid = 0.0, 0.05, 11\n"
    _, a = run_scenario(parse_config(text))
    _, b = run_scenario(parse_config(text), output=str(tmp_path / "x.csv"))
    assert a == b
    assert (tmp_path / "x.csv").read_bytes() == a.encode("utf-8")
    assert "\r" not in a


def test_csv_is_self_describing():
    _, csv = run_scenario(parse_config("scenario = spectrum\npreset = setA\ngrid = -0.01, 0.01, 5\n"))
    lines = csv.splitlines()
    config = "\n".join(l[4:] for l in lines if l.startswith("#   "))
    again = parse_config(config)
    _, csv2 = run_scenario(again)
    body = [l for l in csv.splitlines() if not l.startswith("#")]
    assert body == [l for l in csv2.splitlines() if not l.startswith("#")]
    assert any(l.startswith("# probe amplitude used:") for l in lines)


def test_effective_params_row():
    res, csv = run_scenario(parse_config("scenario = effective-params\npreset = setA\n"))
    eff = effective_params(parse_config("scenario = rabi\npreset = setA\n").params)
    assert res["g_eff"] == eff.g_eff
    header, row = [l for l in csv.splitlines() if not l.startswith("#")]
    values = dict(zip(header.split(","), row.split(",")))
    assert float(values["g_eff"]) == pytest.approx(4.99376e-3, rel=1e-5)
    assert float(values["cooperativity"]) == pytest.approx(6.490, rel=1e-3)


def test_rabi_scenario_columns():
    res, _ = run_scenario(parse_config("scenario = rabi\npreset = setB\ngrid = 0, 60, 31\n"))
    assert res.header == ["t", "N1", "N2", "Pe", "Pe_eff"]
    assert res["Pe"][0] == 1.0 and res["Pe_eff"][0] == 1.0


def test_g2_scenario_row_count():
    text = "scenario = g2-scan\npreset = setB\ngrid = -0.15, 0.15, 201\ncutoffs = 2,2\n"
    res, csv = run_scenario(parse_config(text))
    assert len(res) == 201
    assert len([l for l in csv.splitlines() if not l.startswith("#")]) == 202


def test_main_writes_csv_and_gnuplot(tmp_path, capsys):
    cfg = tmp_path / "k.cfg"
    cfg.write_text("scenario = kappa-scan\npreset = setA\ngrid = 100, 800, 3\n")
    out = tmp_path / "k.csv"
    assert main(["run", str(cfg), "--out", str(out), "--gnuplot"]) == 0
    assert out.read_text().splitlines()[-1].startswith("800,")
    assert "plot" in (tmp_path / "k.csv.gp").read_text()


def test_main_stdout_and_overrides(capsys):
    assert main(["run", "--preset", "setB", "--scenario", "eigen-scan",
                 "--grid", "0.2,0.3,3"]) == 0
    out = capsys.readouterr().out
    body = [l for l in out.splitlines() if not l.startswith("#")]
    assert len(body) == 4 and body[0].startswith("delta2,")
    assert "#   kappa1 = 10.0" in out


def test_main_config_error_exit_code(tmp_path, capsys):
    assert main(["run"]) == 1
    assert "required keys" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1


def test_main_numerical_failure_leaves_partial_marker(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    # no decay and no drive: the steady state is not unique
    cfg.write_text("scenario = spectrum\ng = 1\nJ = 0\ndelta1 = 1\nkappa1 = 0\n"
                   "kappa2 = 0\ngamma = 0\neps = 0.01\ngrid = -0.1, 0.1, 3\n")
    out = tmp_path / "bad.csv"
    assert main(["run", str(cfg), "--out", str(out)]) == 2
    text = out.read_text()
    assert "# PARTIAL OUTPUT:" in text
    assert "failed" in capsys.readouterr().err
