import json

import pytest

from unitaryband.cli import emit_plotdata, load_config, main
from unitaryband.errors import ConfigError, ReportMissingError

TWO_VALUED = {"variant": "two_valued", "t": 0.6, "theta": [0.3, 1.1], "pi": [0.4, 2.0]}
DEFECT = {"variant": "periodic", "t": 0.4, "theta": [0.3, 1.1, 2.0], "pi": [0.5, 0.1, 2.2],
          "defects": [[1, 2.5, 1.0, 0.0], [2, 0.2, 3.0, 0.0]]}
RANDOM = {"variant": "random", "t": 0.5}


def run_cli(tmp_path, command, doc, name="run", extra=()):
    cfg = tmp_path / f"{name}.json"
    cfg.write_text(json.dumps(doc))
    out = tmp_path / name
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


def outputs(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "manifest.json"}


CASES = [
    ("verify", {"model": RANDOM, "seed": 1,
                "params": {"samples": 50, "draws": 200, "window_blocks": 8}}, "verify.json"),
    ("lyapunov", {"model": RANDOM, "seed": 7, "params": {"n_grid": 4, "steps": 2000}},
     "gamma_profile.csv"),
    ("bands", {"model": TWO_VALUED, "params": {"n_x": 64}}, "band_functions.csv"),
    ("halfline", {"model": DEFECT, "params": {"n_grid": 256}}, "eigenvalues.json"),
    ("truncspec", {"model": DEFECT, "params": {"sites": 64}}, "spectrum.csv"),
    ("localize", {"model": RANDOM, "seed": 2, "params": {"sites": 128}}, "localization.csv"),
    ("independence", {"model": RANDOM, "seed": 1, "params": {"samples": 2000}},
     "independence.json"),
    ("gordon", {"model": {"variant": "almost_periodic", "t": 0.5, "beta": 0.38196601125},
                "params": {"approximants": [[1, 3], [2, 5]], "lam": 1.0}}, "gordon.json"),
]


@pytest.mark.parametrize("command,doc,artefact", CASES, ids=[c[0] for c in CASES])
def test_command_runs_and_is_reproducible(tmp_path, command, doc, artefact):
    status, out = run_cli(tmp_path, command, doc, "a")
    assert status == 0
    assert (out / artefact).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == command and artefact in manifest["outputs"]
    status, out_b = run_cli(tmp_path, command, doc, "b")
    assert status == 0 and outputs(out) == outputs(out_b)


def test_config_errors_exit_two(tmp_path, capsys):
    status, _ = run_cli(tmp_path, "lyapunov",
                        {"model": RANDOM, "seed": 7, "params": {"n_grid": 4, "stepz": 10}})
    assert status == 2
    assert "stepz" in capsys.readouterr().err
    bad = tmp_path / "broken.json"
    bad.write_text('{"model": {\n  "variant": }')
    assert main(["bands", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert main(["bands", "--config", str(tmp_path / "missing.json")]) == 2


def test_missing_seed_is_config_error():
    with pytest.raises(ConfigError):
        load_config("lyapunov", json.dumps({"model": RANDOM}))


def test_config_error_reports_line(tmp_path):
    text = '{\n  "model": {"variant": "two_valued", "t": 1.7,\n "theta": [0, 1], "pi": [0, 1]}\n}'
    with pytest.raises(ConfigError) as info:
        load_config("bands", text, out=tmp_path)
    assert info.value.line == 2


def test_budget_exit_one(tmp_path):
    status, _ = run_cli(tmp_path, "truncspec", {"model": TWO_VALUED, "params": {"sites": 5000}})
    assert status == 1


def test_seed_flag_overrides(tmp_path):
    doc = {"model": RANDOM, "seed": 7, "params": {"n_grid": 2, "steps": 1000}}
    _, out = run_cli(tmp_path, "lyapunov", doc, "s", extra=("--seed", "9"))
    assert json.loads((out / "manifest.json").read_text())["seed"] == 9


@pytest.mark.parametrize("command,doc,plot", [
    ("lyapunov", CASES[1][1], "plot_gamma.dat"),
    ("bands", CASES[2][1], "plot_band_0.dat"),
    ("localize", CASES[5][1], "plot_psi.dat"),
    ("halfline", CASES[3][1], "plot_discriminant.dat"),
])
def test_plotdata(tmp_path, command, doc, plot):
    status, out = run_cli(tmp_path, command, doc, extra=("--plotdata",))
    assert status == 0
    rows = (out / plot).read_text().splitlines()
    assert rows and all(len(r.split()) == 2 for r in rows)


def test_plotdata_needs_reports(tmp_path):
    with pytest.raises(ReportMissingError):
        emit_plotdata(tmp_path)
    _, out = run_cli(tmp_path, "truncspec", CASES[4][1])
    with pytest.raises(ReportMissingError):
        emit_plotdata(out)
