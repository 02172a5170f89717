import subprocess
import sys

import pytest

from strat_ipm.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_LEDGER,
    EXIT_PASS,
    ConfigError,
    Scenario,
    emit_config,
    list_scenarios,
    main,
    parse_config,
    presets,
    run_scenario,
)
from strat_ipm.solver import InitialData, SolverConfig

PRESET_IDS = {
    "torus-linear-rates",
    "torus-nonlinear-profile",
    "strip-rates",
    "plane-quasilinear",
    "sharpness-witness",
    "kernel-decay",
    "inequalities",
    "mean-laws",
}


def test_catalogue_ids_and_claims():
    cat = list_scenarios()
    assert {sid for sid, _ in cat} == PRESET_IDS
    assert len(cat) == len(PRESET_IDS)
    assert all(isinstance(claim, str) and claim for _, claim in cat)


@pytest.mark.parametrize("sid", sorted(PRESET_IDS))
def test_preset_round_trip(sid):
    scenario = presets()[sid]
    text = emit_config(scenario)
    assert parse_config(text) == scenario
    assert emit_config(parse_config(text)) == text


def test_minimal_file_gets_defaults(tmp_path):
    path = tmp_path / "min.cfg"
    path.write_text("domain = torus\nN = 100\nK = 64\n")
    scenario = parse_config(path)
    cfg = scenario.config
    assert cfg.domain == "torus" and cfg.N == 100.0 and cfg.modes == (64, 64)
    assert cfg.dt is None and cfg.T is None and cfg.Nt_final == 1000.0
    assert scenario.kind == "solver"


def test_sigma_on_torus_is_rejected():
    with pytest.raises(ConfigError, match="sigma"):
        parse_config("[solver]\ndomain = torus\n[sigma]\namplitude = 0.1\n")


def test_unknown_key_and_bad_type_are_reported_with_context():
    with pytest.raises(ConfigError, match="unknown key 'Kx' in section \\[solver\\]"):
        parse_config("[solver]\nKx = 3\n")
    with pytest.raises(ConfigError, match="\\[solver\\] N"):
        parse_config("[solver]\nN = fast\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[solvers]\nN = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[predictions]\nu:L2 = sideways -1 0.1\n")


def test_torus_linear_rates_preset_passes(tmp_path):
    code = run_scenario(presets()["torus-linear-rates"], tmp_path, quiet=True)
    assert code == EXIT_PASS
    csv = (tmp_path / "torus-linear-rates.csv").read_text().splitlines()
    assert csv[0] == "t,Nt,theta:L2,u:L2,u2:L2"
    assert len(csv[1].split(",")[2]) >= 17
    summary = (tmp_path / "torus-linear-rates.summary.txt").read_text()
    assert sum(ln.startswith("PASS ") for ln in summary.splitlines()) == 3
    assert "result: PASS" in summary
    assert parse_config(tmp_path / "torus-linear-rates.cfg") == presets()["torus-linear-rates"]


def test_tiny_N_reports_ledger_violation_or_blow_up(tmp_path):
    scenario = Scenario(
        "destabilized", "solver", "N = 0.01 ||theta0||", "",
        SolverConfig(domain="torus", N_ratio=0.01, modes=(16, 16), Nt_final=20.0, snapshots=10,
                     initial=InitialData("band", seed=3)),
    )
    assert run_scenario(scenario, tmp_path, quiet=True) in (2, EXIT_LEDGER)


def test_inequalities_report_is_deterministic(tmp_path):
    scenario = presets()["inequalities"]
    scenario.params.update(spectra=100, ensemble=10, commutator_K=8)
    outs = []
    for k in range(2):
        out = tmp_path / str(k)
        assert run_scenario(scenario, out, quiet=True) == EXIT_PASS
        outs.append((out / "inequalities.summary.txt").read_bytes())
    assert outs[0] == outs[1]


def test_csv_is_deterministic(tmp_path):
    scenario = Scenario("tiny", "solver", "", "",
                        SolverConfig(domain="torus", N=1.0, modes=(6, 6), Nt_final=5.0, snapshots=6,
                                     initial=InitialData("band", seed=11)))
    blobs = []
    for k in range(2):
        run_scenario(scenario, tmp_path / str(k), quiet=True)
        blobs.append((tmp_path / str(k) / "tiny.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_main_list_and_error_codes(tmp_path, capsys):
    assert main(["list"]) == EXIT_PASS
    assert "torus-linear-rates" in capsys.readouterr().out
    assert main(["preset", "no-such-preset"]) == EXIT_CONFIG
    assert main(["run", str(tmp_path / "missing.cfg")]) == EXIT_IO
    bad = tmp_path / "bad.cfg"
    bad.write_text("[solver]\nbogus = 1\n")
    assert main(["run", str(bad)]) == EXIT_CONFIG


def test_unwritable_output_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    scenario = presets()["inequalities"]
    scenario.params.update(spectra=5, ensemble=4, commutator_K=4)
    assert run_scenario(scenario, blocker / "sub", quiet=True) == EXIT_IO


def test_run_config_file_with_seed_override(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(
        "[scenario]\nid = small\nkind = linear\nwindow = 10.0, 1000.0\n"
        "[solver]\ndomain = torus\nmodes = 4, 1024\nnonlinear = false\n"
        "[initial]\nkind = algebraic\nhorizontal = 4\n"
        "[predictions]\ntheta:L2 = equal -2.0 0.15\n"
    )
    assert main(["--out", str(tmp_path / "o"), "--seed", "5", "--quiet", "run", str(cfg)]) == EXIT_PASS
    assert "seed = 5" in (tmp_path / "o" / "small.cfg").read_text()


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "strat_ipm.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "mean-laws" in proc.stdout
