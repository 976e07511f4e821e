import json
import subprocess
import sys

import pytest

from whichpath.cli import main
from whichpath.harness import SweepDataset


def test_verify_passes_and_detects_wrong_angles(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "CNOT phases" in out
    assert main(["verify", "--inject-wrong-angles"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_figure_writes_csv_json_gp(tmp_path, capsys):
    code = main(["figure", "3", "--theta-deg", "53.24", "--phi-steps", "6", "--outdir", str(tmp_path)])
    assert code == 0
    csv_text = (tmp_path / "fig3_theta53.24.csv").read_text()
    meta = json.loads((tmp_path / "fig3_theta53.24.json").read_text())
    assert meta["scheme"] == "marked"
    assert "fig3_derived_max_abs_p00" in meta
    gp = (tmp_path / "fig3_theta53.24.gp").read_text()
    assert "fig3_theta53.24.csv" in gp and "derived_p00" in gp
    data = SweepDataset.from_csv(csv_text, meta)
    assert len(data.rows) == 6
    assert "p0b variation" in capsys.readouterr().out


def test_run_is_byte_identical_across_invocations(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["run", "--scheme", "marked", "--gates", "pulse", "--phi-steps", "4",
                     "--rf-spread", "0.05", "--shots", "4", "--seed", "9", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nscheme = marked\ntheta_deg = 30\nphi_steps = 3\n")
    out = tmp_path / "x.csv"
    assert main(["run", "--config", str(cfg), "--theta-deg", "45", "--out", str(out)]) == 0
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["scheme"] == "marked"
    assert meta["theta_deg"] == pytest.approx(45.0)
    assert len(meta["phi_grid_rad"]) == 3


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("thetta_deg = 30\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == 2
    assert "thetta_deg" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["figure", "2", "--phi-steps", "0"],
        ["run", "--rf-spread", "0.05"],
        ["run", "--eff-a", "0.2"],
        ["run", "--init", "pure", "--eps-a", "0.02"],
        ["run", "--shots", "0"],
        ["run", "--n-points", "1000"],
    ],
)
def test_conflicting_or_bad_settings_exit_2(argv, tmp_path):
    dest = ["--outdir", str(tmp_path)] if argv[0] == "figure" else ["--out", str(tmp_path / "o.csv")]
    assert main(argv + dest) == 2
    assert not list(tmp_path.iterdir())


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["figure", "5"])
    assert exc.value.code == 2


def test_prep_command(capsys):
    assert main(["prep"]) == 0
    out = capsys.readouterr().out
    assert "B = 0.03318" in out
    assert main(["prep", "--eps-a", "0", "--eps-b", "0"]) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "whichpath", "verify"], capture_output=True, text=True)
    assert res.returncode == 0


def test_quadrature_flag_flips_spectral_coherences(tmp_path):
    cols = {}
    for sign in ("1", "-1"):
        out = tmp_path / f"q{sign}.csv"
        assert main(["run", "--scheme", "marked", "--shots", "2", "--phi-steps", "4",
                     "--quadrature", sign, "--out", str(out)]) == 0
        data = SweepDataset.from_csv(out.read_text(), out.with_suffix(".json").read_text())
        cols[sign] = data.column("c0")
    assert cols["1"][1] > 0.4
    assert cols["-1"] == pytest.approx(-cols["1"])
