import pytest
import pandas as pd

from sykchaosanalysis import __version__
from sykchaosanalysis.cli import build_parser, config_from_args, main
from sykchaosanalysis.EnsembleDataStore import EnsembleDataStore
from sykchaosanalysis.utils.dataio import read_table
from sykchaosanalysis.utils.errors import ConfigError, NumericalError

QUDIT_ARGS = ["--family", "qudit_syk", "--d", "3", "--L", "3", "--q", "2"]
STEM = "qudit_syk_d3_L3_q2_seed0"


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_flags_map_onto_config(tmp_path):
    args = build_parser().parse_args(
        ["run", *QUDIT_ARGS, "--samples", "auto", "--workers", "3", "--q-tilde", "2",
         "--diagnostics", "dos, sff", "--output-dir", str(tmp_path), "--figures"]
    )
    config = config_from_args(args)
    assert config.spec.samples == "auto"
    assert config.worker_count == 3
    assert config.diagnostics == ("dos", "sff")
    assert config.output_dir == tmp_path
    assert config.figures


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("family = original_syk\nN = 12\nseed = 4\nsamples = 10\n")
    args = build_parser().parse_args(["run", "--config", str(path), "--samples", "2"])
    config = config_from_args(args)
    assert config.spec.family == "original_syk"
    assert config.spec.seed == 4
    assert config.spec.samples == 2


def test_missing_family():
    args = build_parser().parse_args(["run", "--N", "12"])
    with pytest.raises(ConfigError):
        config_from_args(args)
    assert main(["run", "--N", "12"]) == 2


def test_invalid_model_exit_code(tmp_path):
    assert main(["run", "--family", "qudit_syk", "--d", "1", "--L", "3", "--q", "2",
                 "--output-dir", str(tmp_path)]) == 2


def test_capacity_exit_code(tmp_path, capsys):
    code = main(["run", "--family", "overlapping_clusters_syk", "--N", "28", "--M", "2",
                 "--output-dir", str(tmp_path)])
    assert code == 3
    assert "CapacityError" in capsys.readouterr().err


def test_numerical_exit_code(mocker):
    mocker.patch("sykchaosanalysis.cli.gate_cost_report", side_effect=NumericalError("rank"))
    assert main(["gatecost", "--family", "original_syk", "--N", "8"]) == 4


def test_unexpected_errors_propagate(mocker):
    mocker.patch("sykchaosanalysis.cli.gate_cost_report", side_effect=RuntimeError("boom"))
    with pytest.raises(RuntimeError):
        main(["gatecost", "--family", "original_syk", "--N", "8"])


def test_gatecost_prints_table(capsys):
    assert main(["gatecost", "--family", "overlapping_clusters_syk", "--N", "12", "--M", "2"]) == 0
    out = capsys.readouterr().out
    assert "495" in out and "45" in out


def test_gatecost_writes_table(tmp_path):
    output = tmp_path / "cost.txt"
    assert main(["gatecost", "--family", "overlapping_clusters_syk", "--N", "12", "--M", "2",
                 "--output", str(output)]) == 0
    table = read_table(output)
    assert table.loc[0, "n_terms"] == 45


def test_gatecost_rejects_qudits():
    assert main(["gatecost", *QUDIT_ARGS]) == 2


def test_manifest_command(tmp_path):
    output = tmp_path / "manifest.txt"
    assert main(["manifest", *QUDIT_ARGS, "--diagnostics", "dos,sff", "--output", str(output)]) == 0
    manifest = pd.read_csv(output, sep="\t")
    assert manifest["table"].tolist() == [f"{STEM}_dos.txt", f"{STEM}_sff.txt"]


def test_run_then_diagnose(tmp_path):
    code = main(["-v", "0", "run", *QUDIT_ARGS, "--samples", "6", "--output-dir", str(tmp_path),
                 "--diagnostics", "dos,gap_ratio"])
    assert code == 0
    archive = tmp_path / f"{STEM}.zarr"
    assert EnsembleDataStore(archive).completed_samples == list(range(6))
    assert (tmp_path / f"{STEM}_dos.txt").exists()
    assert (tmp_path / f"{STEM}_gap_ratio_index.txt").exists()
    assert not (tmp_path / f"{STEM}_sff.txt").exists()

    assert main(["-v", "0", "diagnose", str(archive), "--diagnostics", "sff", "--sff-points", "40"]) == 0
    assert len(read_table(tmp_path / f"{STEM}_sff.txt")) == 40


def test_run_without_diagnostics(tmp_path):
    assert main(["-v", "0", "run", *QUDIT_ARGS, "--samples", "2", "--output-dir", str(tmp_path),
                 "--no-diagnostics"]) == 0
    assert not list(tmp_path.glob("*.txt"))


def test_diagnose_missing_archive(tmp_path):
    assert main(["-v", "0", "diagnose", str(tmp_path / "none.zarr")]) == 2
