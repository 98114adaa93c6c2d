import pytest
import numpy as np
import pandas as pd
from pathlib import Path

from sykchaosanalysis.utils.dataio import (
    OUTPUT_ROOT_ENV,
    array_checksum,
    coerce_value,
    read_config_file,
    read_table,
    resolve_output_root,
    write_config_file,
    write_table,
)
from sykchaosanalysis.utils.errors import ConfigError


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("12", 12),
        ("-3", -3),
        ("0.25", 0.25),
        ("1e-3", 1e-3),
        ("True", True),
        ("false", False),
        ("none", None),
        ("auto", "auto"),
        ("dos, sff", ["dos", "sff"]),
        ("1,2,3", [1, 2, 3]),
    ],
)
def test_coerce_value(raw, expected):
    assert coerce_value(raw) == expected


def test_read_config_with_comments(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# qudit run\nfamily = qudit_syk  # inline\nd = 3\n\nL = 4\nsamples = auto\n")
    assert read_config_file(path) == {"family": "qudit_syk", "d": 3, "L": 4, "samples": "auto"}


def test_include_is_relative_and_overridable(tmp_path):
    (tmp_path / "shared").mkdir()
    (tmp_path / "shared" / "base.cfg").write_text("family = original_syk\nN = 12\nseed = 1\n")
    path = tmp_path / "run.cfg"
    path.write_text("include = shared/base.cfg\nseed = 7\n")
    assert read_config_file(path) == {"family": "original_syk", "N": 12, "seed": 7}


def test_include_cycle(tmp_path):
    (tmp_path / "a.cfg").write_text("include = b.cfg\n")
    (tmp_path / "b.cfg").write_text("include = a.cfg\n")
    with pytest.raises(ConfigError, match="cycle"):
        read_config_file(tmp_path / "a.cfg")


@pytest.mark.parametrize("text", ["family qudit_syk\n", " = 3\n"])
def test_malformed_config(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError):
        read_config_file(path)


def test_missing_config(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_config_file(tmp_path / "missing.cfg")


def test_config_round_trip(tmp_path):
    config = {"family": "overlapping_clusters_syk", "N": 14, "M": 2, "diagnostics": ["dos", "sff"]}
    path = tmp_path / "out.cfg"
    write_config_file(config, path)
    assert read_config_file(path) == config


def test_table_has_single_header(tmp_path):
    df = pd.DataFrame({"t": [0.1, 1.0], "sff": [0.99, np.nan]})
    path = tmp_path / "table.txt"
    write_table(df, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t sff"
    assert len(lines) == 3
    loaded = read_table(path)
    assert np.isnan(loaded.loc[1, "sff"])
    assert loaded.loc[0, "sff"] == pytest.approx(0.99)


def test_array_checksum_is_dtype_stable():
    values = np.array([1.0, 2.5, -3.0])
    assert array_checksum(values) == array_checksum(values.astype(np.float32))
    assert array_checksum(values) == array_checksum([1, 2.5, -3])
    assert array_checksum(values) != array_checksum(values[::-1])


def test_output_root_resolution(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_ROOT_ENV, raising=False)
    monkeypatch.chdir(tmp_path)
    assert resolve_output_root() == Path(tmp_path) / "syk_output"
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path / "env"))
    assert resolve_output_root() == tmp_path / "env"
    assert resolve_output_root(tmp_path / "explicit") == tmp_path / "explicit"
