"""
Data I/O functions for syk-chaos-analysis.

Reads ``key = value`` run configurations (with ``include`` directives),
writes whitespace-separated diagnostic tables and provides checksum and time
stamp helpers shared by the archive and the command line interface.

History:
---------
- **2026/10**: Include directives and list values in configuration files.
- **2026/10**: Initial commit.
"""

import hashlib
import os
import re
from datetime import datetime
from pathlib import Path
from typing import Union, Optional, Any
import numpy as np
from numpy.typing import ArrayLike
import pandas as pd

from sykchaosanalysis.utils.errors import ConfigError

__all__ = [
    "OUTPUT_ROOT_ENV",
    "coerce_value",
    "read_config_file",
    "write_config_file",
    "write_table",
    "read_table",
    "array_checksum",
    "resolve_output_root",
    "time_stamp",
]

OUTPUT_ROOT_ENV = "SYKCHAOS_OUTPUT_ROOT"


def coerce_value(raw: str) -> Any:
    """Convert a configuration string to int, float, bool, None or list.

    Parameters
    ----------
    raw: str
        value text

    Returns
    -------
    value: Any
        coerced value, the stripped string when nothing matches
    """

    text = raw.strip()
    if "," in text:
        return [coerce_value(part) for part in text.split(",") if part.strip()]
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    if re.fullmatch(r"[+-]?(\d+\.\d*|\d*\.\d+|\d+)([eE][+-]?\d+)?", text):
        return float(text)
    if text.lower() == "true":
        return True
    if text.lower() == "false":
        return False
    if text.lower() in ("none", "null", ""):
        return None
    return text


def read_config_file(
    config_path: Union[Path, str],
    _seen: Optional[tuple] = None,
) -> dict:
    """Read a ``key = value`` configuration file.

    ``#`` starts a comment. ``include = other.cfg`` merges another file at
    that position, relative to the including file. Later keys override
    earlier ones.

    Parameters
    ----------
    config_path: Union[Path, str]
        configuration file

    Returns
    -------
    config: dict
        coerced key/value pairs
    """

    config_path = Path(config_path).resolve()
    seen = _seen or ()
    if config_path in seen:
        raise ConfigError(f"include cycle through {config_path}")
    if not config_path.exists():
        raise FileNotFoundError(f"configuration file {config_path} not found")

    config = {}
    with open(config_path, "r") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{config_path}:{line_number}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ConfigError(f"{config_path}:{line_number}: empty key")
            if key == "include":
                config.update(
                    read_config_file(config_path.parent / value, seen + (config_path,))
                )
            else:
                config[key] = coerce_value(value)
    return config


def write_config_file(config: dict, config_path: Union[Path, str]):
    """Write a flat mapping as ``key = value`` lines (lists comma-joined)."""

    with open(config_path, "w") as f:
        for key, value in config.items():
            if isinstance(value, (list, tuple)):
                value = ", ".join(str(v) for v in value)
            f.write(f"{key} = {value}\n")


def write_table(df: pd.DataFrame, table_path: Union[Path, str]):
    """Write a whitespace-separated table with exactly one header line.

    Parameters
    ----------
    df: pd.DataFrame
        table to write
    table_path: Union[Path, str]
        output file
    """

    df.to_csv(table_path, sep=" ", index=False, float_format="%.12g", na_rep="nan")


def read_table(table_path: Union[Path, str]) -> pd.DataFrame:
    """Read a table written by `write_table`."""

    return pd.read_csv(table_path, sep=r"\s+")


def array_checksum(array: ArrayLike) -> str:
    """SHA-256 of the little-endian float64 bytes of ``array``."""

    data = np.ascontiguousarray(np.asarray(array, dtype="<f8"))
    return hashlib.sha256(data.tobytes()).hexdigest()


def resolve_output_root(output_dir: Optional[Union[Path, str]] = None) -> Path:
    """Output directory: explicit value, then ``$SYKCHAOS_OUTPUT_ROOT``, then ``./syk_output``."""

    if output_dir is not None:
        return Path(output_dir)
    env_root = os.environ.get(OUTPUT_ROOT_ENV)
    if env_root:
        return Path(env_root)
    return Path.cwd() / "syk_output"


def time_stamp():
    """Generate timestamp string.

    Returns
    -------
    timestamp: str
        timestamp formatted as string
    """

    return datetime.now().strftime("%Y-%m-%d %H:%M:%S")
