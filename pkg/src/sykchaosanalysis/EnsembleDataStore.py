"""
Append-only archive of ensemble eigenvalue records.

The archive is a directory holding a JSON header (``.zattrs``: format
version, model specification, sector policy and sector labels), a state file
tracking completed samples, one zarr v2 float64 array per sample and sector
written through tensorstore, and a parquet index of every record with its
SHA-256 checksum. A run interrupted at any point resumes from the completed
samples.

History:
---------
- **2026/10**: Parquet record index and archive checksum.
- **2026/10**: Initial commit.
"""

import copy
import hashlib
import json
import re
from pathlib import Path
from typing import Union, Optional, Sequence
import numpy as np
from numpy.typing import ArrayLike
import pandas as pd
import tensorstore as ts

from sykchaosanalysis.HamiltonianFactory import ModelSpec
from sykchaosanalysis.utils.dataio import array_checksum, time_stamp
from sykchaosanalysis.utils.errors import ConfigError, NumericalError
from sykchaosanalysis.utils.sectors import SectorPolicy, SectorSpectrum

ARCHIVE_FORMAT_VERSION = 1


def _model_keys(config: dict) -> dict:
    """Spec mapping without the ensemble size, which may grow on resume."""

    return {key: value for key, value in config.items() if key != "samples"}


class EnsembleDataStore:
    """API to an eigenvalue archive.

    Parameters
    ----------
    archive_path: Union[str, Path]
        archive directory, created when missing
    spec: Optional[ModelSpec], default None
        model specification; required to create an archive and checked
        against the header when reopening one
    policy: Optional[SectorPolicy], default None
        sector policy; required to create an archive
    n_samples: Optional[int], default None
        planned ensemble size recorded in the header
    """

    def __init__(
        self,
        archive_path: Union[str, Path],
        spec: Optional[ModelSpec] = None,
        policy: Optional[SectorPolicy] = None,
        n_samples: Optional[int] = None,
    ):
        compressor = {
            "id": "blosc",
            "cname": "zstd",
            "clevel": 5,
            "shuffle": 2,
        }
        self._zarrv2_spec = {
            "driver": "zarr",
            "kvstore": None,
            "metadata": {"compressor": compressor},
            "create": True,
            "delete_existing": True,
        }

        self._archive_path = Path(archive_path)
        self._header_path = self._archive_path / Path(".zattrs")
        self._state_path = self._archive_path / Path("archive_state.json")
        self._records_root_path = self._archive_path / Path("records")
        self._index_path = self._archive_path / Path("records.parquet")

        if self._header_path.exists():
            self._parse_archive()
            if spec is not None and _model_keys(spec.to_config()) != _model_keys(self._header["spec"]):
                raise ConfigError(
                    f"archive {self._archive_path} holds a different model specification"
                )
            if n_samples is not None and n_samples != self.n_samples:
                self._header["n_samples"] = int(n_samples)
                self._save_to_json(self._header, self._header_path)
        else:
            if spec is None or policy is None:
                raise ConfigError(
                    f"{self._archive_path} is not an archive; spec and policy are needed to create one"
                )
            self._init_archive(spec, policy, n_samples)

    @property
    def archive_path(self) -> Path:
        return self._archive_path

    @property
    def format_version(self) -> int:
        return int(self._header["format_version"])

    @property
    def spec(self) -> ModelSpec:
        """Model specification echoed in the header."""

        return ModelSpec.from_config(self._header["spec"])

    @property
    def policy_kind(self) -> str:
        return self._header["policy"]["kind"]

    @property
    def expected_class(self) -> Optional[str]:
        return self._header["policy"]["expected_class"]

    @property
    def sector_labels(self) -> list[str]:
        return list(self._header["sector_labels"])

    @property
    def n_samples(self) -> Optional[int]:
        return self._header.get("n_samples")

    @property
    def archive_state(self) -> dict:
        return dict(self._archive_state)

    @property
    def completed_samples(self) -> list[int]:
        """Sorted ids of samples whose records are on disk."""

        return sorted(int(s) for s in self._archive_state["CompletedSamples"])

    @property
    def is_complete(self) -> bool:
        return bool(self._archive_state.get("Complete", False))

    @property
    def archive_checksum(self) -> Optional[str]:
        return self._archive_state.get("ArchiveChecksum")

    @property
    def record_index(self) -> pd.DataFrame:
        """One row per (sample, sector) record."""

        if self._index_path.exists():
            return self._load_from_parquet(self._index_path)
        return pd.DataFrame(
            columns=["sample_id", "sector", "n_levels", "degeneracy", "sha256"]
        )

    def _init_archive(self, spec: ModelSpec, policy: SectorPolicy, n_samples: Optional[int]):
        """Create directory structure, header and state."""

        self._archive_path.mkdir(parents=True)
        self._records_root_path.mkdir()
        self._header = {
            "format_version": ARCHIVE_FORMAT_VERSION,
            "created": time_stamp(),
            "dtype": "<f8",
            "spec": spec.to_config(),
            "policy": {
                "kind": policy.kind,
                "N": policy.N,
                "expected_class": policy.expected_class,
            },
            "sector_labels": policy.sector_labels,
            "n_samples": None if n_samples is None else int(n_samples),
        }
        self._save_to_json(self._header, self._header_path)
        self._archive_state = {
            "Version": ARCHIVE_FORMAT_VERSION,
            "Initialized": True,
            "CompletedSamples": [],
            "Complete": False,
            "ArchiveChecksum": None,
        }
        self._save_to_json(self._archive_state, self._state_path)

    def _parse_archive(self):
        """Read header and state of an existing archive."""

        self._header = self._load_from_json(self._header_path)
        if "format_version" not in self._header:
            raise ConfigError(f"{self._header_path} has no format_version")
        if int(self._header["format_version"]) > ARCHIVE_FORMAT_VERSION:
            raise ConfigError(
                f"archive format {self._header['format_version']} is newer than {ARCHIVE_FORMAT_VERSION}"
            )
        self._archive_state = self._load_from_json(self._state_path)
        if not self._archive_state:
            self._archive_state = {
                "Version": ARCHIVE_FORMAT_VERSION,
                "Initialized": True,
                "CompletedSamples": [],
                "Complete": False,
                "ArchiveChecksum": None,
            }

    @staticmethod
    def _sample_key(sample_id: int) -> str:
        return f"sample{int(sample_id):06d}"

    @staticmethod
    def _sector_key(label: str) -> str:
        """File-system safe form of a sector label."""

        key = label.replace("=+", "_p").replace("=-", "_m").replace(",", "__")
        return re.sub(r"[^A-Za-z0-9_]", "_", key)

    def save_sample(
        self,
        sample_id: int,
        spectra: Sequence[SectorSpectrum],
        overwrite: bool = False,
    ):
        """Append the sector spectra of one sample.

        Parameters
        ----------
        sample_id: int
            sample id
        spectra: Sequence[SectorSpectrum]
            post-policy sector spectra
        overwrite: bool, default False
            replace an existing record instead of refusing
        """

        if sample_id in self._archive_state["CompletedSamples"] and not overwrite:
            raise ConfigError(f"sample {sample_id} is already archived")
        labels = [s.label for s in spectra]
        if sorted(labels) != sorted(self.sector_labels):
            raise ConfigError(
                f"sample {sample_id} has sectors {labels}, archive expects {self.sector_labels}"
            )

        sample_path = self._records_root_path / Path(self._sample_key(sample_id))
        sample_path.mkdir(parents=True, exist_ok=True)
        attributes = {}
        rows = []
        for spectrum in spectra:
            levels = np.ascontiguousarray(spectrum.eigenvalues, dtype=np.float64)
            sector_key = self._sector_key(spectrum.label)
            self._save_to_zarr_array(
                levels,
                self._get_kvstore_key(sample_path / Path(sector_key + ".zarr")),
                self._zarrv2_spec.copy(),
            )
            checksum = array_checksum(levels)
            attributes[spectrum.label] = {
                "key": sector_key,
                "quantum_numbers": spectrum.quantum_numbers,
                "policy_applied": spectrum.policy_applied,
                "degeneracy": int(spectrum.degeneracy),
                "n_levels": int(levels.size),
                "n_zero_modes": spectrum.n_zero_modes,
                "sha256": checksum,
            }
            rows.append(
                {
                    "sample_id": int(sample_id),
                    "sector": spectrum.label,
                    "n_levels": int(levels.size),
                    "degeneracy": int(spectrum.degeneracy),
                    "sha256": checksum,
                }
            )
        self._save_to_json(attributes, sample_path / Path(".zattrs"))

        index = self.record_index
        index = index[index["sample_id"] != int(sample_id)]
        index = pd.concat([index, pd.DataFrame(rows)], ignore_index=True)
        index = index.sort_values(["sample_id", "sector"]).reset_index(drop=True)
        self._save_to_parquet(index, self._index_path)

        completed = set(self._archive_state["CompletedSamples"])
        completed.add(int(sample_id))
        self._archive_state["CompletedSamples"] = sorted(completed)
        self._archive_state["Complete"] = False
        self._archive_state["ArchiveChecksum"] = None
        self._save_to_json(self._archive_state, self._state_path)

    def load_sample(self, sample_id: int, verify: bool = True) -> list[SectorSpectrum]:
        """Sector spectra of one archived sample, in header sector order.

        Parameters
        ----------
        sample_id: int
            sample id
        verify: bool, default True
            compare each record with its stored checksum

        Returns
        -------
        spectra: list[SectorSpectrum]
            archived spectra
        """

        if sample_id not in self._archive_state["CompletedSamples"]:
            raise KeyError(f"sample {sample_id} is not archived")
        sample_path = self._records_root_path / Path(self._sample_key(sample_id))
        attributes = self._load_from_json(sample_path / Path(".zattrs"))
        spectra = []
        for label in self.sector_labels:
            record = attributes[label]
            levels = np.asarray(
                self._load_from_zarr_array(
                    self._get_kvstore_key(sample_path / Path(record["key"] + ".zarr")),
                    self._zarrv2_spec.copy(),
                ).result(),
                dtype=np.float64,
            )
            if verify and array_checksum(levels) != record["sha256"]:
                raise NumericalError(f"checksum mismatch for sample {sample_id}, sector {label}")
            spectra.append(
                SectorSpectrum(
                    {k: int(v) for k, v in record["quantum_numbers"].items()},
                    levels,
                    record["policy_applied"],
                    int(record["degeneracy"]),
                )
            )
        return spectra

    def load_ensemble(self, by: str = "sector") -> list[np.ndarray]:
        """Archived levels as an ensemble.

        Parameters
        ----------
        by: str, default "sector"
            ``sector``: one array per (sample, sector); ``sample``: all
            sectors of a sample concatenated and sorted

        Returns
        -------
        ensemble: list[np.ndarray]
            spectra in sample order
        """

        ensemble = []
        for sample_id in self.completed_samples:
            spectra = self.load_sample(sample_id)
            if by == "sector":
                ensemble.extend(s.eigenvalues for s in spectra)
            elif by == "sample":
                ensemble.append(np.sort(np.concatenate([s.eigenvalues for s in spectra])))
            else:
                raise ValueError(f"unknown grouping '{by}'")
        return ensemble

    def degeneracy_factor(self) -> int:
        """Copies of each stored level in the full spectrum."""

        index = self.record_index
        if index.empty:
            return 1
        return int(index["degeneracy"].max())

    def finalize(self) -> str:
        """Mark the archive complete and store a checksum over every record.

        Returns
        -------
        checksum: str
            SHA-256 over the per-record checksums in sample then sector order
        """

        digest = hashlib.sha256()
        for sample_id in self.completed_samples:
            for spectrum in self.load_sample(sample_id):
                digest.update(array_checksum(spectrum.eigenvalues).encode("ascii"))
        checksum = digest.hexdigest()
        self._archive_state["Complete"] = True
        self._archive_state["ArchiveChecksum"] = checksum
        self._archive_state["Finalized"] = time_stamp()
        self._save_to_json(self._archive_state, self._state_path)
        return checksum

    @staticmethod
    def _get_kvstore_key(path: Union[Path, str]) -> dict:
        """Tensorstore kvstore key of a local archive location.

        Parameters
        ----------
        path : Union[Path, str]
            archive location on the local filesystem

        Returns
        -------
        kvstore_key : dict
            tensorstore kvstore key
        """

        return {"driver": "file", "path": str(path)}

    @staticmethod
    def _load_from_json(dictionary_path: Union[Path, str]) -> dict:
        """Load json as dictionary, empty when missing or unreadable."""

        try:
            with open(dictionary_path, "r") as f:
                dictionary = json.load(f)
        except (FileNotFoundError, json.JSONDecodeError):
            dictionary = {}
        return dictionary

    @staticmethod
    def _save_to_json(dictionary: dict, dictionary_path: Union[Path, str]):
        """Save dictionary to json.

        Parameters
        ----------
        dictionary : dict
            The data to be saved.
        dictionary_path : Union[Path,str]
            The path to the JSON file where the data will be saved.
        """

        with open(dictionary_path, "w") as file:
            json.dump(dictionary, file, indent=4)

    @staticmethod
    def _load_from_zarr_array(kvstore: dict, spec: dict):
        """Return a read future for a 1D zarr array.

        Parameters
        ----------
        kvstore : dict
            tensorstore kvstore specification
        spec : dict
            tensorstore zarr specification

        Returns
        -------
        read_future : tensorstore.Future
            future resolving to the array
        """

        current_zarr = ts.open(
            {
                "driver": spec["driver"],
                "kvstore": kvstore,
                "open": True,
            }
        ).result()
        return current_zarr.read()

    @staticmethod
    def _save_to_zarr_array(array: ArrayLike, kvstore: dict, spec: dict):
        """Write a float64 array to zarr using tensorstore.

        Parameters
        ----------
        array : ArrayLike
            array to save
        kvstore : dict
            tensorstore kvstore specification
        spec : dict
            tensorstore zarr specification
        """

        if str(array.dtype) != "float64":
            raise ValueError("Unsupported data type: " + str(array.dtype))
        spec = copy.deepcopy(spec)
        spec["metadata"]["shape"] = list(array.shape)
        spec["metadata"]["chunks"] = [max(int(n), 1) for n in array.shape]
        spec["metadata"]["dtype"] = "<f8"

        current_zarr = ts.open(
            {
                **spec,
                "kvstore": kvstore,
            }
        ).result()
        current_zarr.write(array).result()

    @staticmethod
    def _load_from_parquet(parquet_path: Union[Path, str]) -> pd.DataFrame:
        """Load dataframe from parquet."""

        return pd.read_parquet(parquet_path)

    @staticmethod
    def _save_to_parquet(df: pd.DataFrame, parquet_path: Union[Path, str]):
        """Save dataframe to parquet.

        Parameters
        ----------
        df : pd.DataFrame
            Dataframe to save.
        parquet_path : Union[Path, str]
            Path to parquet file.
        """

        df.to_parquet(parquet_path)
