import json
import pytest
import numpy as np
from pathlib import Path

from sykchaosanalysis.EnsembleDataStore import ARCHIVE_FORMAT_VERSION, EnsembleDataStore
from sykchaosanalysis.HamiltonianFactory import ModelSpec
from sykchaosanalysis.utils.errors import ConfigError, NumericalError
from sykchaosanalysis.utils.sectors import SectorPolicy, SectorSpectrum


@pytest.fixture
def spec():
    return ModelSpec("overlapping_clusters_syk", N=12, M=2, seed=4, samples=3)


@pytest.fixture
def policy(spec):
    return SectorPolicy.for_spec(spec)


@pytest.fixture
def datastore(tmp_path, spec, policy):
    return EnsembleDataStore(tmp_path / "run.zarr", spec, policy, n_samples=3)


def sample_spectra(sample_id):
    rng = np.random.default_rng(sample_id)
    return [
        SectorSpectrum({"parity": value}, np.sort(rng.normal(size=16)), "dedoubled_N4", 2)
        for value in (1, -1)
    ]


def test_new_archive_layout(datastore, tmp_path):
    root = tmp_path / "run.zarr"
    assert (root / ".zattrs").exists()
    assert (root / "archive_state.json").exists()
    assert (root / "records").is_dir()
    header = json.loads((root / ".zattrs").read_text())
    assert header["format_version"] == ARCHIVE_FORMAT_VERSION
    assert header["dtype"] == "<f8"
    assert header["policy"] == {"kind": "fermion_parity_real", "N": 12, "expected_class": "GUE"}
    assert datastore.sector_labels == ["parity=+1", "parity=-1"]
    assert datastore.completed_samples == []
    assert datastore.record_index.empty


def test_create_requires_spec_and_policy(tmp_path, spec):
    with pytest.raises(ConfigError):
        EnsembleDataStore(tmp_path / "missing.zarr")
    with pytest.raises(ConfigError):
        EnsembleDataStore(tmp_path / "missing.zarr", spec=spec)


def test_save_and_load_sample(datastore):
    spectra = sample_spectra(0)
    datastore.save_sample(0, spectra)
    loaded = datastore.load_sample(0)
    assert [s.label for s in loaded] == ["parity=+1", "parity=-1"]
    for original, restored in zip(spectra, loaded):
        assert np.array_equal(original.eigenvalues, restored.eigenvalues)
        assert restored.degeneracy == 2
        assert restored.policy_applied == "dedoubled_N4"
    index = datastore.record_index
    assert list(index.columns) == ["sample_id", "sector", "n_levels", "degeneracy", "sha256"]
    assert index["n_levels"].tolist() == [16, 16]


def test_sample_is_append_only(datastore):
    datastore.save_sample(0, sample_spectra(0))
    with pytest.raises(ConfigError):
        datastore.save_sample(0, sample_spectra(1))
    datastore.save_sample(0, sample_spectra(1), overwrite=True)
    assert np.array_equal(
        datastore.load_sample(0)[0].eigenvalues, sample_spectra(1)[0].eigenvalues
    )
    assert len(datastore.record_index) == 2


def test_sector_mismatch_is_rejected(datastore):
    with pytest.raises(ConfigError):
        datastore.save_sample(0, sample_spectra(0)[:1])


def test_missing_sample(datastore):
    with pytest.raises(KeyError):
        datastore.load_sample(5)


def test_reopen_and_resume(datastore, tmp_path, spec):
    datastore.save_sample(0, sample_spectra(0))
    datastore.save_sample(2, sample_spectra(2))
    reopened = EnsembleDataStore(tmp_path / "run.zarr", spec)
    assert reopened.completed_samples == [0, 2]
    assert reopened.spec == spec
    assert reopened.expected_class == "GUE"
    assert not reopened.is_complete


def test_reopen_with_more_samples(datastore, tmp_path, spec):
    reopened = EnsembleDataStore(tmp_path / "run.zarr", spec.with_samples(10), n_samples=10)
    assert reopened.n_samples == 10


def test_reopen_with_other_model(datastore, tmp_path):
    other = ModelSpec("overlapping_clusters_syk", N=12, M=2, seed=5)
    with pytest.raises(ConfigError):
        EnsembleDataStore(tmp_path / "run.zarr", other)


def test_newer_format_is_rejected(datastore, tmp_path):
    header_path = tmp_path / "run.zarr" / ".zattrs"
    header = json.loads(header_path.read_text())
    header["format_version"] = ARCHIVE_FORMAT_VERSION + 1
    header_path.write_text(json.dumps(header))
    with pytest.raises(ConfigError):
        EnsembleDataStore(tmp_path / "run.zarr")


def test_checksum_mismatch(datastore, tmp_path):
    datastore.save_sample(0, sample_spectra(0))
    attrs_path = tmp_path / "run.zarr" / "records" / "sample000000" / ".zattrs"
    attrs = json.loads(attrs_path.read_text())
    attrs["parity=-1"]["sha256"] = "0" * 64
    attrs_path.write_text(json.dumps(attrs))
    with pytest.raises(NumericalError):
        datastore.load_sample(0)
    assert len(datastore.load_sample(0, verify=False)) == 2


def test_load_ensemble_groupings(datastore):
    for sample_id in range(3):
        datastore.save_sample(sample_id, sample_spectra(sample_id))
    by_sector = datastore.load_ensemble()
    by_sample = datastore.load_ensemble(by="sample")
    assert len(by_sector) == 6
    assert len(by_sample) == 3
    assert by_sample[0].size == 32
    assert np.all(np.diff(by_sample[1]) >= 0)
    assert datastore.degeneracy_factor() == 2
    with pytest.raises(ValueError):
        datastore.load_ensemble(by="sector_pair")


def test_finalize_is_reproducible(tmp_path, spec, policy):
    checksums = []
    for name in ("a.zarr", "b.zarr"):
        store = EnsembleDataStore(tmp_path / name, spec, policy)
        for sample_id in (1, 0):
            store.save_sample(sample_id, sample_spectra(sample_id))
        checksums.append(store.finalize())
        assert store.is_complete
        assert store.archive_checksum == checksums[-1]
    assert checksums[0] == checksums[1]


def test_new_sample_clears_completion(datastore):
    datastore.save_sample(0, sample_spectra(0))
    datastore.finalize()
    datastore.save_sample(1, sample_spectra(1))
    assert not datastore.is_complete
    assert datastore.archive_checksum is None


def test_sector_key():
    assert EnsembleDataStore._sector_key("parity=+1,P=-1") == "parity_p1__P_m1"
    assert EnsembleDataStore._sector_key("full") == "full"


def test_kvstore_key():
    assert EnsembleDataStore._get_kvstore_key("/tmp/a.zarr") == {"driver": "file", "path": "/tmp/a.zarr"}
    key = EnsembleDataStore._get_kvstore_key(Path("/tmp") / "run.zarr" / "0" / "full.zarr")
    assert key == {"driver": "file", "path": "/tmp/run.zarr/0/full.zarr"}
