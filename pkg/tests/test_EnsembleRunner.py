import pytest
import numpy as np
from pathlib import Path

import importlib

# The package re-exports the EnsembleRunner class under the submodule's name,
# so fetch the module object itself.
runner_module = importlib.import_module("sykchaosanalysis.EnsembleRunner")
from sykchaosanalysis.EnsembleRunner import EnsembleRunner, RunConfig
from sykchaosanalysis.HamiltonianFactory import ModelSpec
from sykchaosanalysis.utils.errors import CapacityError, ConfigError, ParameterError


@pytest.fixture
def qudit_config(tmp_path):
    spec = ModelSpec("qudit_syk", d=3, L=3, q=2, seed=2, samples=10)
    return RunConfig(spec=spec, output_dir=tmp_path)


@pytest.fixture
def n12_config(tmp_path):
    spec = ModelSpec("overlapping_clusters_syk", N=12, M=2, seed=1, samples=4)
    return RunConfig(spec=spec, output_dir=tmp_path)


def test_run_config_defaults(qudit_config, tmp_path):
    assert qudit_config.diagnostics == ("dos", "spacings", "gap_ratio", "sff")
    assert qudit_config.n_samples == 10
    assert qudit_config.stem == "qudit_syk_d3_L3_q2_seed2"
    assert qudit_config.archive_path == tmp_path / "qudit_syk_d3_L3_q2_seed2.zarr"


def test_auto_samples():
    spec = ModelSpec("qudit_syk", d=3, L=3, q=2, samples="auto")
    assert RunConfig(spec=spec).n_samples == 4096
    assert RunConfig(spec=spec, target_levels=270).n_samples == 10


@pytest.mark.parametrize(
    "overrides",
    [
        {"worker_count": 0},
        {"diagnostics": ("dos", "entropy")},
        {"edge_trim": 0.5},
        {"bulk_fraction": 0.0},
        {"sff_log_tmin": 5.0},
        {"poly_degree": 2},
    ],
)
def test_run_config_validation(overrides):
    spec = ModelSpec("original_syk", N=8)
    with pytest.raises(ParameterError):
        RunConfig(spec=spec, **overrides)


def test_run_config_round_trip(n12_config):
    config = n12_config.with_overrides(diagnostics=("dos", "sff"), worker_count=2)
    restored = RunConfig.from_config(config.to_config())
    assert restored == config
    assert restored.diagnostics == ("dos", "sff")


def test_run_config_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "family = overlapping_clusters_syk\nN = 14\nM = 2\nsamples = 3\n"
        "diagnostics = dos, gap_ratio\nsff_points = 50\n"
    )
    config = RunConfig.from_file(path, worker_count=2, seed=None)
    assert config.spec.N == 14
    assert config.diagnostics == ("dos", "gap_ratio")
    assert config.sff_points == 50
    assert config.worker_count == 2


def test_unknown_keys_warn(tmp_path):
    with pytest.warns(UserWarning, match="colour"):
        config = RunConfig.from_config({"family": "original_syk", "N": 8, "colour": "red"})
    assert config.extra == {"colour": "red"}


def test_bad_value_type_is_config_error():
    with pytest.raises((ConfigError, ParameterError)):
        RunConfig.from_config({"family": "original_syk", "N": 8, "worker_count": "many"})


def test_majorana_cap(tmp_path):
    spec = ModelSpec("overlapping_clusters_syk", N=28, M=2)
    with pytest.raises(CapacityError, match="max_majoranas"):
        EnsembleRunner(RunConfig(spec=spec, output_dir=tmp_path), verbose=0)
    assert not list(tmp_path.iterdir())


@pytest.mark.parametrize(
    "overrides,match",
    [
        ({"max_dim": 10}, "exceeds the configured maximum"),
        ({"memory_budget_gb": 1e-9}, "budget"),
    ],
)
def test_dense_capacity_checked_before_archive(tmp_path, overrides, match):
    spec = ModelSpec("qudit_syk", d=3, L=4, q=2, samples=2)
    config = RunConfig(spec=spec, output_dir=tmp_path / "out", **overrides)
    with pytest.raises(CapacityError, match=match):
        EnsembleRunner(config, verbose=0)
    assert not config.archive_path.exists()
    assert not (tmp_path / "out").exists()


@pytest.mark.parametrize("worker_count", [1, 2])
def test_blas_threads_limited_on_every_path(tmp_path, mocker, worker_count):
    limits = mocker.patch.object(
        runner_module, "threadpool_limits", wraps=runner_module.threadpool_limits
    )
    spec = ModelSpec("qudit_syk", d=3, L=3, q=2, samples=2)
    config = RunConfig(spec=spec, output_dir=tmp_path, worker_count=worker_count)
    EnsembleRunner(config, verbose=0).run_ensemble()
    limits.assert_called_once_with(limits=1)


def test_qudit_run(qudit_config):
    datastore = EnsembleRunner(qudit_config, verbose=0).run_ensemble()
    assert datastore.completed_samples == list(range(10))
    assert datastore.is_complete
    ensemble = datastore.load_ensemble()
    assert len(ensemble) == 10
    assert all(levels.size == 27 for levels in ensemble)
    assert datastore.expected_class == "GUE"


def test_n12_run_stores_dedoubled_sectors(n12_config):
    datastore = EnsembleRunner(n12_config, verbose=0).run_ensemble()
    index = datastore.record_index
    assert len(index) == 8
    assert set(index["n_levels"]) == {16}
    assert set(index["degeneracy"]) == {2}
    assert datastore.policy_kind == "fermion_parity_real"


def test_runs_are_reproducible(tmp_path, n12_config):
    first = EnsembleRunner(n12_config, verbose=0).run_ensemble()
    second_config = n12_config.with_overrides(output_dir=tmp_path / "again")
    second = EnsembleRunner(second_config, verbose=0).run_ensemble()
    assert first.archive_checksum == second.archive_checksum
    assert first.record_index["sha256"].tolist() == second.record_index["sha256"].tolist()


def test_resume_skips_archived_samples(tmp_path, mocker):
    spec = ModelSpec("qudit_syk", d=3, L=3, q=2, samples=2)
    EnsembleRunner(RunConfig(spec=spec, output_dir=tmp_path), verbose=0).run_ensemble()

    solve = mocker.patch.object(runner_module, "_solve_sample", wraps=runner_module._solve_sample)
    grown = RunConfig(spec=spec.with_samples(5), output_dir=tmp_path)
    datastore = EnsembleRunner(grown, verbose=0).run_ensemble()
    assert solve.call_count == 3
    assert [call.args[1] for call in solve.call_args_list] == [2, 3, 4]
    assert datastore.completed_samples == list(range(5))
    assert datastore.n_samples == 5


def test_resumed_run_matches_uninterrupted_run(tmp_path):
    spec = ModelSpec("qudit_syk", d=3, L=3, q=2, samples=4)
    partial = RunConfig(spec=spec.with_samples(2), output_dir=tmp_path / "resumed")
    EnsembleRunner(partial, verbose=0).run_ensemble()
    resumed = EnsembleRunner(partial.with_overrides(spec=spec), verbose=0).run_ensemble()
    direct = EnsembleRunner(RunConfig(spec=spec, output_dir=tmp_path / "direct"), verbose=0).run_ensemble()
    assert resumed.archive_checksum == direct.archive_checksum


def test_worker_count_does_not_change_results(tmp_path):
    spec = ModelSpec("qudit_syk", d=3, L=3, q=2, samples=4, seed=9)
    serial = EnsembleRunner(RunConfig(spec=spec, output_dir=tmp_path / "serial"), verbose=0)
    pooled = EnsembleRunner(
        RunConfig(spec=spec, output_dir=tmp_path / "pooled", worker_count=2), verbose=0
    )
    serial_store = serial.run_ensemble()
    pooled_store = pooled.run_ensemble()
    for sample_id in range(4):
        assert np.array_equal(
            serial_store.load_sample(sample_id)[0].eigenvalues,
            pooled_store.load_sample(sample_id)[0].eigenvalues,
        )


def test_output_root_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SYKCHAOS_OUTPUT_ROOT", str(tmp_path / "env_root"))
    spec = ModelSpec("qudit_syk", d=3, L=3, q=2, samples=1)
    datastore = EnsembleRunner(RunConfig(spec=spec), verbose=0).run_ensemble()
    assert Path(datastore.archive_path).parent == tmp_path / "env_root"
