"""
Run disorder ensembles into an eigenvalue archive.

Each sample is built, split into symmetry sectors and diagonalised by a
worker; results stream back in sample order to a single writer that appends
them to the archive. A rerun with the same configuration skips archived
samples, so interrupted runs resume where they stopped.

History:
---------
- **2026/10**: Dense capacity check up front, single BLAS thread setup.
- **2026/10**: Automatic ensemble size and Majorana count cap.
- **2026/10**: Initial commit.
"""

from dataclasses import dataclass, field, asdict, replace
from math import ceil
from pathlib import Path
from typing import Union, Optional
import warnings
from joblib import Parallel, delayed, parallel_config
from threadpoolctl import threadpool_limits
from tqdm import tqdm

from sykchaosanalysis.EnsembleDataStore import EnsembleDataStore
from sykchaosanalysis.HamiltonianFactory import HamiltonianFactory, ModelSpec
from sykchaosanalysis.utils.dataio import read_config_file, resolve_output_root
from sykchaosanalysis.utils.errors import CapacityError, ConfigError, ParameterError
from sykchaosanalysis.utils.operators import check_dense_capacity
from sykchaosanalysis.utils.sectors import SectorPolicy, SectorSpectrum, resolve_sectors

DIAGNOSTICS = ("dos", "spacings", "gap_ratio", "sff", "gatecost")
DEFAULT_DIAGNOSTICS = ("dos", "spacings", "gap_ratio", "sff")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs besides the model itself.

    Parameters
    ----------
    spec: ModelSpec
        model specification; ``spec.samples`` is the ensemble size or ``auto``
    diagnostics: tuple[str, ...]
        subset of ``dos, spacings, gap_ratio, sff, gatecost``
    output_dir: Optional[Path]
        output root, falls back to ``$SYKCHAOS_OUTPUT_ROOT`` then ``./syk_output``
    worker_count: int
        worker processes for sample-level parallelism
    poly_degree: int
        degree of the unfolding staircase fit
    edge_trim: float
        fraction of levels dropped at each band edge before unfolding
    sff_points: int
        number of SFF time points
    sff_log_tmin: float
        log10 of the first SFF time in units of 1/std(E)
    sff_log_tmax: float
        log10 of the last SFF time
    gap_ratio_bins: int
        histogram bins of the gap-ratio distribution
    bulk_fraction: float
        central share of gap-ratio indices counted as bulk
    gap_ratio_indices: int
        lowest indices averaged for the edge gap-ratio mean
    max_dim: Optional[int]
        dense dimension cap, None for the library default
    memory_budget_gb: Optional[float]
        dense memory budget, None for the library default
    max_majoranas: int
        largest fermionic N accepted without override
    target_levels: float
        pooled level count aimed for by ``samples = auto``
    max_auto_samples: int
        cap on the automatic ensemble size
    all_cluster_sectors: bool
        gauged clusters: keep every cluster-parity sector
    check_charges: bool
        verify charge conservation for every sample
    figures: bool
        emit matplotlib figures next to the tables
    """

    spec: ModelSpec
    diagnostics: tuple = DEFAULT_DIAGNOSTICS
    output_dir: Optional[Path] = None
    worker_count: int = 1
    poly_degree: int = 7
    edge_trim: float = 0.02
    sff_points: int = 400
    sff_log_tmin: float = -1.0
    sff_log_tmax: float = 5.0
    gap_ratio_bins: int = 50
    bulk_fraction: float = 0.6
    gap_ratio_indices: int = 5
    max_dim: Optional[int] = None
    memory_budget_gb: Optional[float] = None
    max_majoranas: int = 26
    target_levels: float = 1.7e7
    max_auto_samples: int = 4096
    all_cluster_sectors: bool = False
    check_charges: bool = True
    figures: bool = False
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        diagnostics = self.diagnostics
        if isinstance(diagnostics, str):
            diagnostics = (diagnostics,)
        object.__setattr__(self, "diagnostics", tuple(diagnostics))
        unknown = [d for d in self.diagnostics if d not in DIAGNOSTICS]
        if unknown:
            raise ParameterError(f"unknown diagnostics {unknown}, choose from {DIAGNOSTICS}")
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))
        if self.worker_count < 1:
            raise ParameterError(f"worker_count must be >= 1, got {self.worker_count}")
        if self.poly_degree < 3:
            raise ParameterError(f"poly_degree must be >= 3, got {self.poly_degree}")
        if not 0.0 <= self.edge_trim < 0.5:
            raise ParameterError(f"edge_trim must lie in [0, 0.5), got {self.edge_trim}")
        if not 0.0 < self.bulk_fraction <= 1.0:
            raise ParameterError(f"bulk_fraction must lie in (0, 1], got {self.bulk_fraction}")
        if self.sff_points < 2 or self.sff_log_tmax <= self.sff_log_tmin:
            raise ParameterError("SFF grid needs at least two points and tmax > tmin")
        if self.spec.samples != "auto" and int(self.spec.samples) < 1:
            raise ParameterError(f"samples must be >= 1, got {self.spec.samples}")

    @property
    def n_samples(self) -> int:
        """Ensemble size, resolving ``auto`` against ``target_levels``."""

        if self.spec.samples != "auto":
            return int(self.spec.samples)
        n = ceil(self.target_levels / self.spec.dim)
        return int(min(max(n, 1), self.max_auto_samples))

    @property
    def output_root(self) -> Path:
        return resolve_output_root(self.output_dir)

    @property
    def stem(self) -> str:
        """File stem shared by the archive and the diagnostic tables."""

        return f"{self.spec.tag}_seed{self.spec.seed}"

    @property
    def archive_path(self) -> Path:
        return self.output_root / Path(self.stem + ".zarr")

    def to_config(self) -> dict:
        """Flat mapping readable by `from_config`."""

        config = self.spec.to_config()
        for key, value in asdict(self).items():
            if key in ("spec", "extra") or value is None:
                continue
            if isinstance(value, Path):
                value = str(value)
            if isinstance(value, tuple):
                value = list(value)
            config[key] = value
        return config

    @classmethod
    def from_config(cls, config: dict) -> "RunConfig":
        """Split a parsed mapping into model and run settings.

        Parameters
        ----------
        config: dict
            parsed ``key = value`` mapping

        Returns
        -------
        run_config: RunConfig
            validated run configuration
        """

        spec = ModelSpec.from_config(config)
        model_keys = set(ModelSpec.__dataclass_fields__.keys())
        run_keys = set(cls.__dataclass_fields__.keys()) - {"spec", "extra"}
        values = {key: config[key] for key in run_keys if key in config}
        extra = {
            key: value
            for key, value in config.items()
            if key not in model_keys and key not in run_keys
        }
        if extra:
            warnings.warn(f"ignoring unknown configuration keys {sorted(extra)}")
        if isinstance(values.get("diagnostics"), list):
            values["diagnostics"] = tuple(values["diagnostics"])
        try:
            return cls(spec=spec, extra=extra, **values)
        except TypeError as error:
            raise ConfigError(str(error))

    @classmethod
    def from_file(cls, config_path: Union[Path, str], **overrides) -> "RunConfig":
        """Read a configuration file; keyword overrides win over file values."""

        config = read_config_file(config_path)
        config.update({key: value for key, value in overrides.items() if value is not None})
        return cls.from_config(config)

    def with_overrides(self, **overrides) -> "RunConfig":
        overrides = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **overrides)


def _solve_sample(
    spec: ModelSpec,
    sample_id: int,
    max_dim: Optional[int],
    memory_budget_gb: Optional[float],
    all_cluster_sectors: bool,
    check_charges: bool,
) -> list[SectorSpectrum]:
    """Build, split and diagonalise one sample (runs inside a worker)."""

    factory = HamiltonianFactory(spec)
    instance = factory.build(sample_id)
    dense = instance.to_dense(max_dim=max_dim, memory_budget_gb=memory_budget_gb)
    policy = SectorPolicy.for_spec(spec, all_cluster_sectors=all_cluster_sectors)
    return resolve_sectors(dense, policy, check=check_charges)


class EnsembleRunner:
    """Drive one disorder ensemble into an `EnsembleDataStore`.

    Parameters
    ----------
    config: RunConfig
        run configuration
    verbose: int, default 1
        0 silent, 1 progress bar, 2 per-run diagnostics
    """

    def __init__(self, config: RunConfig, verbose: int = 1):
        self._config = config
        self._verbose = verbose
        self._policy = SectorPolicy.for_spec(
            config.spec, all_cluster_sectors=config.all_cluster_sectors
        )
        self._check_capacity()

    @property
    def config(self) -> RunConfig:
        return self._config

    @property
    def policy(self) -> SectorPolicy:
        return self._policy

    def _check_capacity(self):
        """Refuse oversized models before any archive is written."""

        N = self._config.spec.n_majoranas
        if N is not None and N > self._config.max_majoranas:
            raise CapacityError(
                f"N = {N} Majoranas (dimension 2**{N // 2}) exceeds max_majoranas = "
                f"{self._config.max_majoranas}; raise max_majoranas to override"
            )
        # complex128 is the widest matrix any family builds
        check_dense_capacity(
            self._config.spec.dim,
            16,
            self._config.max_dim,
            self._config.memory_budget_gb,
        )

    def open_datastore(self) -> EnsembleDataStore:
        """Open or create the archive of this run."""

        self._config.output_root.mkdir(parents=True, exist_ok=True)
        return EnsembleDataStore(
            self._config.archive_path,
            spec=self._config.spec,
            policy=self._policy,
            n_samples=self._config.n_samples,
        )

    def run_ensemble(self) -> EnsembleDataStore:
        """Diagonalise every pending sample and finalise the archive.

        Returns
        -------
        datastore: EnsembleDataStore
            complete, checksummed archive
        """

        config = self._config
        datastore = self.open_datastore()
        completed = set(datastore.completed_samples)
        pending = [i for i in range(config.n_samples) if i not in completed]

        if self._verbose > 1:
            print(
                f"{config.spec.tag}: dim {config.spec.dim}, policy {self._policy.kind}, "
                f"{len(pending)} of {config.n_samples} samples pending"
            )

        tasks = (
            delayed(_solve_sample)(
                config.spec,
                sample_id,
                config.max_dim,
                config.memory_budget_gb,
                config.all_cluster_sectors,
                config.check_charges,
            )
            for sample_id in pending
        )
        # one BLAS thread per solve on every path, in-process runs included
        with parallel_config(backend="loky", inner_max_num_threads=1), threadpool_limits(limits=1):
            results = Parallel(n_jobs=config.worker_count, return_as="generator")(tasks)

            if self._verbose >= 1:
                results = tqdm(results, total=len(pending), desc="samples", leave=False)

            # results arrive in sample order; this loop is the only writer
            for sample_id, spectra in zip(pending, results):
                datastore.save_sample(sample_id, spectra)

        checksum = datastore.finalize()
        if self._verbose > 1:
            print(f"archive {datastore.archive_path} complete, sha256 {checksum}")
        return datastore
