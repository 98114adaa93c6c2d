"""
Diagnostics tables, reports and figures from an eigenvalue archive.

Reads an `EnsembleDataStore`, computes the density of states, unfolded
spacing distributions, gap-ratio statistics and the spectral form factor, and
writes one whitespace-separated table per diagnostic plus a report with
pass/fail checks against the expected random-matrix class.

History:
---------
- **2026/10**: Figure manifest and matplotlib figures.
- **2026/10**: Initial commit.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union, Optional
import warnings
import numpy as np
import pandas as pd

from sykchaosanalysis.EnsembleDataStore import EnsembleDataStore
from sykchaosanalysis.EnsembleRunner import RunConfig
from sykchaosanalysis.HamiltonianFactory import ModelSpec
from sykchaosanalysis.utils.circuits import gate_cost_report
from sykchaosanalysis.utils.dataio import write_table
from sykchaosanalysis.utils.errors import InputError, UnfoldingError
from sykchaosanalysis.utils.sectors import ZERO_MODE_TOL
from sykchaosanalysis.utils.spectral import (
    GAP_RATIO_REFERENCE,
    DosHistogram,
    GapRatioStats,
    SffSeries,
    density_of_states,
    drop_zero_modes,
    gap_ratio_stats,
    spectral_form_factor,
    surmise_distance,
    unfold,
    wigner_surmise,
)

# pass/fail thresholds of the summary report
GAP_RATIO_TOLERANCE = 0.01
SURMISE_DISTANCE_MAX = 0.05
PLATEAU_REL_TOLERANCE = 0.2
RAMP_SLOPE_RANGE = (0.8, 1.2)

_FAMILY_NAMES = {
    "qudit_syk": "qudit SYK",
    "clusters_spin_syk": "clusters spin-SYK",
    "gauged_clusters_syk": "gauged clusters SYK",
    "overlapping_clusters_syk": "overlapping clusters SYK",
    "original_syk": "original SYK",
}


def _figure_key(kind: str, spec: ModelSpec) -> str:
    if spec.family == "overlapping_clusters_syk":
        return f"{kind}_overlapping_m{spec.M}"
    if spec.family == "qudit_syk":
        return f"{kind}_qudit"
    return f"{kind}_{spec.family.removesuffix('_syk')}"


def figure_manifest(config: RunConfig) -> pd.DataFrame:
    """Map every table a run emits to the figure it feeds.

    Parameters
    ----------
    config: RunConfig
        run configuration

    Returns
    -------
    manifest: pd.DataFrame
        columns ``table``, ``figure`` and ``description``; descriptions
        record the unfolding and grid settings used
    """

    spec = config.spec
    stem = config.stem
    model = _FAMILY_NAMES[spec.family]
    rows = []
    for diagnostic in config.diagnostics:
        if diagnostic == "dos":
            rows.append(
                (f"{stem}_dos.txt", _figure_key("dos", spec), f"density of states of {model}")
            )
        elif diagnostic == "spacings":
            rows.append(
                (
                    f"{stem}_spacings.txt",
                    _figure_key("spacings", spec),
                    f"unfolded nearest-neighbour spacings of {model} against the Wigner surmise "
                    f"(polynomial degree {config.poly_degree}, edge trim {config.edge_trim})",
                )
            )
        elif diagnostic == "gap_ratio":
            rows.append(
                (
                    f"{stem}_gap_ratio_index.txt",
                    _figure_key("gapratio_index", spec),
                    f"mean gap ratio per level index of {model}",
                )
            )
            rows.append(
                (
                    f"{stem}_gap_ratio_hist.txt",
                    _figure_key("gapratio_hist", spec),
                    f"gap-ratio distribution of {model} ({config.gap_ratio_bins} bins)",
                )
            )
        elif diagnostic == "sff":
            rows.append(
                (
                    f"{stem}_sff.txt",
                    _figure_key("sff", spec),
                    f"spectral form factor of {model} ({config.sff_points} log-spaced times, "
                    f"10^{config.sff_log_tmin:g} to 10^{config.sff_log_tmax:g} in 1/std(E))",
                )
            )
        elif diagnostic == "gatecost":
            rows.append(
                (
                    f"{stem}_gatecost.txt",
                    "gatecost_counts",
                    f"term and CNOT counts per Trotter step of {model} against original SYK",
                )
            )
    return pd.DataFrame(rows, columns=["table", "figure", "description"])


def write_manifest(manifest: pd.DataFrame, manifest_path: Union[Path, str]):
    """Write a figure manifest as tab-separated text (descriptions hold spaces)."""

    manifest.to_csv(manifest_path, sep="\t", index=False)


@dataclass
class DiagnosticsBundle:
    """Results of `SpectralAnalyzer.compute_diagnostics`."""

    dos: Optional[DosHistogram] = None
    spacings: Optional[np.ndarray] = None
    surmise_distances: dict = field(default_factory=dict)
    gap_ratio: Optional[GapRatioStats] = None
    sff: Optional[SffSeries] = None
    gatecost: Optional[pd.DataFrame] = None
    n_zero_modes: int = 0
    unfolding_failures: int = 0
    skipped: list = field(default_factory=list)
    report: Optional[pd.DataFrame] = None
    tables: dict = field(default_factory=dict)


class SpectralAnalyzer:
    """Diagnostics for one archived ensemble.

    Parameters
    ----------
    datastore: Union[EnsembleDataStore, Path, str]
        archive or its path
    config: Optional[RunConfig], default None
        run configuration; default settings for the archived model if None
    output_dir: Optional[Union[Path, str]], default None
        where tables go; ``config.output_root`` if None
    verbose: int, default 1
        0 silent, 1 status lines, 2 per-diagnostic detail
    """

    def __init__(
        self,
        datastore: Union[EnsembleDataStore, Path, str],
        config: Optional[RunConfig] = None,
        output_dir: Optional[Union[Path, str]] = None,
        verbose: int = 1,
    ):
        if not isinstance(datastore, EnsembleDataStore):
            datastore = EnsembleDataStore(datastore)
        self._datastore = datastore
        if config is None:
            config = RunConfig(spec=datastore.spec)
        self._config = config
        self._output_dir = Path(output_dir) if output_dir is not None else config.output_root
        self._verbose = verbose

    @property
    def datastore(self) -> EnsembleDataStore:
        return self._datastore

    @property
    def config(self) -> RunConfig:
        return self._config

    @property
    def output_dir(self) -> Path:
        return self._output_dir

    @property
    def stem(self) -> str:
        return self._config.stem

    def _table_path(self, name: str) -> Path:
        return self._output_dir / Path(f"{self.stem}_{name}.txt")

    def _sector_levels(self) -> tuple[list[np.ndarray], int]:
        """Per-(sample, sector) levels without zero modes, and the number removed."""

        spectra = []
        n_zero = 0
        for levels in self._datastore.load_ensemble(by="sector"):
            kept, removed = drop_zero_modes(levels, ZERO_MODE_TOL)
            spectra.append(kept)
            n_zero += removed
        return spectra, n_zero

    def compute_diagnostics(self, diagnostics: Optional[tuple] = None) -> DiagnosticsBundle:
        """Compute and write the requested diagnostics.

        Parameters
        ----------
        diagnostics: Optional[tuple], default None
            subset of ``dos, spacings, gap_ratio, sff, gatecost``;
            ``config.diagnostics`` if None

        Returns
        -------
        bundle: DiagnosticsBundle
            computed diagnostics and the paths of every written table
        """

        diagnostics = tuple(diagnostics or self._config.diagnostics)
        self._output_dir.mkdir(parents=True, exist_ok=True)
        bundle = DiagnosticsBundle()
        spectral = [d for d in diagnostics if d != "gatecost"]
        if spectral and not self._datastore.completed_samples:
            raise InputError(f"archive {self._datastore.archive_path} holds no samples")

        sector_spectra, n_zero = self._sector_levels() if spectral else ([], 0)
        bundle.n_zero_modes = n_zero
        if n_zero:
            warnings.warn(f"{n_zero} zero modes excluded from spacing and gap-ratio statistics")

        if "dos" in diagnostics:
            self._dos(bundle)
        if "spacings" in diagnostics:
            self._spacings(bundle, sector_spectra)
        if "gap_ratio" in diagnostics:
            self._gap_ratio(bundle, sector_spectra)
        if "sff" in diagnostics:
            self._sff(bundle)
        if "gatecost" in diagnostics:
            self._gatecost(bundle)

        bundle.report = self._report(bundle)
        report_path = self._table_path("report")
        write_table(bundle.report, report_path)
        bundle.tables["report"] = report_path

        manifest_path = self._table_path("manifest")
        write_manifest(figure_manifest(self._config), manifest_path)
        bundle.tables["manifest"] = manifest_path

        if self._config.figures:
            self.emit_figures(bundle)
        if self._verbose >= 1:
            print(f"wrote {len(bundle.tables)} tables to {self._output_dir}")
        return bundle

    def _dos(self, bundle: DiagnosticsBundle):
        # full spectra, zero modes included
        dos = density_of_states(self._datastore.load_ensemble(by="sector"))
        bundle.dos = dos
        path = self._table_path("dos")
        write_table(
            pd.DataFrame(
                {
                    "E_lo": dos.bin_edges[:-1],
                    "E_hi": dos.bin_edges[1:],
                    "density": dos.density,
                }
            ),
            path,
        )
        bundle.tables["dos"] = path

    def _spacings(self, bundle: DiagnosticsBundle, sector_spectra: list[np.ndarray]):
        pooled = []
        for levels in sector_spectra:
            try:
                pooled.append(
                    unfold(levels, self._config.poly_degree, self._config.edge_trim).spacings
                )
            except (UnfoldingError, InputError) as error:
                bundle.unfolding_failures += 1
                if self._verbose > 1:
                    print(f"unfolding skipped: {error}")
        if bundle.unfolding_failures:
            warnings.warn(f"{bundle.unfolding_failures} spectra could not be unfolded and were skipped")
        if not pooled:
            warnings.warn("no spectrum could be unfolded; spacing diagnostic skipped")
            bundle.skipped.append("spacings")
            return

        spacings = np.concatenate(pooled)
        bundle.spacings = spacings
        classes = ("Poisson", "GOE", "GUE", "GSE")
        density = None
        for cls in classes:
            distance, edges, density = surmise_distance(spacings, cls)
            bundle.surmise_distances[cls] = distance
        centers = 0.5 * (edges[:-1] + edges[1:])
        table = {"s_lo": edges[:-1], "s_hi": edges[1:], "density": density}
        for cls in classes:
            table[cls] = wigner_surmise(cls, centers)
        path = self._table_path("spacings")
        write_table(pd.DataFrame(table), path)
        bundle.tables["spacings"] = path

    def _gap_ratio(self, bundle: DiagnosticsBundle, sector_spectra: list[np.ndarray]):
        try:
            stats = gap_ratio_stats(
                sector_spectra,
                bins=self._config.gap_ratio_bins,
                bulk_fraction=self._config.bulk_fraction,
                edge_count=self._config.gap_ratio_indices,
            )
        except InputError as error:
            warnings.warn(f"gap-ratio diagnostic skipped: {error}")
            bundle.skipped.append("gap_ratio")
            return
        bundle.gap_ratio = stats

        index_path = self._table_path("gap_ratio_index")
        write_table(
            pd.DataFrame(
                {
                    "i": np.arange(1, stats.per_index_mean.size + 1),
                    "mean": stats.per_index_mean,
                    "stderr": stats.per_index_stderr,
                    "count": stats.per_index_count,
                }
            ),
            index_path,
        )
        hist_path = self._table_path("gap_ratio_hist")
        write_table(
            pd.DataFrame(
                {
                    "r_lo": stats.histogram_edges[:-1],
                    "r_hi": stats.histogram_edges[1:],
                    "density": stats.histogram_density,
                }
            ),
            hist_path,
        )
        bundle.tables["gap_ratio_index"] = index_path
        bundle.tables["gap_ratio_hist"] = hist_path

    def _sff(self, bundle: DiagnosticsBundle):
        series = spectral_form_factor(
            self._datastore.load_ensemble(by="sample"),
            degeneracy_factor=self._datastore.degeneracy_factor(),
            n_points=self._config.sff_points,
            log_tmin=self._config.sff_log_tmin,
            log_tmax=self._config.sff_log_tmax,
        )
        bundle.sff = series
        path = self._table_path("sff")
        write_table(pd.DataFrame({"t": series.times, "sff": series.sff}), path)
        bundle.tables["sff"] = path

    def _gatecost(self, bundle: DiagnosticsBundle):
        spec = self._config.spec
        if not spec.is_qubit_model:
            warnings.warn("gate cost is defined for qubit models only; diagnostic skipped")
            bundle.skipped.append("gatecost")
            return
        bundle.gatecost = gate_cost_report(spec).to_frame()
        path = self._table_path("gatecost")
        write_table(bundle.gatecost, path)
        bundle.tables["gatecost"] = path

    def expected_plateau(self) -> float:
        """Late-time SFF value: one over the stored levels per sample."""

        index = self._datastore.record_index
        per_sample = index.groupby("sample_id")["n_levels"].sum()
        return float(1.0 / per_sample.mean())

    def _report(self, bundle: DiagnosticsBundle) -> pd.DataFrame:
        """Measured metrics with targets and pass/fail flags."""

        expected = self._datastore.expected_class if self._datastore.completed_samples else None
        rows = []

        def add(metric, value, target=np.nan, passed="n/a"):
            rows.append({"metric": metric, "value": value, "target": target, "pass": passed})

        add("samples", float(len(self._datastore.completed_samples)))
        add("zero_modes", float(bundle.n_zero_modes))
        add("unfolding_failures", float(bundle.unfolding_failures))
        if bundle.dos is not None:
            area = float(np.sum(bundle.dos.density * np.diff(bundle.dos.bin_edges)))
            add("dos_integral", area, 1.0, str(abs(area - 1.0) < 1e-9))
            add("dos_edge_mass", bundle.dos.edge_mass_fraction)
        for cls, distance in bundle.surmise_distances.items():
            if cls == expected:
                add(f"surmise_distance_{cls}", distance, SURMISE_DISTANCE_MAX, str(distance < SURMISE_DISTANCE_MAX))
            else:
                add(f"surmise_distance_{cls}", distance)
        if bundle.gap_ratio is not None:
            stats = bundle.gap_ratio
            if expected is not None:
                target = GAP_RATIO_REFERENCE[expected]
                add(
                    "gap_ratio_bulk",
                    stats.bulk_mean,
                    target,
                    str(abs(stats.bulk_mean - target) <= GAP_RATIO_TOLERANCE),
                )
            else:
                add("gap_ratio_bulk", stats.bulk_mean)
            add("gap_ratio_bulk_stderr", stats.bulk_stderr)
            add("gap_ratio_edge", stats.edge_mean)
            add("gap_ratio_edge_contrast", stats.edge_contrast)
            add("gap_ratio_undefined", float(stats.n_undefined))
        if bundle.sff is not None:
            plateau = self.expected_plateau()
            add(
                "sff_plateau",
                bundle.sff.plateau,
                plateau,
                str(abs(bundle.sff.plateau - plateau) <= PLATEAU_REL_TOLERANCE * plateau),
            )
            slope = bundle.sff.ramp_slope
            low, high = RAMP_SLOPE_RANGE
            add("sff_ramp_slope", slope, 1.0, str(bool(low <= slope <= high)))
            add("sff_dip_time", bundle.sff.dip_time)
        if bundle.gatecost is not None:
            row = bundle.gatecost.iloc[0]
            add("gatecost_terms", float(row["n_terms"]))
            add("gatecost_cnots_per_step", float(row["cnots_per_step"]))
            add("gatecost_cnot_ratio", float(row["cnot_ratio"]))
        return pd.DataFrame(rows, columns=["metric", "value", "target", "pass"])

    def emit_figures(self, bundle: DiagnosticsBundle) -> list[Path]:
        """Save one PNG per computed diagnostic next to its table.

        Parameters
        ----------
        bundle: DiagnosticsBundle
            output of `compute_diagnostics`

        Returns
        -------
        figures: list[Path]
            written figure files
        """

        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        written = []
        model = _FAMILY_NAMES[self._config.spec.family]

        def save(fig, name):
            path = self._output_dir / Path(f"{self.stem}_{name}.png")
            fig.tight_layout()
            fig.savefig(path, dpi=150)
            plt.close(fig)
            written.append(path)

        if bundle.dos is not None:
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.stairs(bundle.dos.density, bundle.dos.bin_edges, fill=True, alpha=0.6)
            ax.set_xlabel("E")
            ax.set_ylabel(r"$\rho(E)$")
            ax.set_title(model)
            save(fig, "dos")

        if bundle.spacings is not None:
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.hist(bundle.spacings, bins=50, range=(0.0, 4.0), density=True, alpha=0.6, label="data")
            s = np.linspace(0.0, 4.0, 400)
            for cls in ("Poisson", "GOE", "GUE"):
                ax.plot(s, wigner_surmise(cls, s), label=cls)
            ax.set_xlabel("s")
            ax.set_ylabel("P(s)")
            ax.legend()
            save(fig, "spacings")

        if bundle.gap_ratio is not None:
            stats = bundle.gap_ratio
            fig, ax = plt.subplots(figsize=(5, 4))
            index = np.arange(1, stats.per_index_mean.size + 1)
            ax.errorbar(index, stats.per_index_mean, yerr=stats.per_index_stderr, fmt=".", ms=2)
            for cls in ("GOE", "GUE"):
                ax.axhline(GAP_RATIO_REFERENCE[cls], ls="--", lw=0.8, label=cls)
            ax.set_xlabel("i")
            ax.set_ylabel(r"$\langle r_i \rangle$")
            ax.legend()
            save(fig, "gap_ratio_index")

        if bundle.sff is not None:
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.loglog(bundle.sff.times, bundle.sff.sff)
            ax.axhline(self.expected_plateau(), ls="--", lw=0.8, color="k")
            ax.set_xlabel("t")
            ax.set_ylabel("SFF")
            ax.set_title(model)
            save(fig, "sff")

        if self._verbose > 1:
            print(f"wrote {len(written)} figures")
        return written
