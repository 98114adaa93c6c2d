"""
Level-statistics diagnostics for ensembles of spectra.

Density of states, polynomial unfolding, nearest-neighbour spacing
distributions against the Wigner surmise, raw consecutive-gap ratios and the
spectral form factor. An ensemble is a sequence of 1D arrays of sorted
levels, one per disorder sample (or per sample and sector).

History:
---------
- **2026/10**: Edge-vs-bulk gap-ratio contrast and random-matrix oracles.
- **2026/10**: Initial commit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union
import numpy as np
from numpy.typing import ArrayLike
from numpy.polynomial import Polynomial
from numba import njit, prange
import scipy.linalg as linalg

from sykchaosanalysis.utils.errors import InputError, ParameterError, UnfoldingError

__all__ = [
    "GAP_RATIO_REFERENCE",
    "DosHistogram",
    "UnfoldedSpectrum",
    "GapRatioStats",
    "SffSeries",
    "density_of_states",
    "drop_zero_modes",
    "unfold",
    "unfold_ensemble",
    "wigner_surmise",
    "surmise_distance",
    "gap_ratios",
    "gap_ratio_stats",
    "default_time_grid",
    "spectral_form_factor",
    "sample_gaussian_ensemble",
    "gap_ratio_oracle",
]

GAP_RATIO_REFERENCE = {
    "Poisson": 2.0 * np.log(2.0) - 1.0,
    "GOE": 0.5307,
    "GUE": 0.59975,
    "GSE": 0.6744,
}


def _as_ensemble(ensemble: Union[ArrayLike, Sequence[ArrayLike]]) -> list[np.ndarray]:
    if isinstance(ensemble, np.ndarray) and ensemble.ndim == 1:
        ensemble = [ensemble]
    spectra = [np.sort(np.asarray(levels, dtype=np.float64).ravel()) for levels in ensemble]
    spectra = [levels for levels in spectra if levels.size]
    if not spectra:
        raise InputError("ensemble contains no levels")
    return spectra


@dataclass
class DosHistogram:
    bin_edges: np.ndarray
    density: np.ndarray
    n_levels: int
    edge_mass_fraction: float

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


def density_of_states(
    ensemble: Sequence[ArrayLike],
    bins: Union[int, str, ArrayLike] = "fd",
    edge_fraction: float = 0.05,
) -> DosHistogram:
    """Normalised histogram of the pooled levels.

    Parameters
    ----------
    ensemble: Sequence[ArrayLike]
        spectra
    bins: Union[int, str, ArrayLike], default "fd"
        bin count, numpy rule name or explicit edges; Freedman-Diaconis by default
    edge_fraction: float, default 0.05
        width share at each band end used for the edge-mass fraction

    Returns
    -------
    dos: DosHistogram
        histogram integrating to one
    """

    pooled = np.concatenate(_as_ensemble(ensemble))
    width = float(pooled.max() - pooled.min())
    if isinstance(bins, str) and width == 0.0:
        bins = 1
    density, edges = np.histogram(pooled, bins=bins, density=True)
    if width > 0.0:
        low = pooled.min() + edge_fraction * width
        high = pooled.max() - edge_fraction * width
        edge_mass = float(np.mean((pooled < low) | (pooled > high)))
    else:
        edge_mass = 1.0
    return DosHistogram(edges, density, int(pooled.size), edge_mass)


def drop_zero_modes(levels: ArrayLike, tol: float = 1e-10) -> Tuple[np.ndarray, int]:
    """Remove levels with ``|E| < tol``; returns the kept levels and the count removed."""

    levels = np.asarray(levels, dtype=np.float64)
    zero = np.abs(levels) < tol
    return levels[~zero], int(np.count_nonzero(zero))


@dataclass
class UnfoldedSpectrum:
    """Bulk of an unfolded spectrum with unit mean spacing."""

    unfolded: np.ndarray
    spacings: np.ndarray
    staircase_fit: Polynomial
    retained: Tuple[int, int]
    raw_mean_spacing: float
    fit_residual: float


MIN_UNFOLD_LEVELS = 50


def unfold(
    spectrum: ArrayLike,
    poly_degree: int = 7,
    edge_trim: float = 0.02,
    max_residual: float = 0.1,
) -> UnfoldedSpectrum:
    """Unfold a spectrum with a polynomial fit of its staircase.

    Parameters
    ----------
    spectrum: ArrayLike
        sorted levels, at least 50
    poly_degree: int, default 7
        degree of the fitted staircase, at least 3
    edge_trim: float, default 0.02
        fraction of levels discarded at each end
    max_residual: float, default 0.1
        largest accepted RMS deviation between fit and staircase on the
        retained range, as a fraction of the level count

    Returns
    -------
    unfolded: UnfoldedSpectrum
        retained unfolded levels, spacings normalised to unit mean, the mean
        spacing before normalisation and the relative fit residual

    Raises
    ------
    ParameterError
        if ``poly_degree < 3`` or ``edge_trim`` is outside ``[0, 0.5)``
    InputError
        if the spectrum holds fewer than 50 levels
    UnfoldingError
        if the fitted staircase decreases on the retained range or misses
        the staircase by more than ``max_residual``
    """

    if poly_degree < 3:
        raise ParameterError(f"poly_degree must be >= 3, got {poly_degree}")
    if not 0.0 <= edge_trim < 0.5:
        raise ParameterError(f"edge_trim must be in [0, 0.5), got {edge_trim}")
    levels = np.sort(np.asarray(spectrum, dtype=np.float64).ravel())
    n_levels = levels.size
    if n_levels < MIN_UNFOLD_LEVELS:
        raise InputError(f"{n_levels} levels are too few to unfold, need {MIN_UNFOLD_LEVELS}")
    n_trim = int(np.floor(edge_trim * n_levels))
    if n_levels - 2 * n_trim < 3:
        raise InputError(f"edge_trim={edge_trim} leaves fewer than three levels")

    staircase = np.arange(n_levels, dtype=np.float64) + 0.5
    fit = Polynomial.fit(levels, staircase, poly_degree)
    bulk = levels[n_trim : n_levels - n_trim]
    grid = np.linspace(bulk[0], bulk[-1], 8 * bulk.size)
    if np.any(fit.deriv()(grid) <= 0.0):
        raise UnfoldingError(
            f"degree-{poly_degree} staircase fit is not monotone on the retained range"
        )

    unfolded = fit(bulk)
    residual = float(
        np.sqrt(np.mean((unfolded - staircase[n_trim : n_levels - n_trim]) ** 2)) / n_levels
    )
    if residual > max_residual:
        raise UnfoldingError(
            f"degree-{poly_degree} staircase fit misses the staircase by {residual:.3f} "
            f"of the level count"
        )
    spacings = np.diff(unfolded)
    raw_mean = float(spacings.mean())
    return UnfoldedSpectrum(
        unfolded,
        spacings / raw_mean,
        fit,
        (n_trim, n_levels - n_trim),
        raw_mean,
        residual,
    )


def unfold_ensemble(
    ensemble: Sequence[ArrayLike],
    poly_degree: int = 7,
    edge_trim: float = 0.02,
) -> np.ndarray:
    """Pooled unit-mean spacings of every spectrum, unfolded one by one."""

    return np.concatenate(
        [unfold(levels, poly_degree, edge_trim).spacings for levels in _as_ensemble(ensemble)]
    )


def wigner_surmise(cls: str, s: ArrayLike) -> np.ndarray:
    """Wigner surmise ``P(s)`` for ``GOE``, ``GUE`` or ``GSE``; ``Poisson`` gives ``exp(-s)``."""

    s = np.asarray(s, dtype=np.float64)
    if cls == "GOE":
        return 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s**2)
    if cls == "GUE":
        return (32.0 / np.pi**2) * s**2 * np.exp(-4.0 * s**2 / np.pi)
    if cls == "GSE":
        return (2.0**18 / (3.0**6 * np.pi**3)) * s**4 * np.exp(-64.0 * s**2 / (9.0 * np.pi))
    if cls == "Poisson":
        return np.exp(-s)
    raise ParameterError(f"unknown ensemble class '{cls}'")


def surmise_distance(
    spacings: ArrayLike,
    cls: str,
    bins: int = 50,
    s_max: float = 4.0,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Integrated absolute deviation between the spacing histogram and a surmise.

    Parameters
    ----------
    spacings: ArrayLike
        unit-mean spacings
    cls: str
        reference class for `wigner_surmise`
    bins: int, default 50
        histogram bins on [0, s_max]
    s_max: float, default 4.0
        upper edge of the histogram

    Returns
    -------
    distance: float
        sum over bins of ``|h - P(s)| ds``
    bin_edges: np.ndarray
        histogram edges
    density: np.ndarray
        histogram normalised by the total number of spacings
    """

    spacings = np.asarray(spacings, dtype=np.float64)
    if spacings.size == 0:
        raise InputError("no spacings to compare")
    counts, edges = np.histogram(spacings, bins=bins, range=(0.0, s_max))
    widths = np.diff(edges)
    density = counts / (spacings.size * widths)
    centers = 0.5 * (edges[1:] + edges[:-1])
    distance = float(np.sum(np.abs(density - wigner_surmise(cls, centers)) * widths))
    return distance, edges, density


def gap_ratios(levels: ArrayLike) -> Tuple[np.ndarray, int]:
    """Raw ratios ``min(d_i, d_{i+1}) / max(d_i, d_{i+1})`` of consecutive gaps.

    Returns
    -------
    ratios: np.ndarray
        one value per level triple, NaN where either gap vanishes
    n_undefined: int
        number of NaN entries
    """

    gaps = np.diff(np.sort(np.asarray(levels, dtype=np.float64)))
    lower = np.minimum(gaps[:-1], gaps[1:])
    upper = np.maximum(gaps[:-1], gaps[1:])
    undefined = lower == 0.0
    ratios = np.full(lower.shape, np.nan)
    ratios[~undefined] = lower[~undefined] / upper[~undefined]
    return ratios, int(np.count_nonzero(undefined))


@dataclass
class GapRatioStats:
    """Ensemble statistics of the raw gap ratio.

    ``per_index_mean[i]`` averages the ``i``-th ratio counted from the lower
    band edge over the ensemble.
    """

    per_index_mean: np.ndarray
    per_index_stderr: np.ndarray
    per_index_count: np.ndarray
    histogram_edges: np.ndarray
    histogram_density: np.ndarray
    bulk_mean: float
    bulk_stderr: float
    edge_mean: float
    edge_stderr: float
    n_ratios: int
    n_undefined: int

    @property
    def edge_contrast(self) -> float:
        """Bulk minus edge mean in combined standard errors."""

        scale = np.hypot(self.bulk_stderr, self.edge_stderr)
        return float((self.bulk_mean - self.edge_mean) / scale) if scale > 0 else float("nan")


def _mean_stderr(values: np.ndarray) -> Tuple[float, float]:
    values = values[np.isfinite(values)]
    if values.size == 0:
        return float("nan"), float("nan")
    if values.size == 1:
        return float(values[0]), float("nan")
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def gap_ratio_stats(
    ensemble: Sequence[ArrayLike],
    bins: int = 50,
    bulk_fraction: float = 0.6,
    edge_count: int = 5,
) -> GapRatioStats:
    """Gap-ratio curve, histogram and bulk average of an ensemble.

    Parameters
    ----------
    ensemble: Sequence[ArrayLike]
        spectra, ratios are never taken across two spectra
    bins: int, default 50
        histogram bins on [0, 1]
    bulk_fraction: float, default 0.6
        central share of each spectrum used for the bulk mean
    edge_count: int, default 5
        ratios at the lower edge used for the edge mean

    Returns
    -------
    stats: GapRatioStats
        ensemble statistics; undefined ratios are excluded and counted
    """

    if not 0.0 < bulk_fraction <= 1.0:
        raise ParameterError(f"bulk_fraction must be in (0, 1], got {bulk_fraction}")
    per_sample = []
    n_undefined = 0
    for levels in _as_ensemble(ensemble):
        if levels.size < 3:
            continue
        ratios, undefined = gap_ratios(levels)
        per_sample.append(ratios)
        n_undefined += undefined
    if not per_sample:
        raise InputError("every spectrum has fewer than three levels")
    if n_undefined:
        warnings.warn(
            f"{n_undefined} gap ratios touch a zero spacing and were excluded",
            stacklevel=2,
        )

    length = max(r.size for r in per_sample)
    table = np.full((len(per_sample), length), np.nan)
    for k, ratios in enumerate(per_sample):
        table[k, : ratios.size] = ratios
    counts = np.sum(np.isfinite(table), axis=0)
    with warnings.catch_warnings(), np.errstate(invalid="ignore", divide="ignore"):
        # indices reached by a single spectrum have no spread
        warnings.simplefilter("ignore", RuntimeWarning)
        per_index_mean = np.nanmean(table, axis=0)
        per_index_stderr = np.nanstd(table, axis=0, ddof=1) / np.sqrt(counts)

    pooled = np.concatenate(per_sample)
    pooled = pooled[np.isfinite(pooled)]
    density, edges = np.histogram(pooled, bins=bins, range=(0.0, 1.0), density=True)

    bulk = []
    for ratios in per_sample:
        trim = int(np.floor(0.5 * (1.0 - bulk_fraction) * ratios.size))
        bulk.append(ratios[trim : ratios.size - trim])
    bulk_mean, bulk_stderr = _mean_stderr(np.concatenate(bulk))
    edge_mean, edge_stderr = _mean_stderr(table[:, :edge_count].ravel())

    return GapRatioStats(
        per_index_mean=per_index_mean,
        per_index_stderr=per_index_stderr,
        per_index_count=counts,
        histogram_edges=edges,
        histogram_density=density,
        bulk_mean=bulk_mean,
        bulk_stderr=bulk_stderr,
        edge_mean=edge_mean,
        edge_stderr=edge_stderr,
        n_ratios=int(pooled.size),
        n_undefined=n_undefined,
    )


@dataclass
class SffSeries:
    """Normalised spectral form factor ``<|Z(t)|^2> / <|Z(0)|^2>``."""

    times: np.ndarray
    sff: np.ndarray
    degeneracy_factor: int
    plateau: float
    ramp_slope: float
    dip_time: float
    n_samples: int


@njit(parallel=True)
def _partition_moduli(levels: ArrayLike, offsets: ArrayLike, times: ArrayLike) -> ArrayLike:
    """Sum over samples of ``|sum_k exp(-i t E_k)|^2`` on a time grid."""

    n_samples = offsets.shape[0] - 1
    out = np.zeros(times.shape[0], dtype=np.float64)
    for t_idx in prange(times.shape[0]):
        t = times[t_idx]
        total = 0.0
        for sample in range(n_samples):
            re = 0.0
            im = 0.0
            for k in range(offsets[sample], offsets[sample + 1]):
                re += np.cos(t * levels[k])
                im -= np.sin(t * levels[k])
            total += re * re + im * im
        out[t_idx] = total
    return out


def default_time_grid(
    ensemble: Sequence[ArrayLike],
    n_points: int = 400,
    log_tmin: float = -1.0,
    log_tmax: float = 5.0,
) -> np.ndarray:
    """Log-spaced times in units of the inverse pooled energy spread."""

    if n_points < 1:
        raise InputError("time grid needs at least one point")
    pooled = np.concatenate(_as_ensemble(ensemble))
    spread = float(pooled.std())
    spread = spread if spread > 0 else 1.0
    return np.logspace(log_tmin, log_tmax, n_points) / spread


def spectral_form_factor(
    ensemble: Sequence[ArrayLike],
    times: Optional[ArrayLike] = None,
    degeneracy_factor: int = 1,
    n_points: int = 400,
    log_tmin: float = -1.0,
    log_tmax: float = 5.0,
) -> SffSeries:
    """Ensemble-averaged spectral form factor.

    Each entry of ``ensemble`` holds every stored level of one sample (all
    sectors). Symmetry copies removed by the sector policy rescale ``|Z|^2``
    and ``|Z(0)|^2`` alike, so ``degeneracy_factor`` is carried for the
    record only.

    Parameters
    ----------
    ensemble: Sequence[ArrayLike]
        per-sample levels
    times: Optional[ArrayLike], default None
        time grid, `default_time_grid` if None
    degeneracy_factor: int, default 1
        copies of each stored level in the full spectrum
    n_points: int, default 400
        points of the default grid
    log_tmin: float, default -1.0
        decade of the first default time
    log_tmax: float, default 5.0
        decade of the last default time

    Returns
    -------
    series: SffSeries
        normalised form factor with plateau and ramp slope estimates
    """

    spectra = _as_ensemble(ensemble)
    if times is None:
        times = default_time_grid(spectra, n_points, log_tmin, log_tmax)
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0:
        raise InputError("empty time grid")

    levels = np.concatenate(spectra)
    offsets = np.zeros(len(spectra) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([s.size for s in spectra])
    numerator = _partition_moduli(levels, offsets, times)
    denominator = float(np.sum([float(s.size) ** 2 for s in spectra]))
    sff = numerator / denominator

    plateau = float(np.mean(sff[times >= times[-1] / 10.0]))
    slope, dip_time = _ramp_slope(times, sff, plateau)
    return SffSeries(times, sff, int(degeneracy_factor), plateau, slope, dip_time, len(spectra))


def _ramp_slope(times: np.ndarray, sff: np.ndarray, plateau: float) -> Tuple[float, float]:
    """Log-log slope between the dip and a quarter of the plateau."""

    early = times < times[-1] / 10.0
    if np.count_nonzero(early) < 3:
        return float("nan"), float("nan")
    dip = int(np.argmin(np.where(early, sff, np.inf)))
    window = (
        (np.arange(times.size) > dip)
        & (sff >= 2.0 * sff[dip])
        & (sff <= 0.25 * plateau)
    )
    if np.count_nonzero(window) < 3:
        return float("nan"), float(times[dip])
    slope = np.polyfit(np.log(times[window]), np.log(sff[window]), 1)[0]
    return float(slope), float(times[dip])


def sample_gaussian_ensemble(kind: str, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw one GOE or GUE matrix of size ``dim``."""

    if kind == "GOE":
        a = rng.normal(size=(dim, dim))
        return 0.5 * (a + a.T)
    if kind == "GUE":
        a = rng.normal(size=(dim, dim)) + 1.0j * rng.normal(size=(dim, dim))
        return 0.5 * (a + a.conj().T)
    raise ParameterError(f"unknown Gaussian ensemble '{kind}'")


def gap_ratio_oracle(
    kind: str = "GOE",
    n_samples: int = 1000,
    dim: int = 200,
    seed: int = 0,
    bulk_fraction: float = 0.6,
) -> Tuple[float, float]:
    """Bulk gap-ratio mean and standard error of sampled GOE/GUE matrices."""

    rng = np.random.default_rng(seed)
    spectra = [
        linalg.eigvalsh(sample_gaussian_ensemble(kind, dim, rng)) for _ in range(n_samples)
    ]
    stats = gap_ratio_stats(spectra, bulk_fraction=bulk_fraction)
    return stats.bulk_mean, stats.bulk_stderr
