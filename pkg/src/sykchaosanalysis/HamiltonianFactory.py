"""
Build random SYK-type Hamiltonians from a model specification.

Supported families: qudit SYK, clusters spin-SYK, gauged clusters SYK,
overlapping clusters SYK and the original (all-to-all) SYK model. A factory
holds one `ModelSpec`; each call draws the couplings of one disorder sample
with the counter-based generator in `utils.couplings`, so any sample can be
rebuilt independently of the others.

History:
---------
- **2026/10**: Adjoint-diagonal qudit couplings and chi-window gauged clusters.
- **2026/10**: Initial commit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict, replace
from math import comb
from typing import Union, Optional, Sequence, Tuple
import numpy as np

from sykchaosanalysis.utils.errors import ParameterError, ConfigError
from sykchaosanalysis.utils.operators import (
    PauliString,
    PauliSum,
    QuditTerm,
    DenseOperator,
    build_dense,
    majorana_product,
)
from sykchaosanalysis.utils import couplings as cpl

FAMILIES = (
    "qudit_syk",
    "clusters_spin_syk",
    "gauged_clusters_syk",
    "overlapping_clusters_syk",
    "original_syk",
)

_DEFAULT_VARIANTS = {
    "clusters_spin_syk": "full",
    "gauged_clusters_syk": "psi",
}

_PAULI_CHARS = {1: "X", 2: "Y", 3: "Z"}


@dataclass(frozen=True)
class ModelSpec:
    """Model family and its parameters.

    Parameters
    ----------
    family: str
        one of `FAMILIES`
    d: Optional[int]
        qudit dimension (qudit SYK)
    L: Optional[int]
        number of sites or clusters
    q: Optional[int]
        locality of qudit SYK, Majorana order of original SYK (default 4)
    q_tilde: Optional[int]
        clusters or bilinears per term (default 2)
    M: Optional[int]
        cluster size (gauged) or cluster range (overlapping)
    N: Optional[int]
        number of Majoranas (overlapping, original)
    seed: int
        master seed
    samples: Union[int, str]
        ensemble size or ``"auto"``
    variant: Optional[str]
        ``full``/``xy`` for clusters spin-SYK, ``psi``/``chi`` for gauged clusters
    coupling_structure: str
        ``full`` or ``sachdev_ye`` (qudit SYK, q = 2)
    """

    family: str
    d: Optional[int] = None
    L: Optional[int] = None
    q: Optional[int] = None
    q_tilde: Optional[int] = None
    M: Optional[int] = None
    N: Optional[int] = None
    seed: int = 0
    samples: Union[int, str] = 1
    variant: Optional[str] = None
    coupling_structure: str = "full"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(
                f"unknown family '{self.family}', expected one of {', '.join(FAMILIES)}"
            )
        if self.variant is None and self.family in _DEFAULT_VARIANTS:
            object.__setattr__(self, "variant", _DEFAULT_VARIANTS[self.family])
        if self.family == "original_syk" and self.q is None:
            object.__setattr__(self, "q", 4)
        if self.family in ("clusters_spin_syk", "overlapping_clusters_syk") and self.q_tilde is None:
            object.__setattr__(self, "q_tilde", 2)
        if not (self.samples == "auto" or (isinstance(self.samples, int) and self.samples >= 1)):
            raise ParameterError(f"samples must be a positive integer or 'auto', got {self.samples}")
        self._validate()

    def _require(self, *names: str):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ParameterError(f"{self.family} needs {', '.join(missing)}")

    def _validate(self):
        if self.family == "qudit_syk":
            self._require("d", "L", "q")
            if self.d < 2:
                raise ParameterError(f"d must be >= 2, got {self.d}")
            if not 1 <= self.q <= self.L:
                raise ParameterError(f"need 1 <= q <= L, got q={self.q}, L={self.L}")
            if self.coupling_structure not in ("full", "sachdev_ye"):
                raise ParameterError(f"unknown coupling structure '{self.coupling_structure}'")
            if self.coupling_structure == "sachdev_ye" and self.q != 2:
                raise ParameterError("adjoint-diagonal couplings are defined for q = 2 only")
        elif self.family == "clusters_spin_syk":
            self._require("L")
            if not 1 <= self.q_tilde <= self.L:
                raise ParameterError(f"need 1 <= q_tilde <= L, got {self.q_tilde}, L={self.L}")
            if self.variant not in ("full", "xy"):
                raise ParameterError(f"unknown clusters spin-SYK variant '{self.variant}'")
        elif self.family == "gauged_clusters_syk":
            self._require("L", "M")
            if self.M < 4 or self.M % 2:
                raise ParameterError(f"gauged clusters need an even M >= 4, got {self.M}")
            if self.L < 2:
                raise ParameterError(f"gauged clusters need L >= 2, got {self.L}")
            if self.variant not in ("psi", "chi"):
                raise ParameterError(f"unknown gauged variant '{self.variant}'")
        elif self.family == "overlapping_clusters_syk":
            self._require("N", "M")
            if self.N % 2 or self.N < 2 * self.q_tilde:
                raise ParameterError(f"N must be even and >= {2 * self.q_tilde}, got {self.N}")
            if self.M < 2:
                raise ParameterError(f"cluster range M must be >= 2, got {self.M}")
            if self.M == 2 and self.q_tilde == 2 and self.N < 6:
                raise ParameterError(f"M = 2 overlapping clusters need N >= 6, got {self.N}")
        elif self.family == "original_syk":
            self._require("N")
            if self.q < 2 or self.q % 2:
                raise ParameterError(f"Majorana order q must be even, got {self.q}")
            if self.N % 2 or self.N < self.q:
                raise ParameterError(f"N must be even and >= {self.q}, got {self.N}")

    @property
    def is_qubit_model(self) -> bool:
        return self.family != "qudit_syk"

    @property
    def n_majoranas(self) -> Optional[int]:
        """Number of Majoranas for fermionic families, None otherwise."""

        if self.family in ("overlapping_clusters_syk", "original_syk"):
            return self.N
        if self.family == "gauged_clusters_syk":
            return self.M * self.L
        if self.family == "clusters_spin_syk":
            return 4 * self.L
        return None

    @property
    def n_qubits(self) -> Optional[int]:
        if self.family == "qudit_syk":
            return None
        return self.n_majoranas // 2

    @property
    def dim(self) -> int:
        if self.family == "qudit_syk":
            return self.d**self.L
        return 2**self.n_qubits

    @property
    def tag(self) -> str:
        """Short file-name friendly label."""

        parts = [self.family]
        for key in ("d", "L", "q", "q_tilde", "M", "N"):
            value = getattr(self, key)
            if value is not None:
                parts.append(f"{key}{value}")
        if self.variant is not None:
            parts.append(self.variant)
        if self.coupling_structure != "full":
            parts.append(self.coupling_structure)
        return "_".join(parts)

    def to_config(self) -> dict:
        """Flat ``key -> value`` mapping with unset fields dropped."""

        return {key: value for key, value in asdict(self).items() if value is not None}

    @classmethod
    def from_config(cls, config: dict) -> "ModelSpec":
        """Build a spec from a parsed ``key = value`` mapping.

        Parameters
        ----------
        config: dict
            mapping, unknown keys are ignored

        Returns
        -------
        spec: ModelSpec
            validated specification
        """

        if "family" not in config:
            raise ConfigError("model configuration needs a 'family' key")
        keys = cls.__dataclass_fields__.keys()
        values = {key: config[key] for key in keys if key in config}
        for key in ("d", "L", "q", "q_tilde", "M", "N", "seed"):
            if key in values and values[key] is not None:
                try:
                    values[key] = int(values[key])
                except (TypeError, ValueError):
                    raise ConfigError(f"'{key}' must be an integer, got {values[key]!r}")
        if "samples" in values and values["samples"] != "auto":
            try:
                values["samples"] = int(values["samples"])
            except (TypeError, ValueError):
                raise ConfigError(f"'samples' must be an integer or 'auto', got {values['samples']!r}")
        return cls(**values)

    def with_samples(self, samples: Union[int, str]) -> "ModelSpec":
        return replace(self, samples=samples)


@dataclass
class CouplingTable:
    """Index tuples of one sample with their coupling values."""

    family: str
    indices: list
    values: np.ndarray
    variance: float

    def __len__(self) -> int:
        return len(self.indices)

    def as_dict(self) -> dict:
        return dict(zip(self.indices, self.values.tolist()))

    def replace(self, overrides: dict, fill: Optional[float] = None) -> "CouplingTable":
        """Copy with selected couplings overridden.

        Parameters
        ----------
        overrides: dict
            index tuple -> new value
        fill: Optional[float], default None
            value for every coupling not in ``overrides``; keep drawn values if None

        Returns
        -------
        table: CouplingTable
            modified copy
        """

        positions = {index: k for k, index in enumerate(self.indices)}
        values = self.values.copy() if fill is None else np.full(len(self), float(fill))
        for index, value in overrides.items():
            if index not in positions:
                raise KeyError(f"{index} is not part of the {self.family} support")
            values[positions[index]] = value
        return CouplingTable(self.family, list(self.indices), values, self.variance)


@dataclass
class HamiltonianInstance:
    """One disorder realisation.

    ``terms`` is a `PauliSum` for qubit families and a list of `QuditTerm`
    for qudit SYK.
    """

    spec: ModelSpec
    sample_id: int
    couplings: CouplingTable
    terms: Union[PauliSum, list]
    _dense: Optional[DenseOperator] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def n_qubits(self) -> Optional[int]:
        return self.spec.n_qubits

    def to_dense(
        self,
        max_dim: Optional[int] = None,
        memory_budget_gb: Optional[float] = None,
    ) -> DenseOperator:
        """Dense Hamiltonian, built on first use and cached."""

        if self._dense is None:
            self._dense = build_dense(self.terms, max_dim=max_dim, memory_budget_gb=memory_budget_gb)
        return self._dense


def _hermitian_prefactor(order: int) -> complex:
    """Scalar making a product of ``order`` distinct Majoranas Hermitian."""

    return 1.0 if (order * (order - 1) // 2) % 2 == 0 else 1.0j


class HamiltonianFactory:
    """Draw Hamiltonian instances for a fixed model specification.

    Parameters
    ----------
    spec: ModelSpec
        model specification
    verbose: int, default 0
        0 silent, 2 prints support sizes
    """

    def __init__(self, spec: ModelSpec, verbose: int = 0):
        self._spec = spec
        self._verbose = verbose
        self._support = None
        self._variance = None

    @property
    def spec(self) -> ModelSpec:
        return self._spec

    @property
    def support(self) -> list:
        """Coupling index tuples, in enumeration order."""

        if self._support is None:
            spec = self._spec
            if spec.family == "qudit_syk":
                if spec.coupling_structure == "sachdev_ye":
                    self._support = cpl.sachdev_ye_support(spec.L)
                else:
                    self._support = cpl.qudit_support(spec.d, spec.L, spec.q)
            elif spec.family == "clusters_spin_syk":
                paulis = (1, 2) if spec.variant == "xy" else (1, 2, 3)
                self._support = cpl.clusters_spin_support(spec.L, spec.q_tilde, paulis)
            elif spec.family == "gauged_clusters_syk":
                self._support = cpl.gauged_support(spec.L, spec.M, spec.variant)
            elif spec.family == "overlapping_clusters_syk":
                self._support = cpl.overlapping_support(spec.N, spec.M, spec.q_tilde)
            else:
                self._support = cpl.syk_support(spec.N, spec.q)
            if self._verbose > 1:
                print(f"{spec.tag}: {len(self._support)} couplings")
        return self._support

    @property
    def variance(self) -> float:
        """Coupling variance of the family."""

        if self._variance is None:
            spec = self._spec
            if spec.family == "qudit_syk":
                if spec.coupling_structure == "sachdev_ye":
                    self._variance = cpl.sachdev_ye_variance(spec.d, spec.L)
                else:
                    self._variance = cpl.qudit_variance(spec.d, spec.L, spec.q)
            elif spec.family == "clusters_spin_syk":
                # every Pauli string squares to one: <Tr H^2> / dim = 1
                self._variance = 1.0 / len(self.support)
            elif spec.family == "gauged_clusters_syk":
                self._variance = float(
                    cpl.syk_variance(spec.n_majoranas, 4, exact=True)
                    * comb(spec.n_majoranas, 4)
                    / len(self.support)
                )
            elif spec.family == "overlapping_clusters_syk":
                if spec.M == 2 and spec.q_tilde == 2:
                    self._variance = cpl.overlapping_m2_variance(spec.N)
                else:
                    self._variance = cpl.overlapping_variance(spec.N, spec.M, spec.q_tilde)
            else:
                self._variance = cpl.syk_variance(spec.N, spec.q)
        return self._variance

    def coupling_table(self, sample_id: int) -> CouplingTable:
        """Draw the couplings of ``sample_id``."""

        if sample_id < 0:
            raise ParameterError(f"sample_id must be non-negative, got {sample_id}")
        spec = self._spec
        family_key = spec.family if spec.coupling_structure == "full" else spec.tag
        values = cpl.counter_gaussians(
            spec.seed, sample_id, family_key, self.support, self.variance
        )
        return CouplingTable(spec.family, list(self.support), values, self.variance)

    def build(self, sample_id: int, couplings: Optional[CouplingTable] = None) -> HamiltonianInstance:
        """Build the instance of ``sample_id`` for the model family."""

        builders = {
            "qudit_syk": self.build_qudit_syk,
            "clusters_spin_syk": self.build_clusters_spin_syk,
            "gauged_clusters_syk": self.build_gauged_clusters_syk,
            "overlapping_clusters_syk": self.build_overlapping_clusters_syk,
            "original_syk": self.build_original_syk,
        }
        return builders[self._spec.family](sample_id, couplings)

    def _resolve_couplings(
        self,
        family: str,
        sample_id: int,
        couplings: Optional[CouplingTable],
    ) -> CouplingTable:
        if self._spec.family != family:
            raise ParameterError(f"factory holds a {self._spec.family} spec, not {family}")
        if couplings is None:
            return self.coupling_table(sample_id)
        if len(couplings) != len(self.support):
            raise ParameterError(
                f"coupling table has {len(couplings)} entries, support has {len(self.support)}"
            )
        return couplings

    def build_qudit_syk(
        self,
        sample_id: int,
        couplings: Optional[CouplingTable] = None,
    ) -> HamiltonianInstance:
        """Qudit SYK: sum of J times products of q Gell-Mann generators.

        Parameters
        ----------
        sample_id: int
            disorder realisation
        couplings: Optional[CouplingTable], default None
            explicit couplings, drawn from the seed if None

        Returns
        -------
        instance: HamiltonianInstance
            instance with `QuditTerm` terms
        """

        table = self._resolve_couplings("qudit_syk", sample_id, couplings)
        spec = self._spec
        terms = []
        if spec.coupling_structure == "sachdev_ye":
            for (i1, i2), value in zip(table.indices, table.values):
                for alpha in range(1, spec.d**2):
                    terms.append(QuditTerm(spec.d, spec.L, ((i1, alpha), (i2, alpha)), float(value)))
        else:
            for index, value in zip(table.indices, table.values):
                terms.append(QuditTerm(spec.d, spec.L, index, float(value)))
        return HamiltonianInstance(spec, sample_id, table, terms)

    def build_clusters_spin_syk(
        self,
        sample_id: int,
        couplings: Optional[CouplingTable] = None,
    ) -> HamiltonianInstance:
        """Clusters spin-SYK on 2L qubits, cluster i = qubits (2i - 1, 2i)."""

        table = self._resolve_couplings("clusters_spin_syk", sample_id, couplings)
        n_qubits = self._spec.n_qubits
        terms = PauliSum(n_qubits)
        for index, value in zip(table.indices, table.values):
            label = ["I"] * n_qubits
            for k in range(0, len(index), 3):
                cluster, alpha, beta = index[k : k + 3]
                label[2 * cluster - 2] = _PAULI_CHARS[alpha]
                label[2 * cluster - 1] = _PAULI_CHARS[beta]
            terms.add(PauliString.from_label("".join(label)), float(value))
        return HamiltonianInstance(self._spec, sample_id, table, terms)

    def _majorana_terms(self, table: CouplingTable, groups: Sequence[Tuple[int, ...]]) -> PauliSum:
        N = self._spec.n_majoranas
        terms = PauliSum(N // 2)
        for indices, value in zip(groups, table.values):
            prefactor = _hermitian_prefactor(len(indices))
            terms.add(majorana_product(indices, N), prefactor * float(value))
        return terms

    def build_gauged_clusters_syk(
        self,
        sample_id: int,
        couplings: Optional[CouplingTable] = None,
    ) -> HamiltonianInstance:
        """Gauged clusters SYK: one bilinear from each of two clusters per term."""

        table = self._resolve_couplings("gauged_clusters_syk", sample_id, couplings)
        groups = [(a, b, c, e) for (_, a, b, _, c, e) in table.indices]
        return HamiltonianInstance(self._spec, sample_id, table, self._majorana_terms(table, groups))

    def build_overlapping_clusters_syk(
        self,
        sample_id: int,
        couplings: Optional[CouplingTable] = None,
    ) -> HamiltonianInstance:
        """Overlapping clusters SYK: products of q_tilde short-range bilinears.

        For M = 2 every term is a product of adjacent bilinears
        ``(chi_r chi_{r+1})(chi_s chi_{s+1})`` and the matrix is real symmetric.
        """

        table = self._resolve_couplings("overlapping_clusters_syk", sample_id, couplings)
        return HamiltonianInstance(
            self._spec, sample_id, table, self._majorana_terms(table, table.indices)
        )

    def build_original_syk(
        self,
        sample_id: int,
        couplings: Optional[CouplingTable] = None,
    ) -> HamiltonianInstance:
        """All-to-all SYK_q with variance (q-1)!/N^(q-1)."""

        table = self._resolve_couplings("original_syk", sample_id, couplings)
        return HamiltonianInstance(
            self._spec, sample_id, table, self._majorana_terms(table, table.indices)
        )

    def term_strings(self) -> list[PauliString]:
        """Phase-free Pauli strings of every term, independent of the couplings."""

        if not self._spec.is_qubit_model:
            raise ParameterError("qudit SYK terms are not Pauli strings")
        unit = CouplingTable(
            self._spec.family,
            list(self.support),
            np.ones(len(self.support)),
            self.variance,
        )
        instance = self.build(0, unit)
        return [pauli.with_phase(0) for pauli in instance.terms.strings]
