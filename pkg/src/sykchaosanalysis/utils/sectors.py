"""
Symmetry sectors of SYK-type Hamiltonians.

Conserved charges are Pauli strings squaring to one: the fermion parity
``Z...Z``, the particle-hole string ``Y X Y X ...`` of the M = 2 overlapping
clusters model and the per-cluster parities of gauged clusters SYK. A sector
is the joint eigenspace of a set of commuting charges. Degeneracies between
or within sectors are removed according to the value of ``N mod 8``.

History:
---------
- **2026/10**: Dense verification of charge algebra.
- **2026/10**: Cluster-parity sectors and operator restriction.
- **2026/10**: Initial commit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence, Tuple, Union
import numpy as np
from numpy.typing import ArrayLike
import scipy.linalg as linalg

from sykchaosanalysis.utils.errors import (
    ParameterError,
    AlgebraError,
    NumericalError,
    CoverageError,
)
from sykchaosanalysis.utils.operators import PauliString, DenseOperator, build_dense

__all__ = [
    "ChargeOperator",
    "SectorBasis",
    "SectorSpectrum",
    "SectorPolicy",
    "make_charge",
    "sector_basis",
    "restrict_operator",
    "project_sector",
    "collapse_degenerate_pairs",
    "apply_policy",
    "resolve_sectors",
    "ZERO_MODE_TOL",
    "DEGENERACY_REL_TOL",
]

ZERO_MODE_TOL = 1e-10
DEGENERACY_REL_TOL = 1e-8
COMMUTATOR_REL_TOL = 1e-12
CHARGE_CHECK_MAX_QUBITS = 10


@dataclass(frozen=True)
class ChargeOperator:
    """Conserved Pauli-string charge with eigenvalues +1 and -1.

    Parameters
    ----------
    kind: str
        ``parity``, ``particle_hole`` or ``cluster_parity``
    label: str
        key used in sector quantum numbers
    string: PauliString
        Hermitian Pauli string
    commutes_with_parity: bool
        whether the charge commutes with ``Z...Z``
    real_symmetric: bool
        True for a real symmetric matrix, False for an imaginary antisymmetric one
    """

    kind: str
    label: str
    string: PauliString
    commutes_with_parity: bool
    real_symmetric: bool
    eigenvalues: Tuple[int, int] = (1, -1)

    @property
    def is_diagonal(self) -> bool:
        return self.string.x_mask == 0

    def value_on_basis(self, indices: ArrayLike) -> np.ndarray:
        """Eigenvalue on computational basis states (diagonal charges only)."""

        if not self.is_diagonal:
            raise ParameterError(f"charge {self.label} is not diagonal")
        indices = np.asarray(indices, dtype=np.int64)
        bits = indices & self.string.z_mask
        parity = np.zeros_like(bits)
        while np.any(bits):
            parity ^= bits & 1
            bits = bits >> 1
        sign = 1 - 2 * parity
        return int(self.string.prefactor.real) * sign


def _z_string(n_qubits: int, qubits: Sequence[int]) -> PauliString:
    z_mask = 0
    for qubit in qubits:
        z_mask |= 1 << (n_qubits - qubit)
    return PauliString(n_qubits, 0, z_mask, 0)


def _max_abs(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix)))


@lru_cache(maxsize=None)
def _verify_charge_algebra(
    string: PauliString,
    parity_string: PauliString,
    commutes_with_parity: bool,
    real_symmetric: bool,
):
    """Dense check of the square, parity algebra and reality of a charge."""

    charge = build_dense(string).matrix
    parity = build_dense(parity_string).matrix
    dim = charge.shape[0]
    if _max_abs(charge @ charge - np.eye(dim)) > COMMUTATOR_REL_TOL:
        raise AlgebraError(f"charge {string.label} does not square to one")
    sign = 1.0 if commutes_with_parity else -1.0
    if _max_abs(charge @ parity - sign * (parity @ charge)) > COMMUTATOR_REL_TOL:
        relation = "commute" if commutes_with_parity else "anticommute"
        raise AlgebraError(f"charge {string.label} does not {relation} with the parity")
    if real_symmetric:
        defect = max(_max_abs(np.imag(charge)), _max_abs(charge - charge.T))
    else:
        defect = max(_max_abs(np.real(charge)), _max_abs(charge + charge.T))
    if defect > COMMUTATOR_REL_TOL:
        kind = "real symmetric" if real_symmetric else "imaginary antisymmetric"
        raise AlgebraError(f"charge {string.label} is not {kind}")


def make_charge(
    kind: str,
    N: int,
    cluster: Optional[int] = None,
    cluster_size: Optional[int] = None,
) -> ChargeOperator:
    """Build a conserved charge on ``N / 2`` qubits.

    Parameters
    ----------
    kind: str
        ``parity`` (``Z`` on every qubit), ``particle_hole`` (alternating
        ``Y, X, Y, ...`` starting with Y on qubit 1) or ``cluster_parity``
    N: int
        number of Majoranas, even
    cluster: Optional[int], default None
        1-based cluster for ``cluster_parity``
    cluster_size: Optional[int], default None
        Majoranas per cluster for ``cluster_parity`` (M)

    Returns
    -------
    charge: ChargeOperator
        charge with algebraic flags filled in

    Raises
    ------
    AlgebraError
        if the flags disagree with the dense matrices (checked up to
        ``CHARGE_CHECK_MAX_QUBITS`` qubits) or a particle-hole string misses
        the algebra required by ``N mod 8``
    """

    if N < 2 or N % 2:
        raise ParameterError(f"N must be even and >= 2, got {N}")
    n_qubits = N // 2
    parity_string = _z_string(n_qubits, range(1, n_qubits + 1))

    if kind == "parity":
        string = parity_string
        label = "parity"
    elif kind == "particle_hole":
        string = PauliString.from_label(
            "".join("Y" if j % 2 else "X" for j in range(1, n_qubits + 1))
        )
        label = "P"
    elif kind == "cluster_parity":
        if cluster is None or cluster_size is None:
            raise ParameterError("cluster parity needs cluster and cluster_size")
        if cluster_size % 2 or cluster_size < 2 or N % cluster_size:
            raise ParameterError(f"cluster size {cluster_size} does not tile N={N}")
        width = cluster_size // 2
        if not 1 <= cluster <= N // cluster_size:
            raise IndexError(f"cluster {cluster} outside 1..{N // cluster_size}")
        string = _z_string(n_qubits, range(width * (cluster - 1) + 1, width * cluster + 1))
        label = f"cluster_{cluster}"
    else:
        raise ParameterError(f"unknown charge kind '{kind}'")

    # Y is the only imaginary antisymmetric Pauli
    n_y = (string.x_mask & string.z_mask).bit_count()
    charge = ChargeOperator(
        kind=kind,
        label=label,
        string=string,
        commutes_with_parity=string.commutes_with(parity_string),
        real_symmetric=n_y % 2 == 0,
    )
    if kind == "particle_hole":
        residue = N % 8
        if charge.commutes_with_parity != (residue in (0, 4)) or (
            residue in (0, 4) and charge.real_symmetric != (residue == 0)
        ):
            raise AlgebraError(
                f"particle-hole string {string.label} has the wrong algebra for N={N}"
            )
    if n_qubits <= CHARGE_CHECK_MAX_QUBITS:
        _verify_charge_algebra(
            string, parity_string, charge.commutes_with_parity, charge.real_symmetric
        )
    return charge


@dataclass
class SectorBasis:
    """Orthonormal basis of a joint eigenspace.

    ``indices`` selects computational basis states; when ``vectors`` is set
    the basis is ``vectors`` expressed on those states.
    """

    indices: np.ndarray
    vectors: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return len(self.indices) if self.vectors is None else self.vectors.shape[1]


@dataclass
class SectorSpectrum:
    """Sorted eigenvalues of one sector.

    ``degeneracy`` counts how many copies of each stored level exist in the
    full spectrum after the sector policy has been applied.
    """

    quantum_numbers: dict
    eigenvalues: np.ndarray
    policy_applied: str = "none"
    degeneracy: int = 1

    @property
    def label(self) -> str:
        if not self.quantum_numbers:
            return "full"
        return ",".join(f"{key}={value:+d}" for key, value in self.quantum_numbers.items())

    @property
    def dim(self) -> int:
        return int(len(self.eigenvalues))

    @property
    def n_zero_modes(self) -> int:
        return int(np.count_nonzero(np.abs(self.eigenvalues) < ZERO_MODE_TOL))


def _check_charges(charges: Sequence[Tuple[ChargeOperator, int]]):
    if not charges:
        return
    n_qubits = charges[0][0].string.n_qubits
    for charge, value in charges:
        if charge.string.n_qubits != n_qubits:
            raise ParameterError("charges act on different numbers of qubits")
        if value not in charge.eigenvalues:
            raise ParameterError(f"{value} is not an eigenvalue of {charge.label}")
    for k, (first, _) in enumerate(charges):
        for second, _ in charges[k + 1 :]:
            if not first.string.commutes_with(second.string):
                raise AlgebraError(f"charges {first.label} and {second.label} do not commute")


def sector_basis(
    charges: Sequence[Tuple[ChargeOperator, int]],
    n_qubits: int,
) -> SectorBasis:
    """Joint eigenspace of commuting charges.

    Diagonal charges select computational basis states; the remaining charges
    are diagonalised inside that subspace through the projector
    ``(1 + lambda C) / 2``.

    Parameters
    ----------
    charges: Sequence[Tuple[ChargeOperator, int]]
        (charge, eigenvalue) pairs
    n_qubits: int
        number of qubits

    Returns
    -------
    basis: SectorBasis
        orthonormal sector basis
    """

    _check_charges(charges)
    indices = np.arange(1 << n_qubits, dtype=np.int64)
    for charge, value in charges:
        if charge.is_diagonal:
            indices = indices[charge.value_on_basis(indices) == value]

    vectors = None
    for charge, value in charges:
        if charge.is_diagonal:
            continue
        matrix = build_dense(charge.string).matrix[np.ix_(indices, indices)]
        if vectors is not None:
            matrix = vectors.conj().T @ matrix @ vectors
        projector = 0.5 * (np.eye(matrix.shape[0]) + value * matrix)
        weights, eigenvectors = linalg.eigh(projector)
        keep = weights > 0.5
        expected_rank = int(round(float(np.real(np.trace(projector)))))
        if int(np.count_nonzero(keep)) != expected_rank:
            raise NumericalError(
                f"sector {charge.label}={value:+d} has rank {np.count_nonzero(keep)}, expected {expected_rank}"
            )
        selected = eigenvectors[:, keep]
        vectors = selected if vectors is None else vectors @ selected
    return SectorBasis(indices, vectors)


def restrict_operator(matrix: ArrayLike, basis: SectorBasis) -> np.ndarray:
    """Matrix of ``matrix`` in the sector basis.

    Parameters
    ----------
    matrix: ArrayLike
        full dense operator
    basis: SectorBasis
        sector basis

    Returns
    -------
    restricted: np.ndarray
        ``basis.dim x basis.dim`` matrix
    """

    block = np.asarray(matrix)[np.ix_(basis.indices, basis.indices)]
    if basis.vectors is None:
        return block
    return basis.vectors.conj().T @ block @ basis.vectors


def _check_conserved(matrix: np.ndarray, charge: ChargeOperator):
    scale = max(float(np.max(np.abs(matrix))), 1.0)
    if charge.is_diagonal:
        values = charge.value_on_basis(np.arange(matrix.shape[0]))
        mismatch = values[:, None] != values[None, :]
        defect = float(np.max(np.abs(matrix[mismatch]))) if np.any(mismatch) else 0.0
    else:
        charge_matrix = build_dense(charge.string).matrix
        defect = float(np.max(np.abs(charge_matrix @ matrix - matrix @ charge_matrix)))
    if defect > COMMUTATOR_REL_TOL * scale:
        raise AlgebraError(
            f"charge {charge.label} does not commute with the Hamiltonian (defect {defect:.3e})"
        )


def project_sector(
    hamiltonian: Union[DenseOperator, np.ndarray],
    charges: Sequence[Tuple[ChargeOperator, int]],
    check: bool = True,
) -> SectorSpectrum:
    """Diagonalise the Hamiltonian inside one joint eigenspace.

    Parameters
    ----------
    hamiltonian: Union[DenseOperator, np.ndarray]
        dense Hamiltonian on ``n`` qubits
    charges: Sequence[Tuple[ChargeOperator, int]]
        (charge, eigenvalue) pairs fixing the sector
    check: bool, default True
        verify that every charge commutes with the Hamiltonian

    Returns
    -------
    spectrum: SectorSpectrum
        sorted sector eigenvalues
    """

    matrix = hamiltonian.matrix if isinstance(hamiltonian, DenseOperator) else np.asarray(hamiltonian)
    n_qubits = int(matrix.shape[0]).bit_length() - 1
    if 1 << n_qubits != matrix.shape[0]:
        raise ParameterError(f"dimension {matrix.shape[0]} is not a power of two")
    _check_charges(charges)
    if check:
        for charge, _ in charges:
            _check_conserved(matrix, charge)

    basis = sector_basis(charges, n_qubits) if charges else SectorBasis(np.arange(matrix.shape[0]))
    block = restrict_operator(matrix, basis)
    eigenvalues = linalg.eigvalsh(block) if block.shape[0] else np.zeros(0)
    return SectorSpectrum(
        quantum_numbers={charge.label: int(value) for charge, value in charges},
        eigenvalues=np.sort(np.asarray(eigenvalues, dtype=np.float64)),
    )


def collapse_degenerate_pairs(
    levels: ArrayLike,
    rel_tol: float = DEGENERACY_REL_TOL,
) -> np.ndarray:
    """Keep one level of each exactly degenerate pair.

    Parameters
    ----------
    levels: ArrayLike
        sorted levels with every level appearing twice
    rel_tol: float, default 1e-8
        pairs closer than ``rel_tol`` times the spectral width are merged

    Returns
    -------
    collapsed: np.ndarray
        half as many levels

    Raises
    ------
    NumericalError
        if a level has no partner
    """

    levels = np.sort(np.asarray(levels, dtype=np.float64))
    width = float(levels[-1] - levels[0]) if len(levels) else 0.0
    tol = rel_tol * width if width > 0 else 1e-12
    kept = []
    unpaired = 0
    k = 0
    while k < len(levels):
        if k + 1 < len(levels) and levels[k + 1] - levels[k] < tol:
            kept.append(levels[k])
            k += 2
        else:
            kept.append(levels[k])
            unpaired += 1
            k += 1
    if unpaired:
        raise NumericalError(f"{unpaired} of {len(levels)} levels have no degenerate partner")
    return np.array(kept)


def _find(spectra: Sequence[SectorSpectrum], **quantum_numbers) -> list:
    return [
        s
        for s in spectra
        if all(s.quantum_numbers.get(key) == value for key, value in quantum_numbers.items())
    ]


def apply_policy(spectra: Sequence[SectorSpectrum], N: int) -> list[SectorSpectrum]:
    """Remove symmetry-related duplicates according to ``N mod 8``.

    - 2, 6: parity sectors are degenerate, keep the even one only.
    - 4: each parity sector is two-fold degenerate, collapse and keep both.
    - 0: keep every sector; when the particle-hole charge is resolved all four
      (parity, P) sectors must be present.

    Parameters
    ----------
    spectra: Sequence[SectorSpectrum]
        pre-policy sector spectra labelled by ``parity`` (and ``P``)
    N: int
        number of Majoranas

    Returns
    -------
    spectra: list[SectorSpectrum]
        post-policy spectra
    """

    residue = N % 8
    if residue in (2, 6):
        even = _find(spectra, parity=1)
        if not even:
            raise CoverageError(f"N={N} needs the parity-even sector")
        return [
            SectorSpectrum(s.quantum_numbers, s.eigenvalues, f"parity_even_N{residue}", 2 * s.degeneracy)
            for s in even
        ]
    if residue == 4:
        if not _find(spectra, parity=1) or not _find(spectra, parity=-1):
            raise CoverageError(f"N={N} needs both parity sectors")
        return [
            SectorSpectrum(
                s.quantum_numbers,
                collapse_degenerate_pairs(s.eigenvalues),
                "dedoubled_N4",
                2 * s.degeneracy,
            )
            for s in spectra
        ]
    if residue == 0:
        if any("P" in s.quantum_numbers for s in spectra):
            for parity in (1, -1):
                for p_value in (1, -1):
                    if not _find(spectra, parity=parity, P=p_value):
                        raise CoverageError(
                            f"N={N} needs sector parity={parity:+d}, P={p_value:+d}"
                        )
        elif not _find(spectra, parity=1) or not _find(spectra, parity=-1):
            raise CoverageError(f"N={N} needs both parity sectors")
        return [
            SectorSpectrum(s.quantum_numbers, s.eigenvalues, "all_sectors_N0", s.degeneracy)
            for s in spectra
        ]
    raise ParameterError(f"N must be even, got {N}")


@dataclass
class SectorPolicy:
    """How the spectrum of a model family is split and de-duplicated.

    Parameters
    ----------
    kind: str
        ``none``, ``kramers``, ``fermion_parity_real``, ``fermion_parity_syk``,
        ``fermion_parity`` or ``cluster_parity``
    N: Optional[int]
        number of Majoranas of fermionic families
    expected_class: Optional[str]
        ``GOE``, ``GUE`` or ``GSE`` when known
    sectors: list[dict]
        quantum numbers of every sector to diagonalise
    charges: dict
        charge label -> `ChargeOperator`
    """

    kind: str
    N: Optional[int] = None
    expected_class: Optional[str] = None
    sectors: list = field(default_factory=lambda: [{}])
    charges: dict = field(default_factory=dict)

    @classmethod
    def for_spec(cls, spec, all_cluster_sectors: bool = False) -> "SectorPolicy":
        """Policy for a `ModelSpec`.

        Parameters
        ----------
        spec: ModelSpec
            model specification
        all_cluster_sectors: bool, default False
            gauged clusters: diagonalise every cluster-parity sector instead of
            the all-(+) sector only

        Returns
        -------
        policy: SectorPolicy
            sector policy
        """

        family = spec.family
        if family == "qudit_syk":
            if spec.d == 2 and spec.q % 2 == 0:
                # prod(iY) K flips every Pauli; it squares to (-1)**L
                if spec.L % 2:
                    return cls("kramers", expected_class="GSE")
                return cls("none", expected_class="GOE")
            return cls("none", expected_class="GUE" if spec.d > 2 else None)
        if family == "clusters_spin_syk":
            return cls("none", expected_class="GOE")

        N = spec.n_majoranas
        parity = make_charge("parity", N)
        if family == "gauged_clusters_syk":
            n_clusters = spec.L
            charges = {
                f"cluster_{j}": make_charge("cluster_parity", N, cluster=j, cluster_size=spec.M)
                for j in range(1, n_clusters + 1)
            }
            if all_cluster_sectors:
                sectors = []
                for code in range(2**n_clusters):
                    sectors.append(
                        {
                            f"cluster_{j}": 1 - 2 * ((code >> (n_clusters - j)) & 1)
                            for j in range(1, n_clusters + 1)
                        }
                    )
            else:
                sectors = [{label: 1 for label in charges}]
            return cls("cluster_parity", N=N, sectors=sectors, charges=charges)

        residue = N % 8
        parity_sectors = [{"parity": 1}, {"parity": -1}]
        if family == "overlapping_clusters_syk" and spec.M == 2 and spec.q_tilde == 2:
            if residue == 0:
                p_charge = make_charge("particle_hole", N)
                return cls(
                    "fermion_parity_real",
                    N=N,
                    expected_class="GOE",
                    sectors=[
                        {"parity": a, "P": b} for a in (1, -1) for b in (1, -1)
                    ],
                    charges={"parity": parity, "P": p_charge},
                )
            return cls(
                "fermion_parity_real",
                N=N,
                expected_class="GUE" if residue == 4 else "GOE",
                sectors=parity_sectors,
                charges={"parity": parity},
            )
        order = spec.q if family == "original_syk" else 2 * spec.q_tilde
        if order == 4:
            expected = {0: "GOE", 2: "GUE", 4: "GSE", 6: "GUE"}[residue]
            return cls(
                "fermion_parity_syk",
                N=N,
                expected_class=expected,
                sectors=parity_sectors,
                charges={"parity": parity},
            )
        return cls("fermion_parity", N=N, sectors=parity_sectors, charges={"parity": parity})

    @property
    def sector_labels(self) -> list[str]:
        """Labels of the sectors kept after the policy is applied."""

        labels = []
        for quantum_numbers in self.sectors:
            if self.kind in ("fermion_parity_real", "fermion_parity_syk") and self.N % 8 in (2, 6):
                if quantum_numbers.get("parity") != 1:
                    continue
            labels.append(SectorSpectrum(quantum_numbers, np.zeros(0)).label)
        return labels


def resolve_sectors(
    hamiltonian: DenseOperator,
    policy: SectorPolicy,
    check: bool = True,
    verbose: int = 0,
) -> list[SectorSpectrum]:
    """Diagonalise every sector of ``policy`` and apply its de-duplication.

    Parameters
    ----------
    hamiltonian: DenseOperator
        dense Hamiltonian
    policy: SectorPolicy
        sector policy of the model family
    check: bool, default True
        verify charge conservation
    verbose: int, default 0
        2 prints sector dimensions

    Returns
    -------
    spectra: list[SectorSpectrum]
        post-policy sector spectra
    """

    if policy.kind in ("none", "kramers"):
        eigenvalues = np.sort(linalg.eigvalsh(hamiltonian.matrix))
        if policy.kind == "kramers":
            return [SectorSpectrum({}, collapse_degenerate_pairs(eigenvalues), "dedoubled_kramers", 2)]
        return [SectorSpectrum({}, eigenvalues)]

    spectra = []
    for quantum_numbers in policy.sectors:
        if policy.kind in ("fermion_parity_real", "fermion_parity_syk") and policy.N % 8 in (2, 6):
            if quantum_numbers.get("parity") != 1:
                continue
        charges = [(policy.charges[label], value) for label, value in quantum_numbers.items()]
        spectrum = project_sector(hamiltonian, charges, check=check)
        if verbose > 1:
            print(f"sector {spectrum.label}: dimension {spectrum.dim}")
        spectra.append(spectrum)

    if policy.kind in ("fermion_parity_real", "fermion_parity_syk"):
        spectra = apply_policy(spectra, policy.N)
    n_zero = sum(s.n_zero_modes for s in spectra)
    if n_zero:
        warnings.warn(f"{n_zero} zero modes found; they are excluded from level statistics")
        if verbose > 0:
            print(f"zero modes: {n_zero} across {len(spectra)} sectors")
    return spectra
