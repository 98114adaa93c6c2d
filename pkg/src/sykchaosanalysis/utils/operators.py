"""
Operator algebra for qubit and qudit SYK-type Hamiltonians.

Pauli strings are stored as symplectic bitmasks with a Z4 phase, qudit terms
as tensor products of generalized Gell-Mann generators, and Majorana operators
are mapped onto Pauli strings with the Jordan-Wigner transformation. Dense
matrices are only built on request through `build_dense`.

Qubit convention: qubit ``j`` (1-based) is the ``j``-th tensor factor from the
left and corresponds to bit ``n_qubits - j`` of both the masks and the
computational basis index. ``|0>`` is the +1 eigenstate of Z.

History:
---------
- **2026/10**: Numba kernel for dense Pauli sums.
- **2026/10**: Initial commit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Union, Optional, Sequence, Tuple
import numpy as np
from numpy.typing import ArrayLike
from numba import njit, prange
import scipy.sparse as sparse

from sykchaosanalysis.utils.errors import (
    ParameterError,
    DimensionError,
    CapacityError,
)

__all__ = [
    "PauliString",
    "PauliSum",
    "GellMannBasis",
    "gell_mann_basis",
    "QuditTerm",
    "MajoranaIndex",
    "DenseOperator",
    "pauli_multiply",
    "jordan_wigner",
    "majorana_bilinear",
    "majorana_product",
    "embed_local_operator",
    "build_dense",
    "check_dense_capacity",
    "all_pauli_strings",
    "DEFAULT_MAX_DIM",
    "DEFAULT_MEMORY_BUDGET_GB",
]

DEFAULT_MAX_DIM = 3**10
DEFAULT_MEMORY_BUDGET_GB = 8.0

_I_POWERS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def _popcount(value: int) -> int:
    return int(value).bit_count()


@dataclass(frozen=True, slots=True)
class PauliString:
    """Phase times a tensor product of single-qubit Paulis.

    The operator is ``i**phase * P_1 x ... x P_n`` with ``P_j = X`` for
    (x, z) = (1, 0), ``Z`` for (0, 1) and ``Y`` for (1, 1).

    Parameters
    ----------
    n_qubits: int
        number of qubits
    x_mask: int
        X bits, qubit j at bit ``n_qubits - j``
    z_mask: int
        Z bits, qubit j at bit ``n_qubits - j``
    phase: int
        exponent k of the global factor i**k
    """

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_qubits > 62:
            raise ParameterError(f"n_qubits must be in [1, 62], got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full or self.x_mask < 0 or self.z_mask < 0:
            raise ParameterError("Pauli masks exceed the number of qubits")
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def from_label(cls, label: str, phase: int = 0) -> "PauliString":
        """Build a string from a label such as ``"XIZY"`` (qubit 1 first).

        Parameters
        ----------
        label: str
            one character per qubit out of I, X, Y, Z
        phase: int
            exponent k of i**k

        Returns
        -------
        pauli: PauliString
            parsed string
        """

        n_qubits = len(label)
        x_mask = 0
        z_mask = 0
        for j, char in enumerate(label.upper(), start=1):
            bit = 1 << (n_qubits - j)
            if char == "X":
                x_mask |= bit
            elif char == "Z":
                z_mask |= bit
            elif char == "Y":
                x_mask |= bit
                z_mask |= bit
            elif char != "I":
                raise ParameterError(f"Unknown Pauli label '{char}'")
        return cls(n_qubits, x_mask, z_mask, phase)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, kind: str) -> "PauliString":
        """Single-qubit Pauli ``kind`` on ``qubit`` (1-based)."""

        if not 1 <= qubit <= n_qubits:
            raise IndexError(f"qubit {qubit} outside 1..{n_qubits}")
        label = ["I"] * n_qubits
        label[qubit - 1] = kind
        return cls.from_label("".join(label))

    @property
    def label(self) -> str:
        chars = []
        for j in range(1, self.n_qubits + 1):
            bit = 1 << (self.n_qubits - j)
            x = bool(self.x_mask & bit)
            z = bool(self.z_mask & bit)
            chars.append("Y" if x and z else "X" if x else "Z" if z else "I")
        return "".join(chars)

    @property
    def support(self) -> Tuple[int, ...]:
        """Sorted 1-based qubits on which the string acts non-trivially."""

        mask = self.x_mask | self.z_mask
        return tuple(
            j for j in range(1, self.n_qubits + 1) if mask & (1 << (self.n_qubits - j))
        )

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def prefactor(self) -> complex:
        """Scalar ``i**phase``."""

        return _I_POWERS[self.phase]

    def with_phase(self, phase: int) -> "PauliString":
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, phase)

    def commutes_with(self, other: "PauliString") -> bool:
        """Symplectic commutation test."""

        _check_sizes(self, other)
        overlap = _popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)
        return overlap % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def __str__(self) -> str:
        return ("+", "+i", "-", "-i")[self.phase] + self.label


def _check_sizes(a: PauliString, b: PauliString):
    if a.n_qubits != b.n_qubits:
        raise DimensionError(
            f"Pauli strings act on {a.n_qubits} and {b.n_qubits} qubits"
        )


def pauli_multiply(a: PauliString, b: PauliString) -> PauliString:
    """Multiply two Pauli strings exactly, tracking the Z4 phase.

    Parameters
    ----------
    a: PauliString
        left factor
    b: PauliString
        right factor

    Returns
    -------
    product: PauliString
        ``a * b``
    """

    _check_sizes(a, b)
    x_mask = a.x_mask ^ b.x_mask
    z_mask = a.z_mask ^ b.z_mask
    # X^x Z^z form: Y contributes i per qubit, Z1 X2 reordering a sign per overlap
    exponent = (
        a.phase
        + b.phase
        + _popcount(a.x_mask & a.z_mask)
        + _popcount(b.x_mask & b.z_mask)
        + 2 * _popcount(a.z_mask & b.x_mask)
        - _popcount(x_mask & z_mask)
    )
    return PauliString(a.n_qubits, x_mask, z_mask, exponent % 4)


@dataclass
class PauliSum:
    """Linear combination of Pauli strings on a fixed number of qubits.

    Parameters
    ----------
    n_qubits: int
        number of qubits
    strings: list[PauliString]
        Pauli strings, phases included
    coefficients: list[complex]
        scalar multiplying each string
    """

    n_qubits: int
    strings: list = field(default_factory=list)
    coefficients: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.strings)

    def add(self, pauli: PauliString, coefficient: complex = 1.0):
        if pauli.n_qubits != self.n_qubits:
            raise DimensionError(
                f"cannot add a {pauli.n_qubits}-qubit string to a {self.n_qubits}-qubit sum"
            )
        self.strings.append(pauli)
        self.coefficients.append(coefficient)

    def hermitian_terms(self) -> list[Tuple[PauliString, float]]:
        """Fold phases into real coefficients.

        Returns
        -------
        terms: list[Tuple[PauliString, float]]
            phase-free strings with real coefficients

        Raises
        ------
        ParameterError
            if a term is not Hermitian
        """

        terms = []
        for pauli, coefficient in zip(self.strings, self.coefficients):
            value = complex(coefficient) * pauli.prefactor
            scale = max(abs(value), 1.0)
            if abs(value.imag) > 1e-12 * scale:
                raise ParameterError(f"term {pauli} with coefficient {coefficient} is not Hermitian")
            terms.append((pauli.with_phase(0), float(value.real)))
        return terms

    def simplified(self, atol: float = 0.0) -> "PauliSum":
        """Merge repeated strings, dropping terms with ``|c| <= atol``."""

        merged: dict = {}
        for pauli, coefficient in zip(self.strings, self.coefficients):
            key = (pauli.x_mask, pauli.z_mask)
            merged[key] = merged.get(key, 0.0) + complex(coefficient) * pauli.prefactor
        result = PauliSum(self.n_qubits)
        for (x_mask, z_mask), value in merged.items():
            if abs(value) > atol:
                result.add(PauliString(self.n_qubits, x_mask, z_mask), value)
        return result


class GellMannBasis:
    """Generalized Gell-Mann generators of SU(d).

    Generators are ordered symmetric ``S_ab`` (a<b lexicographic), then
    antisymmetric ``A_ab`` (a<b lexicographic), then diagonal ``D_l``
    (l = 1..d-1). ``A_ab`` carries -i at (a, b) and +i at (b, a), so for
    d = 2 the list is exactly (X, Y, Z).

    Parameters
    ----------
    d: int
        local dimension, at least 2
    """

    def __init__(self, d: int):
        if d < 2:
            raise ParameterError(f"local dimension must be >= 2, got {d}")
        self._d = int(d)
        self._labels = []
        generators = []

        pairs = [(a, b) for a in range(d) for b in range(a + 1, d)]
        for a, b in pairs:
            generator = np.zeros((d, d), dtype=np.complex128)
            generator[a, b] = 1.0
            generator[b, a] = 1.0
            generators.append(generator)
            self._labels.append(("S", a + 1, b + 1))
        for a, b in pairs:
            generator = np.zeros((d, d), dtype=np.complex128)
            generator[a, b] = -1.0j
            generator[b, a] = 1.0j
            generators.append(generator)
            self._labels.append(("A", a + 1, b + 1))
        for level in range(1, d):
            diagonal = np.zeros(d, dtype=np.complex128)
            diagonal[:level] = 1.0
            diagonal[level] = -level
            generators.append(np.sqrt(2.0 / (level * (level + 1))) * np.diag(diagonal))
            self._labels.append(("D", level))

        self._generators = np.stack(generators)
        self._generators.setflags(write=False)

    @property
    def d(self) -> int:
        return self._d

    @property
    def generators(self) -> np.ndarray:
        """Array of shape (d**2 - 1, d, d)."""

        return self._generators

    @property
    def labels(self) -> list:
        return list(self._labels)

    def __len__(self) -> int:
        return self._d**2 - 1

    def __getitem__(self, alpha: int) -> np.ndarray:
        """Generator ``T_alpha`` with 1-based ``alpha``."""

        if not 1 <= alpha <= len(self):
            raise IndexError(f"generator index {alpha} outside 1..{len(self)}")
        return self._generators[alpha - 1]

    def gram_matrix(self) -> np.ndarray:
        """``Tr(T_a T_b)`` for all pairs, equal to 2 on the diagonal."""

        return np.einsum("aij,bji->ab", self._generators, self._generators)

    def completeness_defect(self) -> float:
        """Max deviation from sum_a T_a[i,j] T_a[k,l] = 2 d_il d_jk - (2/d) d_ij d_kl."""

        d = self._d
        lhs = np.einsum("aij,akl->ijkl", self._generators, self._generators)
        eye = np.eye(d)
        rhs = 2.0 * np.einsum("il,jk->ijkl", eye, eye) - (2.0 / d) * np.einsum(
            "ij,kl->ijkl", eye, eye
        )
        return float(np.max(np.abs(lhs - rhs)))


@lru_cache(maxsize=None)
def gell_mann_basis(d: int) -> GellMannBasis:
    """Cached `GellMannBasis` for dimension ``d``."""

    return GellMannBasis(d)


@dataclass(frozen=True)
class QuditTerm:
    """Coefficient times a product of Gell-Mann generators on distinct sites.

    Parameters
    ----------
    d: int
        local dimension
    L: int
        number of sites
    factors: Tuple[Tuple[int, int], ...]
        (site, alpha) pairs, 1-based sites and generator indices
    coefficient: complex
        scalar prefactor
    """

    d: int
    L: int
    factors: Tuple[Tuple[int, int], ...]
    coefficient: complex = 1.0

    def __post_init__(self):
        sites = [site for site, _ in self.factors]
        if len(set(sites)) != len(sites):
            raise ParameterError(f"qudit term repeats a site: {sites}")
        for site, alpha in self.factors:
            if not 1 <= site <= self.L:
                raise IndexError(f"site {site} outside 1..{self.L}")
            if not 1 <= alpha <= self.d**2 - 1:
                raise IndexError(f"generator {alpha} outside 1..{self.d**2 - 1}")

    @property
    def sites(self) -> Tuple[int, ...]:
        return tuple(site for site, _ in self.factors)

    def local_matrix(self) -> np.ndarray:
        """Dense ``d**q x d**q`` operator on `sites` (in the given order)."""

        basis = gell_mann_basis(self.d)
        local = np.array([[1.0 + 0.0j]])
        for _, alpha in self.factors:
            local = np.kron(local, basis[alpha])
        return self.coefficient * local


@dataclass(frozen=True, order=True)
class MajoranaIndex:
    """Pair label ``psi_{site, flavor}`` of the Majorana ``chi_{2 site - 2 + flavor}``."""

    site: int
    flavor: int

    def __post_init__(self):
        if self.flavor not in (1, 2) or self.site < 1:
            raise IndexError(f"invalid Majorana pair label ({self.site}, {self.flavor})")

    @property
    def chi(self) -> int:
        return 2 * self.site - 2 + self.flavor

    @classmethod
    def from_chi(cls, r: int) -> "MajoranaIndex":
        if r < 1:
            raise IndexError(f"Majorana index {r} must be >= 1")
        return cls((r + 1) // 2, 2 - r % 2)


def _check_majorana_count(N: int):
    if N < 2 or N % 2:
        raise ParameterError(f"number of Majoranas must be even and >= 2, got {N}")


def jordan_wigner(r: int, N: int) -> PauliString:
    """Jordan-Wigner image of the Majorana ``chi_r`` among ``N``.

    ``chi_{2j-1} = Z...Z X_j`` and ``chi_{2j} = Z...Z Y_j`` with Z on qubits
    1..j-1.

    Parameters
    ----------
    r: int
        Majorana index, 1..N
    N: int
        number of Majoranas (even)

    Returns
    -------
    pauli: PauliString
        string on N/2 qubits
    """

    _check_majorana_count(N)
    if not 1 <= r <= N:
        raise IndexError(f"Majorana index {r} outside 1..{N}")
    n_qubits = N // 2
    j = (r + 1) // 2
    bit = 1 << (n_qubits - j)
    string_mask = ((1 << (j - 1)) - 1) << (n_qubits - j + 1)
    x_mask = bit
    z_mask = string_mask | (bit if r % 2 == 0 else 0)
    return PauliString(n_qubits, x_mask, z_mask, 0)


def majorana_product(indices: Sequence[int], N: int) -> PauliString:
    """Ordered product ``chi_{r_1} chi_{r_2} ...`` as a single Pauli string."""

    _check_majorana_count(N)
    result = PauliString(N // 2)
    for r in indices:
        result = pauli_multiply(result, jordan_wigner(r, N))
    return result


def majorana_bilinear(r: int, N: int) -> PauliString:
    """Adjacent bilinear ``chi_r chi_{r+1}``.

    Equals ``i Z_j`` for r = 2j-1 and ``i X_j X_{j+1}`` for r = 2j.

    Parameters
    ----------
    r: int
        first index, 1..N-1
    N: int
        number of Majoranas (even)

    Returns
    -------
    pauli: PauliString
        phase-carrying Pauli string
    """

    _check_majorana_count(N)
    if not 1 <= r <= N - 1:
        raise IndexError(f"bilinear index {r} outside 1..{N - 1}")
    return majorana_product((r, r + 1), N)


@dataclass
class DenseOperator:
    """Dense matrix with cached structural flags."""

    matrix: np.ndarray
    hermitian_flag: bool
    real_flag: bool

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


@njit
def _parity(value: int) -> int:
    count = 0
    while value:
        value &= value - 1
        count += 1
    return count & 1


@njit(parallel=True)
def _assemble_pauli_sum(
    x_masks: ArrayLike,
    z_masks: ArrayLike,
    prefactors: ArrayLike,
    out: ArrayLike,
):
    """Accumulate sum_t p_t X^x_t Z^z_t into ``out`` column by column.

    Parameters
    ----------
    x_masks: ArrayLike
        X masks per term (int64)
    z_masks: ArrayLike
        Z masks per term (int64)
    prefactors: ArrayLike
        coefficient times i**(phase + |x & z|) per term
    out: ArrayLike
        zero-initialised square output matrix
    """

    dim = out.shape[0]
    n_terms = x_masks.shape[0]
    for column in prange(dim):
        for t in range(n_terms):
            sign = 1 - 2 * _parity(z_masks[t] & column)
            out[column ^ x_masks[t], column] += sign * prefactors[t]


def check_dense_capacity(
    dim: int,
    itemsize: int,
    max_dim: Optional[int],
    memory_budget_gb: Optional[float],
):
    """Raise `CapacityError` when a dense dim x dim matrix exceeds either cap."""

    max_dim = DEFAULT_MAX_DIM if max_dim is None else max_dim
    memory_budget_gb = (
        DEFAULT_MEMORY_BUDGET_GB if memory_budget_gb is None else memory_budget_gb
    )
    needed_gb = dim * dim * itemsize / 1024**3
    if dim > max_dim:
        raise CapacityError(
            f"dense dimension {dim} exceeds the configured maximum {max_dim}"
        )
    if needed_gb > memory_budget_gb:
        raise CapacityError(
            f"dense dimension {dim} needs {needed_gb:.2f} GB, budget is {memory_budget_gb:.2f} GB"
        )


def _pauli_sum_dense(
    pauli_sum: PauliSum,
    max_dim: Optional[int],
    memory_budget_gb: Optional[float],
) -> DenseOperator:
    dim = 1 << pauli_sum.n_qubits
    prefactors = np.array(
        [
            complex(coefficient)
            * _I_POWERS[(pauli.phase + _popcount(pauli.x_mask & pauli.z_mask)) % 4]
            for pauli, coefficient in zip(pauli_sum.strings, pauli_sum.coefficients)
        ],
        dtype=np.complex128,
    )
    real_flag = bool(np.all(prefactors.imag == 0.0))
    dtype = np.float64 if real_flag else np.complex128
    check_dense_capacity(dim, np.dtype(dtype).itemsize, max_dim, memory_budget_gb)

    matrix = np.zeros((dim, dim), dtype=dtype)
    if len(pauli_sum):
        x_masks = np.array([p.x_mask for p in pauli_sum.strings], dtype=np.int64)
        z_masks = np.array([p.z_mask for p in pauli_sum.strings], dtype=np.int64)
        values = prefactors.real.copy() if real_flag else prefactors
        _assemble_pauli_sum(x_masks, z_masks, values, matrix)

    return DenseOperator(matrix, _is_hermitian(matrix), real_flag)


def embed_local_operator(
    local: ArrayLike,
    sites: Sequence[int],
    d: int,
    L: int,
) -> sparse.csr_matrix:
    """Embed an operator on ``sites`` into the full ``d**L`` space.

    Parameters
    ----------
    local: ArrayLike
        ``d**q x d**q`` operator, tensor factors ordered as ``sites``
    sites: Sequence[int]
        distinct 1-based sites
    d: int
        local dimension
    L: int
        number of sites

    Returns
    -------
    operator: sparse.csr_matrix
        ``d**L x d**L`` sparse operator
    """

    sites = [int(s) - 1 for s in sites]
    rest = [s for s in range(L) if s not in sites]
    full = sparse.kron(
        sparse.coo_matrix(np.asarray(local)),
        sparse.identity(d ** len(rest), dtype=np.complex128, format="coo"),
        format="coo",
    )
    # kron orders digits as (sites..., rest...); move each digit to its site
    order = sites + rest
    shape = (d,) * L
    inverse = np.argsort(order)

    def to_natural(index: np.ndarray) -> np.ndarray:
        digits = np.unravel_index(index, shape)
        return np.ravel_multi_index(tuple(digits[k] for k in inverse), shape)

    return sparse.csr_matrix(
        (full.data, (to_natural(full.row), to_natural(full.col))),
        shape=(d**L, d**L),
    )


def _qudit_dense(
    terms: Sequence[QuditTerm],
    max_dim: Optional[int],
    memory_budget_gb: Optional[float],
) -> DenseOperator:
    d, L = terms[0].d, terms[0].L
    if any(term.d != d or term.L != L for term in terms):
        raise DimensionError("qudit terms act on different spaces")
    dim = d**L
    check_dense_capacity(dim, np.dtype(np.complex128).itemsize, max_dim, memory_budget_gb)

    grouped: dict = {}
    for term in terms:
        order = np.argsort(term.sites)
        sites = tuple(term.sites[k] for k in order)
        local = term.local_matrix()
        if np.any(order != np.arange(len(order))):
            q = len(order)
            local = (
                local.reshape((d,) * (2 * q))
                .transpose(list(order) + [q + k for k in order])
                .reshape(d**q, d**q)
            )
        grouped[sites] = grouped.get(sites, 0.0) + local

    accumulated = sparse.csr_matrix((dim, dim), dtype=np.complex128)
    for sites, local in grouped.items():
        accumulated = accumulated + embed_local_operator(local, sites, d, L)
    matrix = accumulated.toarray()
    real_flag = bool(np.all(matrix.imag == 0.0))
    if real_flag:
        matrix = np.ascontiguousarray(matrix.real)
    return DenseOperator(matrix, _is_hermitian(matrix), real_flag)


def _is_hermitian(matrix: np.ndarray) -> bool:
    scale = max(float(np.max(np.abs(matrix))) if matrix.size else 0.0, 1.0)
    return bool(np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=1e-12 * scale))


def build_dense(
    op: Union[PauliString, PauliSum, QuditTerm, Sequence[QuditTerm]],
    max_dim: Optional[int] = None,
    memory_budget_gb: Optional[float] = None,
) -> DenseOperator:
    """Materialise an operator as a dense matrix.

    Parameters
    ----------
    op: Union[PauliString, PauliSum, QuditTerm, Sequence[QuditTerm]]
        operator to materialise
    max_dim: Optional[int], default None
        largest allowed dimension, `DEFAULT_MAX_DIM` if None
    memory_budget_gb: Optional[float], default None
        allowed size of the dense matrix, `DEFAULT_MEMORY_BUDGET_GB` if None

    Returns
    -------
    dense: DenseOperator
        float64 matrix when every prefactor is real, complex128 otherwise

    Raises
    ------
    CapacityError
        if the dense matrix does not fit the budget
    """

    if isinstance(op, PauliString):
        pauli_sum = PauliSum(op.n_qubits)
        pauli_sum.add(op, 1.0)
        return _pauli_sum_dense(pauli_sum, max_dim, memory_budget_gb)
    if isinstance(op, PauliSum):
        return _pauli_sum_dense(op, max_dim, memory_budget_gb)
    if isinstance(op, QuditTerm):
        return _qudit_dense([op], max_dim, memory_budget_gb)
    terms = list(op)
    if not terms:
        raise ParameterError("cannot build a dense operator from an empty term list")
    if all(isinstance(term, QuditTerm) for term in terms):
        return _qudit_dense(terms, max_dim, memory_budget_gb)
    raise ParameterError(f"unsupported operator type {type(op).__name__}")


def all_pauli_strings(n_qubits: int) -> list[PauliString]:
    """Every phase-free Pauli string on ``n_qubits`` qubits (4**n of them)."""

    return [
        PauliString.from_label("".join(chars))
        for chars in product("IXYZ", repeat=n_qubits)
    ]
