"""
Coupling supports, variance conventions and reproducible Gaussian draws.

Every model family is described by the ordered list of index tuples that
carry an independent Gaussian coupling (its support) and by the variance of
those couplings. Couplings come from numpy Philox streams keyed per tuple:
each value is a pure function of (seed, sample id, family, index tuple), so a
sample can be regenerated in any process and in any order.

History:
---------
- **2026/10**: Philox streams for the coupling draws.
- **2026/10**: General q-tilde and general-M overlapping clusters.
- **2026/10**: Initial commit.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction
from itertools import combinations, product
from math import comb, factorial
from typing import Union, Sequence, Tuple
import numpy as np

from sykchaosanalysis.utils.errors import ParameterError

__all__ = [
    "qudit_variance",
    "sachdev_ye_variance",
    "overlapping_m2_variance",
    "overlapping_variance",
    "syk_variance",
    "qudit_support",
    "sachdev_ye_support",
    "clusters_spin_support",
    "gauged_cluster_windows",
    "gauged_support",
    "overlapping_support",
    "syk_support",
    "sample_key",
    "index_codes",
    "counter_gaussians",
]


def qudit_variance(d: int, L: int, q: int) -> float:
    """Coupling variance giving ``<Tr H^2> = d**L`` for the qudit model.

    Parameters
    ----------
    d: int
        local dimension
    L: int
        number of sites
    q: int
        interaction locality

    Returns
    -------
    variance: float
        ``[C(L, q) (2 (d**2 - 1) / d)**q]**-1``
    """

    _check_qudit(d, L, q)
    return 1.0 / (comb(L, q) * (2.0 * (d**2 - 1) / d) ** q)


def sachdev_ye_variance(d: int, L: int) -> float:
    """Variance for the adjoint-diagonal q = 2 couplings ``J_ij delta_ab``."""

    _check_qudit(d, L, 2)
    return 1.0 / (comb(L, 2) * (d**2 - 1) * (2.0 / d) ** 2)


def overlapping_m2_variance(N: int, exact: bool = False) -> Union[float, Fraction]:
    """``(N - 1) / (2 N**2)`` for M = 2 overlapping clusters.

    Equal to the original SYK variance ``6 / N**3`` rescaled by the ratio of
    coupling counts ``C(N, 4) / C(N - 2, 2)``.

    Parameters
    ----------
    N: int
        number of Majoranas
    exact: bool, default False
        return a `Fraction` instead of a float

    Returns
    -------
    variance: Union[float, Fraction]
        coupling variance
    """

    _check_majoranas(N, 6)
    value = Fraction(N - 1, 2 * N**2)
    return value if exact else float(value)


def syk_variance(N: int, q: int = 4, exact: bool = False) -> Union[float, Fraction]:
    """Original SYK variance ``(q - 1)! / N**(q - 1)``."""

    _check_majoranas(N, q)
    value = Fraction(factorial(q - 1), N ** (q - 1))
    return value if exact else float(value)


def overlapping_variance(
    N: int,
    M: int,
    q_tilde: int,
    exact: bool = False,
) -> Union[float, Fraction]:
    """Variance matching the energy variance of SYK_{2 q_tilde} at equal N.

    ``(2 q_tilde - 1)! / N**(2 q_tilde - 1) * C(N, 2 q_tilde) / n_couplings``

    Parameters
    ----------
    N: int
        number of Majoranas
    M: int
        cluster range
    q_tilde: int
        number of bilinears per term
    exact: bool, default False
        return a `Fraction`

    Returns
    -------
    variance: Union[float, Fraction]
        coupling variance
    """

    n_couplings = len(overlapping_support(N, M, q_tilde))
    if n_couplings == 0:
        raise ParameterError(f"no couplings for N={N}, M={M}, q_tilde={q_tilde}")
    value = syk_variance(N, 2 * q_tilde, exact=True) * Fraction(
        comb(N, 2 * q_tilde), n_couplings
    )
    return value if exact else float(value)


def _check_qudit(d: int, L: int, q: int):
    if d < 2:
        raise ParameterError(f"local dimension d must be >= 2, got {d}")
    if q < 1 or L < q:
        raise ParameterError(f"need 1 <= q <= L, got q={q}, L={L}")


def _check_majoranas(N: int, q: int):
    if N % 2 or N < q:
        raise ParameterError(f"N must be even and >= {q}, got {N}")


def qudit_support(d: int, L: int, q: int) -> list[Tuple[Tuple[int, int], ...]]:
    """Index tuples ``((i_1, a_1), ..., (i_q, a_q))`` with ``i_1 < ... < i_q``.

    Returns
    -------
    support: list
        ``C(L, q) (d**2 - 1)**q`` tuples in lexicographic order
    """

    _check_qudit(d, L, q)
    generators = range(1, d**2)
    support = []
    for sites in combinations(range(1, L + 1), q):
        for alphas in product(generators, repeat=q):
            support.append(tuple(zip(sites, alphas)))
    return support


def sachdev_ye_support(L: int) -> list[Tuple[int, int]]:
    """Site pairs ``(i_1, i_2)`` carrying one coupling each."""

    return list(combinations(range(1, L + 1), 2))


def clusters_spin_support(
    L: int,
    q_tilde: int = 2,
    paulis: Sequence[int] = (1, 2, 3),
) -> list[Tuple[int, ...]]:
    """Supports ``(i_1, a_1, b_1, ..., i_q, a_q, b_q)`` for clusters spin-SYK.

    Cluster ``i`` holds qubits ``2i - 1`` and ``2i``; ``a`` and ``b`` label the
    Pauli (1 = X, 2 = Y, 3 = Z) on each of them.

    Parameters
    ----------
    L: int
        number of clusters
    q_tilde: int, default 2
        number of clusters per term
    paulis: Sequence[int], default (1, 2, 3)
        allowed Pauli labels, (1, 2) for the XY restriction

    Returns
    -------
    support: list
        ``C(L, q_tilde) len(paulis)**(2 q_tilde)`` tuples
    """

    if q_tilde < 1 or L < q_tilde:
        raise ParameterError(f"need 1 <= q_tilde <= L, got q_tilde={q_tilde}, L={L}")
    support = []
    for clusters in combinations(range(1, L + 1), q_tilde):
        for labels in product(paulis, repeat=2 * q_tilde):
            entry = []
            for k, cluster in enumerate(clusters):
                entry.extend((cluster, labels[2 * k], labels[2 * k + 1]))
            support.append(tuple(entry))
    return support


def gauged_cluster_windows(L: int, M: int, variant: str = "psi") -> list[list[int]]:
    """Majorana indices ``chi`` available to each cluster.

    ``psi``: qubit window of ``M / 2`` sites, bilinears ``psi_{r,a} psi_{r',a'}``
    with ``r < r'``. ``chi``: window of ``M`` consecutive Majoranas.

    Returns
    -------
    windows: list[list[int]]
        per cluster, the bilinear index pairs flattened as [(a, b), ...]
    """

    if M % 2 or M < 4:
        raise ParameterError(f"gauged clusters need an even M >= 4, got {M}")
    if L < 2:
        raise ParameterError(f"gauged clusters need L >= 2, got {L}")
    k = M // 2
    windows = []
    for j in range(1, L + 1):
        pairs = []
        if variant == "psi":
            sites = range(k * (j - 1) + 1, k * j + 1)
            for r, r_prime in combinations(sites, 2):
                for alpha, alpha_prime in product((1, 2), repeat=2):
                    pairs.append((2 * r - 2 + alpha, 2 * r_prime - 2 + alpha_prime))
        elif variant == "chi":
            majoranas = range(M * (j - 1) + 1, M * j + 1)
            pairs = list(combinations(majoranas, 2))
        else:
            raise ParameterError(f"unknown gauged variant '{variant}'")
        windows.append(pairs)
    return windows


def gauged_support(L: int, M: int, variant: str = "psi") -> list[Tuple[int, ...]]:
    """Supports ``(i, a, b, j, c, e)``: clusters ``i < j`` with bilinears ``chi_a chi_b``, ``chi_c chi_e``."""

    windows = gauged_cluster_windows(L, M, variant)
    support = []
    for i, j in combinations(range(1, L + 1), 2):
        for (a, b), (c, e) in product(windows[i - 1], windows[j - 1]):
            support.append((i, a, b, j, c, e))
    return support


def overlapping_support(N: int, M: int, q_tilde: int = 2) -> list[Tuple[int, ...]]:
    """Supports ``(r_1, s_1, ..., r_q, s_q)`` of overlapping clusters SYK.

    ``r_1 < s_1 < r_2 < s_2 < ...``, ``s_i - r_i < M`` and all indices within
    1..N (no wrap-around).

    Parameters
    ----------
    N: int
        number of Majoranas
    M: int
        cluster range, at least 2
    q_tilde: int, default 2
        bilinears per term

    Returns
    -------
    support: list
        lexicographically ordered tuples
    """

    _check_majoranas(N, 2 * q_tilde)
    if M < 2:
        raise ParameterError(f"cluster range M must be >= 2, got {M}")
    support = []

    def extend(prefix: Tuple[int, ...], start: int):
        if len(prefix) == 2 * q_tilde:
            support.append(prefix)
            return
        for r in range(start, N + 1):
            for s in range(r + 1, min(r + M - 1, N) + 1):
                extend(prefix + (r, s), s + 1)

    extend((), 1)
    return support


def syk_support(N: int, q: int = 4) -> list[Tuple[int, ...]]:
    """All ``r_1 < ... < r_q`` index tuples, ``C(N, q)`` of them."""

    _check_majoranas(N, q)
    return list(combinations(range(1, N + 1), q))


def _stable_digest(text: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(text.encode("ascii"), digest_size=8).digest(), "little"
    )


def sample_key(seed: int, sample_id: int, family: str) -> int:
    """64-bit key shared by all couplings of one sample."""

    return _stable_digest(f"{family}|{int(seed)}|{int(sample_id)}")


def index_codes(indices: Sequence[Tuple]) -> np.ndarray:
    """Stable 64-bit hash of each index tuple.

    Parameters
    ----------
    indices: Sequence[Tuple]
        coupling index tuples

    Returns
    -------
    codes: np.ndarray
        uint64 codes, one per tuple
    """

    return np.array(
        [_stable_digest(repr(tuple(index))) for index in indices], dtype=np.uint64
    )


def _philox_normal(key: int, code: int) -> float:
    """Single standard normal from a Philox stream keyed on (sample, tuple)."""

    bit_generator = np.random.Philox(key=(int(key) << 64) | int(code))
    return float(np.random.Generator(bit_generator).standard_normal())


def counter_gaussians(
    seed: int,
    sample_id: int,
    family: str,
    indices: Sequence[Tuple],
    variance: float,
) -> np.ndarray:
    """Draw one centred Gaussian per index tuple.

    The value attached to a tuple does not depend on the order of ``indices``
    nor on which other tuples are requested.

    Parameters
    ----------
    seed: int
        master seed
    sample_id: int
        disorder realisation
    family: str
        model family name, salts the key
    indices: Sequence[Tuple]
        coupling index tuples
    variance: float
        target variance

    Returns
    -------
    couplings: np.ndarray
        float64 couplings aligned with ``indices``
    """

    if variance < 0:
        raise ParameterError(f"variance must be non-negative, got {variance}")
    if len(indices) == 0:
        return np.zeros(0, dtype=np.float64)
    key = sample_key(seed, sample_id, family)
    normals = np.array(
        [_philox_normal(key, code) for code in index_codes(indices)], dtype=np.float64
    )
    return np.sqrt(variance) * normals
