"""
Trotter circuits and gate costs for Pauli-string Hamiltonians.

Each term ``exp(-i eps P)`` is compiled with single-qubit basis changes
(H for X, S-dagger then H for Y), a linear CNOT ladder over the sorted
support, one Rz on the last qubit and the mirrored ladder, which costs
``2 (len(P) - 1)`` CNOTs. A first-order Trotter step concatenates the term
circuits in a fixed order.

History:
---------
- **2026/10**: Netlist round trip and dense circuit simulation.
- **2026/10**: Initial commit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil
from typing import Optional, Sequence, Tuple, Union
import numpy as np
import pandas as pd

from sykchaosanalysis.utils.errors import ParameterError, TrivialCircuitError
from sykchaosanalysis.utils.operators import PauliString, PauliSum

__all__ = [
    "GateOp",
    "Circuit",
    "GateCostReport",
    "compile_pauli_exponential",
    "trotter_step",
    "circuit_unitary",
    "gate_cost_report",
]

_SINGLE_QUBIT_GATES = ("H", "S", "SDG", "RZ")


@dataclass(frozen=True)
class GateOp:
    """One gate; qubits are 1-based, ``angle`` is set for RZ only."""

    kind: str
    qubits: Tuple[int, ...]
    angle: Optional[float] = None

    def __post_init__(self):
        if self.kind in _SINGLE_QUBIT_GATES and len(self.qubits) != 1:
            raise ParameterError(f"{self.kind} acts on one qubit, got {self.qubits}")
        if self.kind == "CNOT" and (len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]):
            raise ParameterError(f"CNOT needs distinct control and target, got {self.qubits}")
        if self.kind not in _SINGLE_QUBIT_GATES + ("CNOT",):
            raise ParameterError(f"unknown gate '{self.kind}'")
        if (self.kind == "RZ") != (self.angle is not None):
            raise ParameterError("angle is required for RZ and only for RZ")

    def to_line(self) -> str:
        if self.kind == "RZ":
            return f"RZ {self.qubits[0]} {self.angle!r}"
        return " ".join([self.kind] + [str(q) for q in self.qubits])


@dataclass
class Circuit:
    """Ordered gate list on ``n_qubits`` qubits (first gate applied first)."""

    n_qubits: int
    ops: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ops)

    def append(self, op: GateOp):
        if any(not 1 <= q <= self.n_qubits for q in op.qubits):
            raise IndexError(f"gate {op.to_line()} outside 1..{self.n_qubits}")
        self.ops.append(op)

    def extend(self, other: "Circuit"):
        if other.n_qubits != self.n_qubits:
            raise ParameterError("cannot concatenate circuits of different widths")
        self.ops.extend(other.ops)

    @property
    def cnot_count(self) -> int:
        return sum(1 for op in self.ops if op.kind == "CNOT")

    def to_netlist(self) -> str:
        """One gate per line: ``CNOT c t``, ``RZ q angle``, ``H q``, ``S q``, ``SDG q``."""

        return "\n".join(op.to_line() for op in self.ops) + ("\n" if self.ops else "")

    @classmethod
    def from_netlist(cls, text: str, n_qubits: int) -> "Circuit":
        circuit = cls(n_qubits)
        for line in text.splitlines():
            fields = line.split()
            if not fields:
                continue
            kind = fields[0].upper()
            if kind == "RZ":
                circuit.append(GateOp(kind, (int(fields[1]),), float(fields[2])))
            else:
                circuit.append(GateOp(kind, tuple(int(f) for f in fields[1:])))
        return circuit


def compile_pauli_exponential(pauli: PauliString, epsilon: float) -> Circuit:
    """Circuit implementing ``exp(-i epsilon P)`` exactly.

    Parameters
    ----------
    pauli: PauliString
        Hermitian string, phase +1 or -1
    epsilon: float
        rotation parameter

    Returns
    -------
    circuit: Circuit
        basis change, CNOT ladder, Rz(2 epsilon sign), mirrored ladder, undo

    Raises
    ------
    TrivialCircuitError
        for the identity string
    """

    if not pauli.is_hermitian:
        raise ParameterError(f"{pauli} is not Hermitian")
    if pauli.is_identity:
        raise TrivialCircuitError("exp(-i eps I) is a global phase")
    sign = 1.0 if pauli.phase == 0 else -1.0
    support = pauli.support
    label = pauli.label
    circuit = Circuit(pauli.n_qubits)

    for qubit in support:
        if label[qubit - 1] == "X":
            circuit.append(GateOp("H", (qubit,)))
        elif label[qubit - 1] == "Y":
            circuit.append(GateOp("SDG", (qubit,)))
            circuit.append(GateOp("H", (qubit,)))
    ladder = [GateOp("CNOT", (c, t)) for c, t in zip(support[:-1], support[1:])]
    for op in ladder:
        circuit.append(op)
    circuit.append(GateOp("RZ", (support[-1],), 2.0 * epsilon * sign))
    for op in reversed(ladder):
        circuit.append(op)
    for qubit in support:
        if label[qubit - 1] == "X":
            circuit.append(GateOp("H", (qubit,)))
        elif label[qubit - 1] == "Y":
            circuit.append(GateOp("H", (qubit,)))
            circuit.append(GateOp("S", (qubit,)))
    return circuit


def trotter_step(
    hamiltonian,
    dt: float,
    term_order: str = "canonical",
) -> Circuit:
    """First-order Trotter step ``prod_k exp(-i dt c_k P_k)``.

    Parameters
    ----------
    hamiltonian: Union[HamiltonianInstance, PauliSum]
        qubit Hamiltonian
    dt: float
        time step, positive
    term_order: str, default "canonical"
        ``canonical`` keeps the coupling enumeration order, ``lexicographic``
        sorts terms by support then label

    Returns
    -------
    circuit: Circuit
        concatenated term circuits; zero and identity terms are skipped
    """

    terms = getattr(hamiltonian, "terms", hamiltonian)
    if not isinstance(terms, PauliSum):
        raise ParameterError("Trotter steps need a Pauli-string Hamiltonian")
    if dt <= 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    folded = terms.hermitian_terms()
    if term_order == "lexicographic":
        folded = sorted(folded, key=lambda term: (term[0].support, term[0].label))
    elif term_order != "canonical":
        raise ParameterError(f"unknown term order '{term_order}'")

    circuit = Circuit(terms.n_qubits)
    for pauli, coefficient in folded:
        if coefficient == 0.0 or pauli.is_identity:
            continue
        circuit.extend(compile_pauli_exponential(pauli, dt * coefficient))
    return circuit


_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)
_S = np.diag([1.0, 1.0j])
_SDG = np.diag([1.0, -1.0j])


def _single_qubit_matrix(op: GateOp) -> np.ndarray:
    if op.kind == "H":
        return _H
    if op.kind == "S":
        return _S
    if op.kind == "SDG":
        return _SDG
    half = 0.5 * op.angle
    return np.diag([np.exp(-1.0j * half), np.exp(1.0j * half)])


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of ``circuit`` in the qubit-1-leftmost convention."""

    n = circuit.n_qubits
    dim = 1 << n
    indices = np.arange(dim)
    unitary = np.eye(dim, dtype=np.complex128)
    for op in circuit.ops:
        if op.kind == "CNOT":
            control, target = op.qubits
            flip = ((indices >> (n - control)) & 1) << (n - target)
            unitary = unitary[indices ^ flip, :]
        else:
            qubit = op.qubits[0]
            gate = np.kron(
                np.kron(np.eye(1 << (qubit - 1)), _single_qubit_matrix(op)),
                np.eye(1 << (n - qubit)),
            )
            unitary = gate @ unitary
    return unitary


@dataclass
class GateCostReport:
    """Term and CNOT counts of one first-order Trotter step."""

    model: str
    n_qubits: int
    n_terms: int
    max_length: int
    mean_length: float
    cnots_per_step: int
    length_bound: Optional[int]
    syk_n_terms: int
    syk_cnots_per_step: int

    @property
    def cnot_ratio(self) -> float:
        return self.cnots_per_step / self.syk_cnots_per_step

    def to_frame(self) -> pd.DataFrame:
        row = dict(self.__dict__)
        row["cnot_ratio"] = self.cnot_ratio
        return pd.DataFrame([row])


def _string_costs(strings: Sequence[PauliString]) -> Tuple[int, float, int]:
    lengths = np.array([p.weight for p in strings if not p.is_identity], dtype=np.int64)
    if lengths.size == 0:
        return 0, 0.0, 0
    return int(lengths.max()), float(lengths.mean()), int(np.sum(2 * (lengths - 1)))


def gate_cost_report(spec) -> GateCostReport:
    """Gate cost of one Trotter step of ``spec`` next to original SYK at equal N.

    Parameters
    ----------
    spec: ModelSpec
        qubit model specification

    Returns
    -------
    report: GateCostReport
        counts, string lengths and the SYK_4 comparison
    """

    from sykchaosanalysis.HamiltonianFactory import HamiltonianFactory, ModelSpec

    if not spec.is_qubit_model:
        raise ParameterError("gate costs are defined for qubit models only")
    strings = HamiltonianFactory(spec).term_strings()
    max_length, mean_length, cnots = _string_costs(strings)

    N = spec.n_majoranas
    syk_strings = HamiltonianFactory(ModelSpec("original_syk", N=N)).term_strings()
    _, _, syk_cnots = _string_costs(syk_strings)

    bound = None
    if spec.family == "overlapping_clusters_syk":
        bound = spec.q_tilde * ceil(spec.M / 2 + 1)
    return GateCostReport(
        model=spec.tag,
        n_qubits=spec.n_qubits,
        n_terms=len(strings),
        max_length=max_length,
        mean_length=mean_length,
        cnots_per_step=cnots,
        length_bound=bound,
        syk_n_terms=len(syk_strings),
        syk_cnots_per_step=syk_cnots,
    )
