"""
Exception types for syk-chaos-analysis.

Each error subclasses the builtin exception a caller would otherwise expect,
so ``except ValueError`` style handling keeps working. The command line
interface maps the families onto process exit codes.

History:
---------
- **2026/10**: Initial commit.
"""

__all__ = [
    "ParameterError",
    "ConfigError",
    "DimensionError",
    "CoverageError",
    "InputError",
    "TrivialCircuitError",
    "CapacityError",
    "AlgebraError",
    "NumericalError",
    "UnfoldingError",
    "exit_code_for",
]


class ParameterError(ValueError):
    """Invalid model, sector or diagnostic parameters."""


class ConfigError(ValueError):
    """Unreadable or inconsistent configuration or archive header."""


class DimensionError(ValueError):
    """Operands act on a different number of qubits."""


class CoverageError(ValueError):
    """A symmetry sector required by the sector policy is missing."""


class InputError(ValueError):
    """Empty ensemble, empty spectrum or empty time grid."""


class TrivialCircuitError(ValueError):
    """Exponential of the identity string was requested."""


class CapacityError(MemoryError):
    """Dense representation exceeds the configured memory budget."""


class AlgebraError(ArithmeticError):
    """Charges fail to commute with each other or with the Hamiltonian."""


class NumericalError(ArithmeticError):
    """Numerical check failed (rank mismatch, degeneracy collapse, ...)."""


class UnfoldingError(NumericalError):
    """Fitted staircase is not monotone on the retained range."""


def exit_code_for(error: BaseException) -> int:
    """Map an exception onto the command line exit code.

    Parameters
    ----------
    error: BaseException
        raised exception

    Returns
    -------
    exit_code: int
        2 for configuration errors, 3 for capacity errors,
        4 for numerical failures, 1 otherwise.
    """

    if isinstance(error, CapacityError):
        return 3
    if isinstance(error, (NumericalError, AlgebraError)):
        return 4
    if isinstance(error, (ValueError, FileNotFoundError, KeyError)):
        return 2
    return 1
