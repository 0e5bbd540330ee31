# pylint: disable=dangerous-default-value
from enum import Enum
from typing import Any


class NOT_SET:
    def __bool__(self) -> bool:
        return False

    def __copy__(self) -> Any:
        return NOT_SET

    def __deepcopy__(self, memodict: dict = {}) -> Any:
        return NOT_SET


NOT_SET: Any = NOT_SET()  # type:ignore

DEFAULT_DEPTH_CAP = 20
DEFAULT_BFS_CAP = 2**25
DEFAULT_CLOSURE_CAP = 2**25
DENSE_STORAGE_LIMIT = 2**30
DENSE_SPECTRAL_LIMIT = 5040
POWER_ITERATION_TOL = 1e-8
POWER_ITERATION_CAP = 10**6
MAX_PRIME = 2**31


class ParamType(Enum):
    OPTION = "option"
    FLAG = "flag"


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"


class Storage(Enum):
    DENSE = "dense"
    SPARSE = "sparse"


class EigenKind(Enum):
    SPLIT = "split"
    NON_SPLIT = "non-split"
    PARABOLIC = "parabolic"
    CENTRAL = "central"


class ConjTag(Enum):
    REGULAR = "regular"
    CENTRAL = "central"
    UNIPOTENT_RESIDUE = "unipotent-residue"
    UNIPOTENT_NON_RESIDUE = "unipotent-non-residue"


class EscapeMode(Enum):
    GENERIC = "generic"
    RATS = "rats"
    KOT = "kot"


class FixtureKind(Enum):
    COSET = "coset"
    SUBGROUP_PLUS_POINT = "subgroup_plus_point"


class ExpanderKind(Enum):
    AMTAR = "amtar"
    CORZ = "corz"


class Sl2LabError(Exception):
    """Base class of all errors raised by the laboratory."""

    def __init__(self, message: str, **diagnostics: Any):
        super().__init__(message)
        self.diagnostics = diagnostics


class DomainError(Sl2LabError, ValueError):
    """Arithmetic precondition violated (zero inverse, index out of range, ...)."""


class ContextMismatchError(Sl2LabError):
    """Operands live over different primes."""


class HypothesisError(Sl2LabError):
    """The hypothesis of a lemma does not hold for the given input."""


class CapExceededError(Sl2LabError):
    """A configured size or depth cap was reached before the answer was known."""


class EscapeFailure(CapExceededError):
    """No escaping element was found within the depth cap."""


class ConvergenceError(Sl2LabError):
    """An iterative solver stopped before reaching its tolerance."""


class ImplementationBugError(Sl2LabError):
    """An internal invariant was breached. Cannot happen if the mathematics holds."""


class CommandConfigError(Sl2LabError):
    """There is a mistake in the command configuration."""
