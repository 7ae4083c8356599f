"""
Error types

Every failure the library raises derives from SpinHamError and carries the
process exit code the CLI reports for it.
"""

from typing import Optional

from config import EXIT_CONTRACT_VIOLATION, EXIT_INPUT_ERROR, EXIT_MODEL_VIOLATION


class SpinHamError(Exception):
    exit_code = EXIT_INPUT_ERROR
    kind = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "exit_code": self.exit_code}


# Input errors

class ValidationError(SpinHamError):
    kind = "validation"


class DimensionError(SpinHamError):
    kind = "dimension"


class PreconditionError(SpinHamError):
    kind = "precondition"


class StructuralError(SpinHamError):
    kind = "structural"


class RankError(SpinHamError):
    kind = "rank"


class MatrixFileError(SpinHamError):
    kind = "matrix_file"

    def __init__(self, message: str, location: Optional[str] = None):
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
        self.location = location

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["location"] = self.location
        return d


# Contract violations

class InconsistencyError(SpinHamError):
    exit_code = EXIT_CONTRACT_VIOLATION
    kind = "inconsistency"


class NumericalError(SpinHamError):
    exit_code = EXIT_CONTRACT_VIOLATION
    kind = "numerical"


# Model violations: the input is not a linear-in-S effective spin Hamiltonian

class ModelViolationError(SpinHamError):
    exit_code = EXIT_MODEL_VIOLATION
    kind = "model_violation"


class BasisNotKramersError(ModelViolationError):
    kind = "basis_not_kramers"
