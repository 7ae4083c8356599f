"""
spinham - Configuration

Physical constants, limits, exit codes and the tolerance table shared by the
library and the command line.
"""

import os
from typing import Dict, Mapping, Optional

APP_NAME = "spinham"
APP_VERSION = "1.0.0"

# Atomic units; the Bohr magneton is 1/(2c)
SPEED_OF_LIGHT = 137.035999084
SPEED_OF_LIGHT_ENV = "SPINHAM_C"

MAX_TWO_S = 15

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_CONTRACT_VIOLATION = 3
EXIT_MODEL_VIOLATION = 4

TOLERANCES = {
    "unitary": 1e-10,
    "hermitian": 1e-10,
    "orthogonal": 1e-10,
    "axis_norm": 1e-12,
    "normalized": 1e-10,
    "kramers_structure": 1e-8,
    "tr_odd": 1e-10,
    "fixed_point": 1e-10,
    "remainder": 1e-8,
    "overlap_branch": 1e-10,
    "zero_row": 1e-12,
    "pole": 1e-12,
    "span": 1e-10,
    "g_diagonal": 1e-8,
    "super_diagonal": 1e-8,
    "super_diagonal_floor": 1e-10,
    "degenerate": 1e-12,
    "diag_residual": 1e-9,
    "cross_validate": 1e-9,
    "irrep": 1e-8,
    "theorem": 1e-10,
    "eta_residual": 1e-9,
    "antiunitary": 1e-12,
}

# --tol overrides applied for the whole run, seen by checks that take no tol mapping
_active_overrides: Dict[str, float] = {}


def set_tolerance_overrides(overrides: Optional[Mapping[str, float]] = None):
    _active_overrides.clear()
    if overrides:
        _active_overrides.update({k: float(v) for k, v in overrides.items()})


def tolerance(name: str, overrides: Optional[Mapping[str, float]] = None) -> float:
    if overrides and name in overrides:
        return float(overrides[name])
    if name in _active_overrides:
        return _active_overrides[name]
    return TOLERANCES[name]


def resolve_speed_of_light(flag_value: Optional[float] = None) -> float:
    """CLI flag wins over the environment, which wins over the default."""
    if flag_value is not None:
        value = float(flag_value)
    else:
        raw = os.environ.get(SPEED_OF_LIGHT_ENV)
        if raw is None or raw.strip() == "":
            return SPEED_OF_LIGHT
        try:
            value = float(raw)
        except ValueError:
            from src.errors import ValidationError
            raise ValidationError(f"{SPEED_OF_LIGHT_ENV}={raw!r} is not a number")
    if not value > 0:
        from src.errors import ValidationError
        raise ValidationError(f"speed of light must be positive, got {value}")
    return value
