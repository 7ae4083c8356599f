"""
Synthetic fixtures

Random g-tensors with a controlled determinant sign and singular rows, and
Zeeman triples scrambled by a known field-frame rotation and basis change.
Every generator is a pure function of its seed.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.errors import ValidationError
from src.gtensor_core import (
    GMatrixSmall,
    ZeemanTriple,
    build_zeeman,
    rotate_field_frame,
    transform_zeeman,
)
from src.rng import make_rng, random_unit_vector, spawn_seeds
from src.spin_algebra import AxisAngle, SpinMatrices, SpinQuantum, so3_rotation, spin_matrices, su_rotation


@dataclass(frozen=True)
class FixtureSpec:
    seed: int
    s: SpinQuantum
    det_sign: Optional[int] = None
    singular_rows: int = 0
    sv_range: Tuple[float, float] = (1.5, 2.5)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.det_sign not in (None, 1, -1):
            raise ValidationError(f"det_sign must be +1, -1 or unconstrained, got {self.det_sign}")
        if self.singular_rows not in (0, 1, 2):
            raise ValidationError(f"singular_rows must be 0, 1 or 2, got {self.singular_rows}")
        if self.singular_rows and self.det_sign is not None:
            raise ValidationError("a singular g has no determinant sign to request")
        lo, hi = self.sv_range
        if lo > hi or lo < 0 or (lo == 0 and self.singular_rows == 0):
            raise ValidationError(f"invalid singular-value range {self.sv_range}")


def random_rotation(rng: np.random.Generator) -> Tuple[np.ndarray, AxisAngle]:
    """Axis uniform on the sphere, angle uniform on [0, pi]."""
    aa = AxisAngle(rng.uniform(0.0, np.pi), random_unit_vector(rng))
    return so3_rotation(aa), aa


def random_g(spec: FixtureSpec) -> GMatrixSmall:
    """g = O1 diag(sigma) O2 with the requested determinant sign and zero singular values."""
    rng = make_rng(spec.seed)
    o1, _ = random_rotation(rng)
    o2, _ = random_rotation(rng)
    sigma = rng.uniform(spec.sv_range[0], spec.sv_range[1], 3)
    flip = rng.random() < 0.5
    if spec.singular_rows:
        sigma[3 - spec.singular_rows:] = 0.0
    elif spec.det_sign == -1 or (spec.det_sign is None and flip):
        sigma[2] = -sigma[2]
    return GMatrixSmall(o1 @ np.diag(sigma) @ o2)


def scramble_with(zt: ZeemanTriple, o_r: np.ndarray, aa: AxisAngle,
                  sm: Optional[SpinMatrices] = None) -> Tuple[ZeemanTriple, np.ndarray, np.ndarray]:
    """h'_u = sum_q O_qu h_q, then h'' = U^dag h' U with U = exp(-i theta S.n)."""
    sm = spin_matrices(zt.s) if sm is None else sm
    u = su_rotation(sm, aa)
    return transform_zeeman(rotate_field_frame(zt, o_r), u), o_r, u


def scramble(zt: ZeemanTriple, sm: SpinMatrices, seed: int) -> Tuple[ZeemanTriple, np.ndarray, np.ndarray]:
    rng = make_rng(seed)
    o_r, _ = random_rotation(rng)
    _, aa = random_rotation(rng)
    return scramble_with(zt, o_r, aa, sm)


def make_fixture(spec: FixtureSpec, c: float, scrambled: bool = False) -> Tuple[GMatrixSmall, ZeemanTriple]:
    """Ground-truth g and its Zeeman triple, optionally scrambled by a seed derived from spec.seed."""
    g = random_g(spec)
    sm = spin_matrices(spec.s)
    zt = build_zeeman(g, sm, c)
    if scrambled:
        zt, _, _ = scramble(zt, sm, spawn_seeds(spec.seed, 1)[0])
    return g, zt
