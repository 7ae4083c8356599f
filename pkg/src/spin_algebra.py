"""
Spin algebra

Fictitious-spin operator matrices for any multiplicity m = 2S+1, the
axis-angle exponential maps into the m-dimensional SU(2) irrep and into SO(3),
and the homomorphism identity that connects them.

Sign convention: su_rotation returns exp(-i theta S.n). The adjoint form
exp(+i theta S.n) is su_rotation with theta negated.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from config import MAX_TWO_S, tolerance
from src.errors import DimensionError, NumericalError, ValidationError
from src.rng import random_unit_vector


@dataclass(frozen=True)
class SpinQuantum:
    two_s: int

    def __post_init__(self):
        if isinstance(self.two_s, bool) or not isinstance(self.two_s, (int, np.integer)):
            raise ValidationError(f"two_s must be an integer, got {self.two_s!r}")
        if self.two_s > MAX_TWO_S:
            raise DimensionError(
                f"two_s={self.two_s} exceeds the dimension cap (two_s <= {MAX_TWO_S}, m <= {MAX_TWO_S + 1})"
            )
        if self.two_s < 1:
            raise DimensionError(f"two_s={self.two_s} is below 1; a multiplicity of at least 2 is required")
        object.__setattr__(self, "two_s", int(self.two_s))

    @property
    def m(self) -> int:
        return self.two_s + 1

    @property
    def s(self) -> float:
        return self.two_s / 2

    @property
    def m_values(self) -> np.ndarray:
        """M = S, S-1, ..., -S (descending, the row order of every matrix)."""
        return self.s - np.arange(self.m)

    @property
    def parity(self) -> int:
        return -1 if self.two_s % 2 else 1

    def label(self) -> str:
        return f"{self.two_s}/2" if self.two_s % 2 else str(self.two_s // 2)


@dataclass(frozen=True, eq=False)
class SpinMatrices:
    s: SpinQuantum
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def components(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.sx, self.sy, self.sz

    def stack(self) -> np.ndarray:
        return np.stack(self.components)

    def dot(self, vec) -> np.ndarray:
        """sum_u vec_u S_u"""
        v = np.asarray(vec, dtype=float)
        return v[0] * self.sx + v[1] * self.sy + v[2] * self.sz

    def trace_norm(self) -> float:
        """tr(S_v S_v), the same for every v."""
        s = self.s.s
        return s * (s + 1) * self.s.m / 3

    def commutator_residual(self) -> float:
        eps = levi_civita()
        ops = self.stack()
        worst = 0.0
        for u in range(3):
            for v in range(3):
                comm = ops[u] @ ops[v] - ops[v] @ ops[u]
                expected = 1j * np.einsum("w,wij->ij", eps[u, v], ops)
                worst = max(worst, float(np.max(np.abs(comm - expected))))
        return worst


@dataclass(frozen=True, eq=False)
class AxisAngle:
    theta: float
    n: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float).reshape(-1)
        if n.shape != (3,) or not np.all(np.isfinite(n)) or not np.isfinite(self.theta):
            raise ValidationError("axis must be a finite 3-vector and theta finite")
        if abs(np.linalg.norm(n) - 1.0) > tolerance("axis_norm"):
            raise ValidationError(f"rotation axis is not a unit vector (|n| = {np.linalg.norm(n):.15g})")
        n.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "theta", float(self.theta))

    @classmethod
    def from_rotvec(cls, rotvec) -> "AxisAngle":
        rv = np.asarray(rotvec, dtype=float)
        theta = float(np.linalg.norm(rv))
        if theta < 1e-15:
            return cls(0.0, np.array([0.0, 0.0, 1.0]))
        return cls(theta, rv / theta)

    @classmethod
    def from_rotation(cls, o: np.ndarray) -> "AxisAngle":
        """Axis-angle of a proper rotation; the matrix is orthonormalized first."""
        o = np.asarray(o, dtype=float)
        if np.linalg.det(o) <= 0:
            raise ValidationError("cannot read an axis-angle from an improper rotation")
        return cls.from_rotvec(Rotation.from_matrix(o).as_rotvec())

    def rotvec(self) -> np.ndarray:
        return self.theta * self.n

    def to_dict(self) -> dict:
        return {"theta": self.theta, "n": [float(x) for x in self.n]}


@dataclass(frozen=True, eq=False)
class RotationGenerators:
    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray

    def stack(self) -> np.ndarray:
        return np.stack([self.r1, self.r2, self.r3])

    def dot(self, vec) -> np.ndarray:
        v = np.asarray(vec, dtype=float)
        return v[0] * self.r1 + v[1] * self.r2 + v[2] * self.r3


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=1)
def levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for u, v, w in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[u, v, w] = 1.0
        eps[u, w, v] = -1.0
    return _readonly(eps)


@lru_cache(maxsize=1)
def rotation_generators() -> RotationGenerators:
    """(R_u)_vw = -i eps_uvw"""
    r = -1j * levi_civita()
    return RotationGenerators(*(_readonly(r[u].copy()) for u in range(3)))


@lru_cache(maxsize=None)
def spin_matrices(s: SpinQuantum) -> SpinMatrices:
    """Ladder-operator construction in the descending-M basis."""
    m_vals = s.m_values
    spin = s.s
    # <M+1|S+|M> for M = m_vals[1:], placed one row above
    ladder = np.sqrt(spin * (spin + 1) - m_vals[1:] * (m_vals[1:] + 1))
    sp = np.diag(ladder, k=1).astype(complex)
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = -0.5j * (sp - sm)
    sz = np.diag(m_vals).astype(complex)
    return SpinMatrices(s, _readonly(sx), _readonly(sy), _readonly(sz))


def is_hermitian(h: np.ndarray, tol: float) -> bool:
    return h.ndim == 2 and h.shape[0] == h.shape[1] and float(np.max(np.abs(h - h.conj().T), initial=0.0)) <= tol


def unitarity_residual(u: np.ndarray) -> float:
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def matrix_exp_hermitian_generator(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t h) through the eigendecomposition of the Hermitian h."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, tolerance("hermitian")):
        raise ValidationError("generator is not Hermitian")
    h = (h + h.conj().T) / 2
    try:
        lam, vec = np.linalg.eigh(h)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Hermitian eigensolver failed: {e}")
    return (vec * np.exp(-1j * t * lam)) @ vec.conj().T


def su_rotation(sm: SpinMatrices, aa: AxisAngle) -> np.ndarray:
    """exp(-i theta S.n), a member of the m-dimensional SU(2) irrep."""
    return matrix_exp_hermitian_generator(sm.dot(aa.n), aa.theta)


def so3_rotation(aa: AxisAngle) -> np.ndarray:
    """Rodrigues' formula; equals exp(-i theta R.n)."""
    nx, ny, nz = aa.n
    k = np.array([[0.0, -nz, ny], [nz, 0.0, -nx], [-ny, nx, 0.0]])
    return np.eye(3) + np.sin(aa.theta) * k + (1 - np.cos(aa.theta)) * (k @ k)


def homomorphism_residual(sm: SpinMatrices, aa: AxisAngle) -> float:
    """
    max_u |U S_u U^dag - sum_v (exp(-i theta R.n))_uv S_v| with U = exp(+i theta S.n).

    The SO(3) side is exponentiated from the generators, independent of
    so3_rotation.
    """
    u = su_rotation(sm, AxisAngle(-aa.theta, aa.n))
    o = matrix_exp_hermitian_generator(rotation_generators().dot(aa.n), aa.theta)
    ops = sm.stack()
    rhs = np.einsum("uv,vij->uij", o, ops)
    lhs = np.einsum("ij,ujk,kl->uil", u, ops, u.conj().T)
    return float(np.max(np.abs(lhs - rhs)))


def so3_from_su(u: np.ndarray, sm: SpinMatrices) -> np.ndarray:
    """
    SO(3) matrix induced by a spin-space unitary:
    u^dag S_a u = sum_b O_ab S_b, read off by trace orthogonality.
    """
    ops = sm.stack()
    moved = np.einsum("ji,ajk,kl->ail", u.conj(), ops, u)
    o = np.einsum("aij,bji->ab", moved, ops).real / sm.trace_norm()
    return o


def factor_unitary(u: np.ndarray) -> Tuple[float, np.ndarray]:
    """u = exp(i alpha/m) u_plus with det u_plus = 1 and alpha in (-pi, pi]."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError("expected a square matrix")
    if unitarity_residual(u) > tolerance("unitary"):
        raise ValidationError("matrix is not unitary")
    alpha = float(np.angle(np.linalg.det(u)))
    if alpha <= -np.pi:
        alpha += 2 * np.pi
    return alpha, np.exp(-1j * alpha / u.shape[0]) * u


def factor_u2(u: np.ndarray) -> Tuple[float, np.ndarray]:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 unitary, got shape {u.shape}")
    return factor_unitary(u)


def random_axis_angle(rng: np.random.Generator, theta_max: Optional[float] = None) -> AxisAngle:
    theta = rng.uniform(0.0, np.pi if theta_max is None else theta_max)
    return AxisAngle(theta, random_unit_vector(rng))
