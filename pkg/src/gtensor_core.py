"""
g-tensor core

Projected Zeeman matrices H_u = (1/2c) g_uv S_v, g extraction, the
G = g g^T principal axes (W matrix with I- sign handling), closed-form and
numeric Zeeman splittings, and the orientation of the fictitious spin.

g is not a tensor: its row index follows real-space rotations
(g -> O^T g) and its column index follows fictitious-spin rotations
(g -> g O+), independently.
"""

from dataclasses import dataclass, field
from typing import List, Mapping, Optional, Tuple

import numpy as np

from config import tolerance
from src.errors import BasisNotKramersError, NumericalError, ValidationError
from src.spin_algebra import (
    AxisAngle,
    SpinMatrices,
    SpinQuantum,
    is_hermitian,
    su_rotation,
    unitarity_residual,
)
from src.time_reversal import is_tr_antisymmetric, kramers_rep

I_MINUS = np.diag([1.0, 1.0, -1.0])


@dataclass(frozen=True, eq=False)
class ZeemanTriple:
    s: SpinQuantum
    hx: np.ndarray
    hy: np.ndarray
    hz: np.ndarray

    def __post_init__(self):
        m = self.s.m
        mats = []
        for name in ("hx", "hy", "hz"):
            h = np.array(getattr(self, name), dtype=complex)
            if h.shape != (m, m):
                raise ValidationError(f"{name} has shape {h.shape}, expected ({m}, {m})")
            if not is_hermitian(h, tolerance("hermitian")):
                raise ValidationError(f"{name} is not Hermitian")
            h.setflags(write=False)
            mats.append(h)
        for name, h in zip(("hx", "hy", "hz"), mats):
            object.__setattr__(self, name, h)

    @classmethod
    def from_stack(cls, s: SpinQuantum, stack: np.ndarray) -> "ZeemanTriple":
        return cls(s, stack[0], stack[1], stack[2])

    @property
    def components(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.hx, self.hy, self.hz

    def stack(self) -> np.ndarray:
        return np.stack(self.components)

    def along(self, field_vec) -> np.ndarray:
        """sum_u B_u H_u"""
        return np.einsum("u,uij->ij", np.asarray(field_vec, dtype=float), self.stack())


@dataclass(frozen=True, eq=False)
class GMatrixSmall:
    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g)
        if g.shape != (3, 3):
            raise ValidationError(f"g must be 3x3, got shape {g.shape}")
        if np.iscomplexobj(g):
            if np.max(np.abs(g.imag)) > 0:
                raise ValidationError("g must be real")
            g = g.real
        g = g.astype(float)
        if not np.all(np.isfinite(g)):
            raise ValidationError("g has non-finite entries")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.g))

    def off_diagonal_max(self) -> float:
        return float(np.max(np.abs(self.g - np.diag(np.diag(self.g)))))


@dataclass(frozen=True, eq=False)
class CapitalG:
    G: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.G)[::-1]


@dataclass
class PrincipalDecomposition:
    o_r: np.ndarray
    o_f: np.ndarray
    g_values: np.ndarray
    det_sign: int
    g_diag_residual: float
    singular: bool = False
    w: Optional[np.ndarray] = None
    zero_rows: Tuple[int, ...] = field(default_factory=tuple)
    g_eigs: Optional[np.ndarray] = None

    @property
    def g_bar(self) -> np.ndarray:
        return np.diag(self.g_values)

    def to_dict(self) -> dict:
        return {
            "g_values": [float(x) for x in self.g_values],
            "det_sign": int(self.det_sign),
            "singular": bool(self.singular),
            "g_diag_residual": float(self.g_diag_residual),
            "o_r": self.o_r.tolist(),
            "o_f": self.o_f.tolist(),
        }


def _check_c(c: float):
    if not c > 0:
        raise ValidationError(f"speed of light must be positive, got {c}")


def _check_orthogonal(o: np.ndarray, name: str) -> np.ndarray:
    o = np.asarray(o, dtype=float)
    if o.shape != (3, 3):
        raise ValidationError(f"{name} must be 3x3")
    if np.max(np.abs(o.T @ o - np.eye(3))) > tolerance("orthogonal"):
        raise ValidationError(f"{name} is not orthogonal")
    return o


def _as_g(g) -> np.ndarray:
    return g.g if isinstance(g, GMatrixSmall) else GMatrixSmall(g).g


def build_zeeman(g, sm: SpinMatrices, c: float) -> ZeemanTriple:
    _check_c(c)
    stack = np.einsum("uv,vij->uij", _as_g(g), sm.stack()) / (2 * c)
    return ZeemanTriple.from_stack(sm.s, stack)


def extract_g_doublet(zt: ZeemanTriple, c: float,
                      tol: Optional[Mapping[str, float]] = None) -> GMatrixSmall:
    """
    g_u1 = 4c Re(h_u)_12, g_u2 = -4c Im(h_u)_12, g_u3 = 4c (h_u)_11.

    The basis must be Kramers-adapted, which shows as (h_u)_22 = -(h_u)_11.
    """
    _check_c(c)
    if zt.s.m != 2:
        raise ValidationError(f"doublet extraction needs m = 2, got m = {zt.s.m}")
    limit = tolerance("kramers_structure", tol)
    g = np.zeros((3, 3))
    for u, h in enumerate(zt.components):
        if abs(h[1, 1] + h[0, 0]) > limit:
            raise BasisNotKramersError(
                f"(h_{'xyz'[u]})_22 != -(h_{'xyz'[u]})_11: basis is not a Kramers pair"
            )
        g[u, 0] = 4 * c * h[0, 1].real
        g[u, 1] = -4 * c * h[0, 1].imag
        g[u, 2] = 4 * c * h[0, 0].real
    return GMatrixSmall(g)


def extract_g_general(zt: ZeemanTriple, sm: SpinMatrices, c: float) -> Tuple[GMatrixSmall, float]:
    """g_uv = 2c tr(h_u S_v) / tr(S_v S_v), plus the residual outside span{S_v}."""
    _check_c(c)
    if zt.s != sm.s:
        raise ValidationError(f"Zeeman triple has S = {zt.s.label()}, spin matrices have S = {sm.s.label()}")
    ops = sm.stack()
    h = zt.stack()
    g = 2 * c * np.einsum("uij,vji->uv", h, ops).real / sm.trace_norm()
    rebuilt = np.einsum("uv,vij->uij", g, ops) / (2 * c)
    residual = float(np.max(np.abs(h - rebuilt)))
    return GMatrixSmall(g), residual


def capital_g(g) -> CapitalG:
    g = _as_g(g)
    big = g @ g.T
    return CapitalG((big + big.T) / 2)


def _canonical_cluster_basis(vectors: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(vectors) built by projecting e1, e2, e3 in order."""
    k = vectors.shape[1]
    proj = vectors @ vectors.T
    out: List[np.ndarray] = []
    for e in np.eye(3):
        r = proj @ e
        for b in out:
            r = r - b * (b @ r)
        norm = np.linalg.norm(r)
        if norm > 0.5 / np.sqrt(3):
            out.append(r / norm)
        if len(out) == k:
            break
    return np.column_stack(out)


def diag_capital_g(big_g, tol: Optional[Mapping[str, float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    o_r with det +1 and G eigenvalues in descending order.

    Degenerate eigenvalues get a canonical basis of their eigenspace; each
    column is then signed so its largest-magnitude entry is positive, and
    column 3 is flipped if the determinant is negative.
    """
    mat = big_g.G if isinstance(big_g, CapitalG) else np.asarray(big_g, dtype=float)
    lam, vec = np.linalg.eigh(mat)
    lam = lam[::-1].copy()
    vec = vec[:, ::-1].copy()
    scale = max(1.0, float(np.max(np.abs(lam))))
    limit = tolerance("degenerate", tol) * scale
    start = 0
    while start < 3:
        stop = start + 1
        while stop < 3 and lam[start] - lam[stop] <= limit:
            stop += 1
        if stop - start > 1:
            vec[:, start:stop] = _canonical_cluster_basis(vec[:, start:stop])
        start = stop
    for j in range(3):
        if vec[np.argmax(np.abs(vec[:, j])), j] < 0:
            vec[:, j] = -vec[:, j]
    if np.linalg.det(vec) < 0:
        vec[:, 2] = -vec[:, 2]
    return vec, lam


def fictitious_rotation(gp: np.ndarray, g_eigs: Optional[np.ndarray] = None,
                        tol: Optional[Mapping[str, float]] = None) -> Tuple[np.ndarray, np.ndarray, Tuple[int, ...], bool]:
    """
    W-matrix construction for a g whose rows are mutually orthogonal.

    Column v of W is row v of gp over sqrt(G_v); rows with G_v <= tau are
    replaced by Gram-Schmidt completion over e1, e2, e3. Returns
    (o_f, W, zero_rows, flipped) where o_f = W I- when det W < 0.
    """
    gp = np.asarray(gp, dtype=float)
    if g_eigs is None:
        g_eigs = np.sum(gp * gp, axis=1)
    g_eigs = np.asarray(g_eigs, dtype=float)
    tau = tolerance("zero_row", tol) * max(1.0, float(np.max(g_eigs)))
    cols: List[Optional[np.ndarray]] = [None] * 3
    zero_rows = []
    for v in range(3):
        if g_eigs[v] > tau:
            cols[v] = gp[v] / np.sqrt(g_eigs[v])
        else:
            zero_rows.append(v)
    for v in zero_rows:
        found = [c for c in cols if c is not None]
        for e in np.eye(3):
            r = e.copy()
            for b in found:
                r = r - b * (b @ r)
            norm = np.linalg.norm(r)
            # among e1..e3 at least one remainder has norm^2 >= 1/3
            if norm >= 0.5:
                cols[v] = r / norm
                break
    w = np.column_stack(cols)
    flipped = bool(np.linalg.det(w) < 0)
    o_f = w @ I_MINUS if flipped else w.copy()
    return o_f, w, tuple(zero_rows), flipped


def principal_axes(g, tol: Optional[Mapping[str, float]] = None) -> PrincipalDecomposition:
    """
    Bring g to diagonal form o_r^T g o_f with proper rotations on both sides.

    1. G = g g^T
    2. o_r diagonalizes G (descending eigenvalues)
    3. g' = o_r^T g has orthogonal rows of length sqrt(G_v)
    4. W from the normalized rows, completed for zero rows
    5. o_f = W, or W I- when det W = -1; the g-values are then +-sqrt(G_v)
    """
    g = _as_g(g)
    o_r, g_eigs = diag_capital_g(capital_g(g), tol)
    gp = o_r.T @ g
    o_f, w, zero_rows, flipped = fictitious_rotation(gp, g_eigs, tol)
    signs = np.array([1.0, 1.0, -1.0 if flipped else 1.0])
    g_values = signs * np.sqrt(np.clip(g_eigs, 0.0, None))
    g_values[list(zero_rows)] = 0.0
    g_bar = o_r.T @ g @ o_f
    residual = float(np.max(np.abs(g_bar - np.diag(np.diag(g_bar)))))
    singular = len(zero_rows) > 0
    det_sign = 1 if singular or not flipped else -1
    return PrincipalDecomposition(
        o_r=o_r,
        o_f=o_f,
        g_values=g_values,
        det_sign=det_sign,
        g_diag_residual=residual,
        singular=singular,
        w=w,
        zero_rows=zero_rows,
        g_eigs=g_eigs,
    )


def rotate_g_real(g, o: np.ndarray) -> GMatrixSmall:
    """g -> O^T g"""
    o = _check_orthogonal(o, "real-space rotation")
    return GMatrixSmall(o.T @ _as_g(g))


def rotate_g_fict(g, o_plus: np.ndarray) -> GMatrixSmall:
    """g -> g O+; improper fictitious-spin rotations cannot be reached by a basis change."""
    o_plus = _check_orthogonal(o_plus, "fictitious-spin rotation")
    if np.linalg.det(o_plus) < 0:
        raise ValidationError("fictitious-spin rotation must have det +1")
    return GMatrixSmall(_as_g(g) @ o_plus)


def field_vector(g, field_vec, c: float) -> np.ndarray:
    """b_v = (1/2c) sum_u B_u g_uv"""
    return np.asarray(field_vec, dtype=float) @ _as_g(g) / (2 * c)


def splittings_closed_form(g, field_vec, sm: SpinMatrices, c: float,
                           tol: Optional[Mapping[str, float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Levels M_k |b| in ascending order and the matching eigenvectors.

    The eigenvectors are the columns of exp(-i theta S.n) with theta the
    polar angle of b and n along z x b, reversed to ascending M.
    """
    _check_c(c)
    b = field_vector(g, field_vec, c)
    norm = float(np.linalg.norm(b))
    m = sm.s.m
    if norm == 0.0:
        return np.zeros(m), np.eye(m, dtype=complex)
    levels = sm.s.m_values[::-1] * norm
    pole = 1 - tolerance("pole", tol)
    if b[2] >= norm * pole:
        vecs = np.eye(m, dtype=complex)
    else:
        if b[2] <= -norm * pole:
            aa = AxisAngle(np.pi, np.array([1.0, 0.0, 0.0]))
        else:
            axis = np.array([-b[1], b[0], 0.0])
            aa = AxisAngle(float(np.arccos(np.clip(b[2] / norm, -1.0, 1.0))), axis / np.linalg.norm(axis))
        vecs = su_rotation(sm, aa)
    return levels, vecs[:, ::-1].copy()


def zeeman_eigensystem(e0, zt: ZeemanTriple, field_vec) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonalize diag(e0) + sum_u B_u H_u; energies ascending."""
    e0 = np.asarray(e0, dtype=float).reshape(-1)
    if e0.shape != (zt.s.m,):
        raise ValidationError(f"e0 has {e0.shape[0]} entries, expected {zt.s.m}")
    h = np.diag(e0).astype(complex) + zt.along(field_vec)
    h = (h + h.conj().T) / 2
    try:
        energies, coeffs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Hermitian eigensolver failed: {e}")
    return energies, coeffs


def effective_g(g, direction) -> float:
    """sqrt(n^T G n) for a field direction n; the doublet splitting is g_eff B / 2c."""
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if n.shape != (3,) or norm == 0.0:
        raise ValidationError("field direction must be a nonzero 3-vector")
    n = n / norm
    return float(np.sqrt(max(n @ capital_g(g).G @ n, 0.0)))


def phase_rotation_doublet(alpha: float) -> np.ndarray:
    c2, s2 = np.cos(2 * alpha), np.sin(2 * alpha)
    return np.array([[c2, s2, 0.0], [-s2, c2, 0.0], [0.0, 0.0, 1.0]])


def transform_zeeman(zt: ZeemanTriple, u: np.ndarray) -> ZeemanTriple:
    """Basis change h -> u^dag h u."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (zt.s.m, zt.s.m) or unitarity_residual(u) > tolerance("unitary"):
        raise ValidationError("basis change must be an m x m unitary")
    stack = np.einsum("ji,ujk,kl->uil", u.conj(), zt.stack(), u)
    stack = (stack + np.conj(np.swapaxes(stack, 1, 2))) / 2
    return ZeemanTriple.from_stack(zt.s, stack)


def rotate_field_frame(zt: ZeemanTriple, o: np.ndarray) -> ZeemanTriple:
    """h'_u = sum_q O_qu h_q, so g' = O^T g."""
    o = _check_orthogonal(o, "real-space rotation")
    return ZeemanTriple.from_stack(zt.s, np.einsum("qu,qij->uij", o, zt.stack()))


def phase_shift_doublet(zt: ZeemanTriple, alpha: float) -> ZeemanTriple:
    """Move a doublet to the basis (e^{i alpha} Phi, e^{-i alpha} Phi_bar)."""
    if zt.s.m != 2:
        raise ValidationError("phase shift applies to doublets only")
    return transform_zeeman(zt, np.diag([np.exp(1j * alpha), np.exp(-1j * alpha)]))


def tr_residual(zt: ZeemanTriple) -> float:
    k = kramers_rep(zt.s)
    return max(is_tr_antisymmetric(k, h) for h in zt.components)


def spin_orientation(v: np.ndarray, sm: SpinMatrices) -> np.ndarray:
    """s_u = v^dag S_u v"""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape != (sm.s.m,):
        raise ValidationError(f"vector has length {v.shape[0]}, expected {sm.s.m}")
    if abs(np.linalg.norm(v) - 1.0) > tolerance("normalized"):
        raise ValidationError("state vector is not normalized")
    s = np.array([np.vdot(v, op @ v) for op in sm.components])
    if np.max(np.abs(s.imag)) > 1e-12:
        raise NumericalError("spin expectation values are not real")
    return s.real
