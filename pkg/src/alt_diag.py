"""
Alternative g-tensor diagonalization

Works on a Zeeman triple whose real-space frame already makes G diagonal:
diagonalize H_z, fix det C = 1, then choose the eigenvector phases so the
super-diagonal of C^dag H_x C is real and positive. The resulting basis change
is an SU(2) irrep member and leaves g diagonal, without ever solving for the
rotation axis explicitly.
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

from config import tolerance
from src.errors import (
    InconsistencyError,
    ModelViolationError,
    NumericalError,
    PreconditionError,
    ValidationError,
)
from src.gtensor_core import (
    GMatrixSmall,
    PrincipalDecomposition,
    ZeemanTriple,
    build_zeeman,
    capital_g,
    extract_g_general,
    fictitious_rotation,
    principal_axes,
    rotate_g_real,
    transform_zeeman,
)
from src.spin_algebra import AxisAngle, SpinMatrices, so3_from_su, su_rotation


@dataclass
class IrrepCheck:
    axis_angle: Optional[AxisAngle]
    residual: float
    phase_index: int
    u: np.ndarray


@dataclass
class AltDiagResult:
    u: np.ndarray
    g_diag: GMatrixSmall
    alphas: np.ndarray
    residual: float
    eta: Optional[float] = None
    eta_residual: Optional[float] = None
    betas: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gamma: float = 0.0
    g33: float = 0.0
    g33_residual: float = 0.0
    frame_residual: float = 0.0
    degenerate: bool = False
    fallback: bool = False
    irrep_residual: float = 0.0
    irrep_rotation: Optional[AxisAngle] = None
    irrep_phase_index: int = 0
    det_sign: int = 1
    singular: bool = False

    @property
    def eta_or_alphas(self):
        return self.eta if self.eta is not None else self.alphas

    @property
    def g_values(self) -> np.ndarray:
        return np.diag(self.g_diag.g).copy()

    def to_dict(self) -> dict:
        d = {
            "g_values": [float(x) for x in self.g_values],
            "det_sign": int(self.det_sign),
            "singular": bool(self.singular),
            "residual": float(self.residual),
            "alphas": [float(x) for x in self.alphas],
            "eta": None if self.eta is None else float(self.eta),
            "eta_residual": None if self.eta_residual is None else float(self.eta_residual),
            "g33_residual": float(self.g33_residual),
            "degenerate": bool(self.degenerate),
            "fallback": bool(self.fallback),
            "irrep_residual": float(self.irrep_residual),
            "irrep_rotation": None if self.irrep_rotation is None else self.irrep_rotation.to_dict(),
            "u": [[[float(z.real), float(z.imag)] for z in row] for row in self.u],
        }
        return d


@dataclass
class CrossValidationReport:
    principal: PrincipalDecomposition
    alternative: AltDiagResult
    max_deviation: float
    det_sign_agrees: bool

    def to_dict(self) -> dict:
        return {
            "principal": self.principal.to_dict(),
            "alternative": self.alternative.to_dict(),
            "max_deviation": float(self.max_deviation),
            "det_sign_agrees": bool(self.det_sign_agrees),
        }


def phase_system_matrix(m: int) -> np.ndarray:
    """Rows alpha_k - alpha_{k+1} for k < m, then the all-ones row."""
    if m < 2:
        raise ValidationError("phase system needs m >= 2")
    a = np.zeros((m, m), dtype=int)
    for k in range(m - 1):
        a[k, k] = 1
        a[k, k + 1] = -1
    a[m - 1, :] = 1
    return a


def _integer_determinant(rows: Sequence[Sequence[int]]) -> int:
    # Bareiss fraction-free elimination
    a = [[int(x) for x in row] for row in rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def phase_system_determinant(m: int) -> int:
    return _integer_determinant(phase_system_matrix(m).tolist())


def solve_phase_system(betas, gamma: float) -> np.ndarray:
    """alpha_k - alpha_{k+1} = beta_k and sum_k alpha_k = -gamma."""
    betas = np.asarray(betas, dtype=float).reshape(-1)
    a = phase_system_matrix(betas.size + 1).astype(float)
    try:
        return np.linalg.solve(a, np.append(betas, -gamma))
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"phase system is singular: {e}")


def solve_doublet_eta(g_tilde) -> Tuple[float, float]:
    """
    eta with g~ Rz(eta) diagonal and positive (1,1) entry.

    atan2 picks the branch with (g~ Rz)_11 = hypot(g~_11, g~_12) >= 0, so eta + pi is never returned.

    The residual is the second condition g~_21 cos(eta) + g~_22 sin(eta) = 0.
    """
    g = g_tilde.g if isinstance(g_tilde, GMatrixSmall) else np.asarray(g_tilde, dtype=float)
    eta = float(np.arctan2(g[0, 1], g[0, 0]))
    residual = abs(g[1, 0] * np.cos(eta) + g[1, 1] * np.sin(eta))
    return eta, float(residual)


def irrep_membership(u: np.ndarray, sm: SpinMatrices) -> IrrepCheck:
    """
    Read theta, n from the SO(3) action of u on {S_v}, rebuild exp(-i theta S.n)
    and compare. det u = 1 leaves an m-th root of unity free; it is snapped
    away so the returned u equals the rebuilt rotation.
    """
    m = sm.s.m
    o = so3_from_su(u, sm)
    try:
        aa = AxisAngle.from_rotation(o)
    except ValidationError:
        return IrrepCheck(None, float("inf"), 0, u)
    v0 = su_rotation(sm, aa)
    lam = np.trace(v0.conj().T @ u) / m
    index = int(np.round(np.angle(lam) * m / (2 * np.pi))) % m
    snapped = u * np.exp(-2j * np.pi * index / m)
    return IrrepCheck(aa, float(np.max(np.abs(snapped - v0))), index, snapped)


def _det_sign(g_values: np.ndarray, singular: bool) -> int:
    if singular:
        return 1
    return -1 if np.prod(np.sign(g_values)) < 0 else 1


def _fallback(zt: ZeemanTriple, sm: SpinMatrices, c: float, g_in: np.ndarray, g_diag: np.ndarray,
              tol: Optional[Mapping[str, float]], degenerate: bool) -> AltDiagResult:
    """Zero rows: build o_f from the W matrix in the current frame and rotate directly."""
    o_f, _, zero_rows, _ = fictitious_rotation(g_in, g_diag, tol)
    aa = AxisAngle.from_rotation(o_f)
    u = su_rotation(sm, aa)
    g_t, _ = extract_g_general(transform_zeeman(zt, u), sm, c)
    residual = g_t.off_diagonal_max()
    singular = len(zero_rows) > 0
    return AltDiagResult(
        u=u,
        g_diag=g_t,
        alphas=np.zeros(0),
        residual=residual,
        degenerate=degenerate,
        fallback=True,
        irrep_rotation=aa,
        det_sign=_det_sign(np.diag(g_t.g), singular),
        singular=singular,
    )


def alt_diagonalize(zt: ZeemanTriple, sm: SpinMatrices, c: float,
                    tol: Optional[Mapping[str, float]] = None) -> AltDiagResult:
    """
    1. diagonalize h_z, eigenvalues descending against M_k descending
    2. scale C so det C = 1
    3. X = C^dag h_x C, super-diagonal phases beta_k
    4. solve the phase system for alpha_k
    5. u = C diag(e^{i alpha_k})
    6. extract g in the new basis

    Rows 1 or 3 of g equal to zero cannot fix the phases; those inputs use
    the W-matrix rotation instead (fallback=True).
    """
    m = sm.s.m
    g_in, span_residual = extract_g_general(zt, sm, c)
    if span_residual > tolerance("span", tol):
        raise ModelViolationError(
            f"Zeeman triple is not linear in S (residual {span_residual:.3e} outside span{{S_v}})"
        )
    big = capital_g(g_in).G
    g_diag = np.diag(big).copy()
    off = float(np.max(np.abs(big - np.diag(g_diag))))
    if off > tolerance("g_diagonal", tol) * max(1.0, float(np.max(np.abs(g_diag)))):
        raise PreconditionError(
            f"G is not diagonal in this frame (max off-diagonal {off:.3e}); rotate the field frame first"
        )
    tau = tolerance("zero_row", tol) * max(1.0, float(np.max(g_diag)))
    if g_diag[0] <= tau or g_diag[2] <= tau:
        return _fallback(zt, sm, c, g_in.g, g_diag, tol, degenerate=g_diag[2] <= tau)

    m_vals = sm.s.m_values
    energies, vecs = np.linalg.eigh(zt.hz)
    energies = energies[::-1]
    c_mat = vecs[:, ::-1].copy()
    g33 = 2 * c * float(energies @ m_vals) / float(m_vals @ m_vals)
    g33_residual = float(np.max(np.abs(energies - g33 * m_vals / (2 * c))))
    gaps = energies[:-1] - energies[1:]
    if np.min(gaps) <= tolerance("degenerate", tol) * max(1.0, float(np.max(np.abs(energies)))):
        return _fallback(zt, sm, c, g_in.g, g_diag, tol, degenerate=True)

    gamma = float(np.angle(np.linalg.det(c_mat)))
    c_mat = c_mat * np.exp(-1j * gamma / m)

    x = c_mat.conj().T @ zt.hx @ c_mat
    sup = np.diag(x, k=1)
    sx_sup = np.diag(sm.sx, k=1).real
    if np.min(np.abs(sup)) < tolerance("super_diagonal_floor", tol) * np.linalg.norm(zt.hx):
        return _fallback(zt, sm, c, g_in.g, g_diag, tol, degenerate=False)
    g11 = np.sqrt(g_diag[0])
    mismatch = float(np.max(np.abs(2 * c * np.abs(sup) - g11 * sx_sup)))
    if mismatch > tolerance("super_diagonal", tol) * max(1.0, g11):
        raise ModelViolationError(
            f"super-diagonal of C^dag h_x C does not follow the S_x pattern (mismatch {mismatch:.3e})"
        )
    betas = np.angle(sup)
    gamma_left = float(np.angle(np.linalg.det(c_mat)))
    alphas = solve_phase_system(betas, gamma_left)
    u = c_mat * np.exp(1j * alphas)

    check = irrep_membership(u, sm)
    if check.residual > tolerance("irrep", tol):
        raise InconsistencyError(
            f"solved basis change is not an SU(2) irrep member (residual {check.residual:.3e})"
        )
    u = check.u
    alphas = alphas - 2 * np.pi * check.phase_index / m

    g_frame, _ = extract_g_general(transform_zeeman(zt, c_mat), sm, c)
    gf = g_frame.g
    frame_residual = float(max(abs(gf[2, 0]), abs(gf[2, 1]), abs(gf[0, 2]), abs(gf[1, 2])))
    eta = eta_residual = None
    if m == 2:
        eta, eta_residual = solve_doublet_eta(gf)
        if eta_residual > tolerance("eta_residual", tol) * max(1.0, g11):
            raise NumericalError(f"eta does not diagonalize the doublet g (residual {eta_residual:.3e})")

    g_t, _ = extract_g_general(transform_zeeman(zt, u), sm, c)
    residual = g_t.off_diagonal_max()
    if residual > tolerance("diag_residual", tol) * max(1.0, g11):
        raise NumericalError(f"g is not diagonal after the basis change (residual {residual:.3e})")
    singular = g_diag[1] <= tau
    return AltDiagResult(
        u=u,
        g_diag=g_t,
        alphas=alphas,
        residual=residual,
        eta=eta,
        eta_residual=eta_residual,
        betas=betas,
        gamma=gamma,
        g33=g33,
        g33_residual=g33_residual,
        frame_residual=frame_residual,
        irrep_residual=check.residual,
        irrep_rotation=check.axis_angle,
        irrep_phase_index=check.phase_index,
        det_sign=_det_sign(np.diag(g_t.g), singular),
        singular=bool(singular),
    )


def cross_validate(g, sm: SpinMatrices, c: float,
                   tol: Optional[Mapping[str, float]] = None) -> CrossValidationReport:
    """principal_axes against alt_diagonalize on the G-diagonal frame; raises on disagreement."""
    principal = principal_axes(g, tol)
    g_rotated = rotate_g_real(g, principal.o_r)
    alternative = alt_diagonalize(build_zeeman(g_rotated, sm, c), sm, c, tol)
    deviation = float(np.max(np.abs(np.abs(alternative.g_values) - np.abs(principal.g_values))))
    agrees = alternative.det_sign == principal.det_sign
    limit = tolerance("cross_validate", tol)
    if deviation > limit or not agrees:
        raise InconsistencyError(
            f"principal-axes and alternative diagonalization disagree "
            f"(|g| deviation {deviation:.3e}, det signs {principal.det_sign:+d}/{alternative.det_sign:+d})"
        )
    return CrossValidationReport(principal, alternative, deviation, agrees)
