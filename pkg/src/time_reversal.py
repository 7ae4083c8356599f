"""
Time reversal

Finite-dimensional representation of the antiunitary time-reversal operator
K(v) = T conj(v), the constructive Kramers / non-magnetic / non-Kramers basis
algorithms, and numeric checks of the theorems that follow from TR symmetry.

Vectors are coefficient vectors in an abstract model space; any orthonormal
set handed in by the caller plays the role of the eigenfunctions.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config import tolerance
from src.errors import RankError, StructuralError, ValidationError
from src.rng import make_rng, random_complex_vector, random_hermitian, random_orthonormal_columns, random_unitary
from src.spin_algebra import SpinQuantum, is_hermitian, unitarity_residual


@dataclass(frozen=True, eq=False)
class AntiunitaryRep:
    t_mat: np.ndarray
    parity: int

    def __post_init__(self):
        t = np.array(self.t_mat, dtype=complex)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValidationError("time-reversal matrix must be square")
        if self.parity not in (1, -1):
            raise ValidationError(f"parity must be +1 or -1, got {self.parity}")
        limit = tolerance("antiunitary")
        if unitarity_residual(t) > limit:
            raise ValidationError("time-reversal matrix is not unitary")
        square = t @ t.conj()
        if np.max(np.abs(square - self.parity * np.eye(t.shape[0]))) > limit:
            raise ValidationError(f"T conj(T) is not {self.parity:+d} I")
        t.setflags(write=False)
        object.__setattr__(self, "t_mat", t)

    @property
    def m(self) -> int:
        return self.t_mat.shape[0]

    def apply(self, v: np.ndarray) -> np.ndarray:
        """K on a vector, or column-wise on a matrix of vectors."""
        return self.t_mat @ np.conj(v)

    def conjugate_operator(self, h: np.ndarray) -> np.ndarray:
        """Matrix of K H K^-1."""
        return self.t_mat @ np.conj(h) @ self.t_mat.conj().T


@dataclass(frozen=True, eq=False)
class HermitianOp:
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=complex)
        if not is_hermitian(h, tolerance("hermitian")):
            raise ValidationError("operator is not Hermitian")
        object.__setattr__(self, "h", h)

    def expectation(self, a: np.ndarray, b: Optional[np.ndarray] = None) -> complex:
        """<a|H|b>, with b defaulting to a."""
        b = a if b is None else b
        return complex(np.vdot(a, self.h @ b))


@dataclass
class TheoremReport:
    parity: int
    trials: int
    norm_preservation: float
    nonmagnetic_expectation: Optional[float] = None
    non_kramers_off_diagonal: Optional[float] = None
    kramers_sign_flip: Optional[float] = None
    kramers_orthogonality: Optional[float] = None
    basis_orthonormality: float = 0.0
    fixed_point: Optional[float] = None

    def residuals(self) -> Dict[str, float]:
        names = (
            "norm_preservation", "nonmagnetic_expectation", "non_kramers_off_diagonal",
            "kramers_sign_flip", "kramers_orthogonality", "basis_orthonormality", "fixed_point",
        )
        return {n: getattr(self, n) for n in names if getattr(self, n) is not None}

    @property
    def max_residual(self) -> float:
        return max(self.residuals().values())

    def passed(self, tol: Optional[float] = None) -> bool:
        return bool(self.max_residual <= (tolerance("theorem") if tol is None else tol))

    def to_dict(self) -> dict:
        return {"parity": self.parity, "trials": self.trials, "residuals": self.residuals()}


def _as_matrix(op) -> np.ndarray:
    return op.h if isinstance(op, HermitianOp) else np.asarray(op, dtype=complex)


def _check_dim(k: AntiunitaryRep, v: np.ndarray):
    if v.shape[0] != k.m:
        raise ValidationError(f"dimension mismatch: vector of length {v.shape[0]} for an m={k.m} representation")


def kramers_rep(s: SpinQuantum) -> AntiunitaryRep:
    """K|S,M> = (-1)^(S-M) |S,-M> in the descending-M basis."""
    m = s.m
    t = np.zeros((m, m), dtype=complex)
    for k in range(m):
        # index k carries M = S - k, so S - M = k
        t[m - 1 - k, k] = (-1) ** k
    return AntiunitaryRep(t, s.parity)


def random_antiunitary(two_s: int, seed: int) -> AntiunitaryRep:
    """T = U J U^T with Haar-random U keeps T conj(T) = J conj(J)."""
    s = SpinQuantum(two_s)
    j = kramers_rep(s).t_mat
    u = random_unitary(make_rng(seed), s.m)
    return AntiunitaryRep(u @ j @ u.T, s.parity)


def apply_k(k: AntiunitaryRep, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    _check_dim(k, v)
    return k.apply(v)


def is_tr_antisymmetric(k: AntiunitaryRep, op) -> float:
    h = _as_matrix(op)
    if h.shape != (k.m, k.m):
        raise ValidationError(f"operator shape {h.shape} does not match m={k.m}")
    return float(np.max(np.abs(k.conjugate_operator(h) + h)))


def kramers_orthogonality_residual(k: AntiunitaryRep, v: np.ndarray) -> float:
    v = np.asarray(v, dtype=complex)
    _check_dim(k, v)
    return abs(np.vdot(v, k.apply(v)))


def random_tr_odd_hermitian(k: AntiunitaryRep, seed: int) -> HermitianOp:
    a = random_hermitian(make_rng(seed), k.m)
    h = (a - k.conjugate_operator(a)) / 2
    return HermitianOp((h + h.conj().T) / 2)


def _remainder(candidate: np.ndarray, basis: List[np.ndarray]) -> np.ndarray:
    r = candidate.copy()
    # two passes of classical Gram-Schmidt
    for _ in range(2):
        for b in basis:
            r = r - b * np.vdot(b, r)
    return r


def _candidates(vs: Sequence[np.ndarray], k: AntiunitaryRep) -> List[np.ndarray]:
    out = [np.asarray(v, dtype=complex).reshape(-1) for v in vs]
    for v in out:
        _check_dim(k, v)
    return out


def kramers_pair_basis(vs: Sequence[np.ndarray], k: AntiunitaryRep,
                       tol: Optional[Mapping[str, float]] = None) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Orthonormal Kramers pairs (v, Kv) built by projection.

    Each candidate is projected against the pairs found so far; the first
    nonzero remainder becomes the next v and K supplies its partner. The
    span equals span(vs) when that space is K-invariant (a degenerate level
    of a TR-symmetric Hamiltonian).
    """
    if k.parity != -1:
        raise StructuralError("Kramers pairs require K^2 = -1")
    cands = _candidates(vs, k)
    if len(cands) % 2:
        raise StructuralError(
            f"{len(cands)}-dimensional space with K^2 = -1 violates Kramers degeneracy"
        )
    threshold = tolerance("remainder", tol) * max((np.linalg.norm(v) for v in cands), default=1.0)
    basis: List[np.ndarray] = []
    pairs: List[Tuple[np.ndarray, np.ndarray]] = []
    queue = list(cands)
    while len(basis) < len(cands):
        while queue:
            r = _remainder(queue.pop(0), basis)
            norm = np.linalg.norm(r)
            if norm >= threshold:
                break
        else:
            raise RankError("projection exhausted the input vectors before completing the Kramers basis")
        v = r / norm
        v_bar = k.apply(v)
        v_bar = v_bar / np.linalg.norm(v_bar)
        basis.extend([v, v_bar])
        pairs.append((v, v_bar))
    return pairs


def _fixed_vector(psi: np.ndarray, k: AntiunitaryRep, branch_tol: float) -> np.ndarray:
    """w = c psi + conj(c) K psi with |w| = 1 and K w = w."""
    k_psi = k.apply(psi)
    z = np.vdot(k_psi, psi)
    if abs(z) < branch_tol:
        c = 1 / np.sqrt(2)
    else:
        # makes c^2 z real and positive
        alpha = -0.5 * np.angle(z)
        c = np.exp(1j * alpha) / np.sqrt(2 * (1 + abs(z)))
    w = c * psi + np.conj(c) * k_psi
    return w / np.linalg.norm(w)


def nonmagnetic_basis(vs: Sequence[np.ndarray], k: AntiunitaryRep,
                      tol: Optional[Mapping[str, float]] = None) -> List[np.ndarray]:
    """
    Orthonormal K-fixed vectors, one per input vector.

    Orthonormality and K w = w always hold; the span equals span(vs) when
    that space is K-invariant.
    """
    if k.parity != 1:
        raise StructuralError("non-magnetic states need K^2 = +1; with K^2 = -1 <v|Kv> = 0 for every v")
    cands = _candidates(vs, k)
    gram = np.array([[np.vdot(a, b) for b in cands] for a in cands])
    if gram.size and np.max(np.abs(gram - np.eye(len(cands)))) > tolerance("normalized", tol):
        raise ValidationError("input vectors are not orthonormal")
    threshold = tolerance("remainder", tol)
    branch_tol = tolerance("overlap_branch", tol)
    basis: List[np.ndarray] = []
    queue = list(cands)
    while len(basis) < len(cands):
        while queue:
            r = _remainder(queue.pop(0), basis)
            norm = np.linalg.norm(r)
            if norm >= threshold:
                break
        else:
            raise RankError("projection exhausted the input vectors before completing the non-magnetic basis")
        w = _fixed_vector(r / norm, k, branch_tol)
        # w is orthogonal to the previous w's up to rounding
        w = _remainder(w, basis)
        basis.append(w / np.linalg.norm(w))
    return basis


def non_kramers_pair(v1: np.ndarray, v2: np.ndarray, k: AntiunitaryRep,
                     tol: Optional[Mapping[str, float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    v1 = np.asarray(v1, dtype=complex)
    v2 = np.asarray(v2, dtype=complex)
    _check_dim(k, v1)
    _check_dim(k, v2)
    fixed_tol = tolerance("fixed_point", tol)
    for name, v in (("v1", v1), ("v2", v2)):
        if np.max(np.abs(k.apply(v) - v)) > fixed_tol:
            raise ValidationError(f"{name} is not non-magnetic (K v != v)")
    gram = np.array([[np.vdot(v1, v1), np.vdot(v1, v2)], [np.vdot(v2, v1), np.vdot(v2, v2)]])
    if np.max(np.abs(gram - np.eye(2))) > tolerance("normalized", tol):
        raise ValidationError("v1, v2 are not orthonormal")
    phi = (v1 + 1j * v2) / np.sqrt(2)
    phi_bar = (v1 - 1j * v2) / np.sqrt(2)
    return phi, phi_bar


def tr_adapted_basis(vs: Sequence[np.ndarray], k: AntiunitaryRep,
                     tol: Optional[Mapping[str, float]] = None) -> np.ndarray:
    """
    Columns b_S, ..., b_-S with K b_M = (-1)^(S-M) b_-M.

    In this basis K is represented by kramers_rep, so an operator that is
    TR-odd under k becomes TR-odd under kramers_rep after B^dag O B.
    """
    m = len(vs)
    if m < 2:
        raise StructuralError("an effective spin needs at least two states")
    parity = -1 if (m - 1) % 2 else 1
    if parity != k.parity:
        raise StructuralError(
            f"{m} states imply K^2 = {parity:+d}, but the representation has K^2 = {k.parity:+d}"
        )
    cols: List[Optional[np.ndarray]] = [None] * m
    if parity == -1:
        pairs = kramers_pair_basis(vs, k, tol)
        for i, (v, _) in enumerate(pairs):
            cols[i] = v
            cols[m - 1 - i] = (-1) ** i * k.apply(v)
    else:
        ws = nonmagnetic_basis(vs, k, tol)
        centre = (m - 1) // 2
        # K(i w) = -i w, so the M = 0 column picks up i when S is odd
        cols[centre] = ws[-1] if centre % 2 == 0 else 1j * ws[-1]
        for i in range(centre):
            phi, _ = non_kramers_pair(ws[2 * i], ws[2 * i + 1], k, tol)
            cols[i] = phi
            cols[m - 1 - i] = (-1) ** i * k.apply(phi)
    return np.column_stack(cols)


def verify_theorems(k: AntiunitaryRep, op, trials: int, seed: int,
                    tol: Optional[Mapping[str, float]] = None) -> TheoremReport:
    """
    Max residuals over seeded random vectors of the TR theorems that apply to
    the representation's parity.

    K^2 = +1: zero expectation on non-magnetic states, zero coupling inside
    non-Kramers pairs. K^2 = -1: <v|Kv> = 0 and opposite expectation values
    on Kramers partners. Always: |Kv| = |v| and orthonormality of every
    constructed basis.
    """
    h = HermitianOp(_as_matrix(op))
    if is_tr_antisymmetric(k, h) > tolerance("tr_odd", tol):
        raise ValidationError("operator is not time-reversal antisymmetric")
    rng = make_rng(seed)
    m = k.m
    report = TheoremReport(parity=k.parity, trials=trials, norm_preservation=0.0)
    if k.parity == 1:
        report.nonmagnetic_expectation = 0.0
        report.non_kramers_off_diagonal = 0.0
        report.fixed_point = 0.0
    else:
        report.kramers_sign_flip = 0.0
        report.kramers_orthogonality = 0.0

    for _ in range(trials):
        v = random_complex_vector(rng, m, normalize=False)
        kv = k.apply(v)
        report.norm_preservation = max(report.norm_preservation,
                                       abs(np.linalg.norm(kv) - np.linalg.norm(v)))
        q = random_orthonormal_columns(rng, m, m)
        vs = [q[:, i] for i in range(m)]
        if k.parity == 1:
            ws = nonmagnetic_basis(vs, k, tol)
            basis = ws
            for w in ws:
                report.nonmagnetic_expectation = max(report.nonmagnetic_expectation, abs(h.expectation(w)))
                report.fixed_point = max(report.fixed_point, float(np.max(np.abs(k.apply(w) - w))))
            for i in range(0, m - 1, 2):
                phi, phi_bar = non_kramers_pair(ws[i], ws[i + 1], k, tol)
                report.non_kramers_off_diagonal = max(report.non_kramers_off_diagonal,
                                                      abs(h.expectation(phi, phi_bar)))
        else:
            u = v / np.linalg.norm(v)
            u_bar = k.apply(u)
            report.kramers_orthogonality = max(report.kramers_orthogonality, abs(np.vdot(u, u_bar)))
            report.kramers_sign_flip = max(report.kramers_sign_flip,
                                           abs(h.expectation(u_bar) + h.expectation(u)))
            basis = [x for pair in kramers_pair_basis(vs, k, tol) for x in pair]
        gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
        report.basis_orthonormality = max(report.basis_orthonormality,
                                          float(np.max(np.abs(gram - np.eye(len(basis))))))
    return report
