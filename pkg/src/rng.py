"""
Seeded random sources for synthetic fixtures

All generators are numpy PCG64 streams built from an explicit 64-bit seed,
so the same seed yields bit-identical fixtures on every platform.
"""

from typing import List, Optional

import numpy as np
from scipy.stats import unitary_group


def make_rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(seed: int, count: int) -> List[int]:
    """Independent per-trial seeds derived from one root seed."""
    state = np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)
    return [int(x) for x in state]


def random_unit_vector(rng: np.random.Generator, dim: int = 3) -> np.ndarray:
    while True:
        v = rng.standard_normal(dim)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            return v / norm


def random_complex_vector(rng: np.random.Generator, dim: int, normalize: bool = True) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    if normalize:
        v = v / np.linalg.norm(v)
    return v


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (a + a.conj().T) / 2


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    # Haar measure
    return unitary_group.rvs(dim, random_state=rng)


def random_orthonormal_columns(rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    a = rng.standard_normal((dim, count)) + 1j * rng.standard_normal((dim, count))
    q, _ = np.linalg.qr(a)
    return q
