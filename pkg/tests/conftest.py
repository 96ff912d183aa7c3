"""Shared helpers for the test suite: seeded random states and channels."""

from __future__ import annotations

import numpy as np

from petzopt import DensityOperator


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> DensityOperator:
    """Random density operator of the given rank (full rank by default)."""
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    return DensityOperator(g @ g.conj().T)


def random_density_inside(rng: np.random.Generator, sigma: DensityOperator) -> DensityOperator:
    """Random density operator supported inside supp(sigma)."""
    d = sigma.dim
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    w, v = np.linalg.eigh(sigma.matrix)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    return DensityOperator(sq @ (g @ g.conj().T) @ sq)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def random_psd(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    return g @ g.conj().T
