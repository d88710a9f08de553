"""Layer norms feeding the capacity term.

spectral_norm runs power iteration on the Gram operator with a Rayleigh
estimate, which converges to the top singular value from below, so the
reported value never exceeds the truth. norm_2_1_of_transpose sums the
Euclidean row norms of the matrix (the (2,1) norm of its transpose). The
scale-sensitive aggregate

    T = prod_i (p_i * s_i) * (sum_i (b_i / s_i)**(2/3)) ** (3/2)

with per-layer spectral norms s_i, row-norm sums b_i, and activation
Lipschitz constants p_i, is positively homogeneous of degree L in the
weights and defined as 0 when any layer has spectral norm 0.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergenceWarning, ZeroSpectralNorm
from .network import NetworkParams
from .seeding import substream

_RESTART_TAGS = (101, 211)


def spectral_norm(A: np.ndarray, tol: float = 1e-10, max_iter: int = 10000) -> float:
    """Largest singular value by seeded power iteration.

    Stops when successive Rayleigh estimates differ by less than tol
    relative; restarts once from a fresh seeded vector if the iterate lands
    in the null space, and returns 0.0 for the zero matrix. If the cap is
    hit, warns NoConvergenceWarning and returns the best estimate.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise DimensionMismatch("spectral_norm needs a matrix")
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    if A.size == 0 or not np.any(A):
        return 0.0
    estimate = 0.0
    for tag in _RESTART_TAGS:
        rng = substream(tag, A.shape[0], A.shape[1])
        v = rng.standard_normal(A.shape[1])
        v /= np.linalg.norm(v)
        prev = -np.inf
        stalled = False
        for _ in range(max_iter):
            w = A @ v
            s = float(np.linalg.norm(w))
            if s == 0.0:
                stalled = True
                break
            if abs(s - prev) <= tol * s:
                return s
            prev = s
            z = A.T @ w
            v = z / np.linalg.norm(z)
        if not stalled:
            warnings.warn("power iteration hit its iteration cap",
                          NoConvergenceWarning)
            return s
        estimate = 0.0
    return estimate


def norm_2_1_of_transpose(A: np.ndarray) -> float:
    """Sum of Euclidean row norms; upper-bounds the spectral norm."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise DimensionMismatch("needs a matrix")
    return float(np.sqrt((A * A).sum(axis=1)).sum())


@dataclass(frozen=True)
class LayerNorms:
    """Per-layer (spectral, row-norm-sum, Lipschitz) triples."""

    spectral: tuple
    two_one: tuple
    lipschitz: tuple

    def __post_init__(self):
        if not len(self.spectral) == len(self.two_one) == len(self.lipschitz):
            raise DimensionMismatch("per-layer tuples must have equal length")
        object.__setattr__(self, "spectral", tuple(float(v) for v in self.spectral))
        object.__setattr__(self, "two_one", tuple(float(v) for v in self.two_one))
        object.__setattr__(self, "lipschitz", tuple(float(v) for v in self.lipschitz))

    @classmethod
    def from_params(cls, params: NetworkParams, tol: float = 1e-10) -> "LayerNorms":
        return cls(
            spectral=tuple(spectral_norm(W, tol=tol) for W in params.layers),
            two_one=tuple(norm_2_1_of_transpose(W) for W in params.layers),
            lipschitz=tuple(a.lipschitz for a in params.activations),
        )


def complexity_from_norms(norms: LayerNorms) -> float:
    """The aggregate T from precomputed layer norms; 0 if any s_i is 0."""
    s = np.asarray(norms.spectral)
    if np.any(s == 0.0):
        return 0.0
    b = np.asarray(norms.two_one)
    p = np.asarray(norms.lipschitz)
    ratio = float(((b / s) ** (2.0 / 3.0)).sum() ** 1.5)
    return float(np.prod(p * s) * ratio)


def spectral_complexity(params: NetworkParams, norms: LayerNorms | None = None,
                        tol: float = 1e-10) -> float:
    """Scale-sensitive capacity aggregate of a network's weights."""
    if norms is None:
        norms = LayerNorms.from_params(params, tol=tol)
    return complexity_from_norms(norms)


def require_positive_spectral(norms: LayerNorms) -> None:
    """Raise ZeroSpectralNorm when the capacity term is undefined."""
    for i, s in enumerate(norms.spectral):
        if s <= 0.0:
            raise ZeroSpectralNorm(f"layer {i} has spectral norm {s}")
