"""Memory, coupling and noise matrices for the memory-augmented dynamics.

Four memory designs are provided, all scaled by a tuning constant mu
(``A = mu * A_i``).  Design 1 is the identity on the position dimension
(m = n); designs 2-4 double the auxiliary dimension (m = 2n):

    A2 = [[0, -I], [I, I]]      A3 = [[I, -I], [I, I]]
    A4 = ones on and above the diagonal, -1 strictly below.

The symmetric parts satisfy A1+A1' = 2 mu I, A2+A2' = diag(0, 2 mu I),
A3+A3' = A4+A4' = 2 mu I, so the noise factor with Gram matrix A+A' always
exists; it is taken as the symmetric PSD square root, which handles the
rank-deficient design 2 uniformly (any factor with the same Gram matrix
drives the same law).

Couplings are ``lambda = lambda_bar * I_n`` (design 1) or
``lambda_bar * [I_n; 0]`` (designs 2-4), each with an explicit left inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DESIGNS = (1, 2, 3, 4)

# eigenvalues of A+A' this far below zero are treated as solver noise
_PSD_TOL = 1e-12


@dataclass(frozen=True)
class MemoryMatrix:
    """Memory matrix with its coercivity (min eigenvalue of the symmetric part)."""

    matrix: np.ndarray
    mu: float
    coercivity: float
    op_norm: float
    design: int | None = None

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def gram(self) -> np.ndarray:
        """A + A', the Gram matrix the noise factor must reproduce."""
        return self.matrix + self.matrix.T


@dataclass(frozen=True)
class Coupling:
    """Rank-n coupling matrix (m x n) with an explicit left inverse (n x m)."""

    matrix: np.ndarray
    lambda_bar: float
    left_inverse: np.ndarray
    design: int | None = None

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class NoiseMatrix:
    """Noise factor sigma with sigma sigma' = A + A'."""

    sigma: np.ndarray


def _base_design(design: int, n: int) -> np.ndarray:
    eye = np.eye(n)
    if design == 1:
        return eye
    if design == 2:
        return np.block([[np.zeros((n, n)), -eye], [eye, eye]])
    if design == 3:
        return np.block([[eye, -eye], [eye, eye]])
    if design == 4:
        m = 2 * n
        a = np.triu(np.ones((m, m)))
        a[np.tril_indices(m, -1)] = -1.0
        return a
    raise ValueError(f"unknown memory design {design}; choose from {DESIGNS}")


def make_A(design: int, n: int, mu: float) -> MemoryMatrix:
    """Build ``mu * A_design`` for the given position dimension."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if mu <= 0:
        raise ValueError("mu must be positive")
    a = mu * _base_design(design, n)
    sym_eigs = np.linalg.eigvalsh(0.5 * (a + a.T))
    return MemoryMatrix(
        matrix=a,
        mu=float(mu),
        coercivity=float(max(sym_eigs[0], 0.0)),
        op_norm=float(np.linalg.norm(a, ord=2)),
        design=design,
    )


def make_lambda(design: int, n: int, lambda_bar: float) -> Coupling:
    """Build ``lambda_bar * lambda_design`` together with its left inverse."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if lambda_bar <= 0:
        raise ValueError("lambda_bar must be positive")
    if design not in DESIGNS:
        raise ValueError(f"unknown coupling design {design}; choose from {DESIGNS}")
    eye = np.eye(n)
    if design == 1:
        lam = lambda_bar * eye
        inv = eye / lambda_bar
    else:
        lam = lambda_bar * np.vstack([eye, np.zeros((n, n))])
        inv = np.hstack([eye, np.zeros((n, n))]) / lambda_bar
    return Coupling(matrix=lam, lambda_bar=float(lambda_bar), left_inverse=inv, design=design)


def make_sigma(memory: MemoryMatrix) -> NoiseMatrix:
    """Symmetric PSD square root of A + A'.

    Raises if A + A' has an eigenvalue below -1e-12 (not an admissible
    memory matrix); eigenvalues in (-1e-12, 0) are clamped to zero.
    """
    gram = memory.gram
    w, v = np.linalg.eigh(gram)
    if w[0] < -_PSD_TOL:
        raise ValueError(
            f"A + A' has negative eigenvalue {w[0]:.3e}; memory matrix is invalid"
        )
    w = np.clip(w, 0.0, None)
    sigma = (v * np.sqrt(w)) @ v.T
    return NoiseMatrix(sigma=sigma)
