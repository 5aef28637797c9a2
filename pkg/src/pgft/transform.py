"""Spectral transforms and the temporal predictor.

The encoder and decoder independently eigendecompose identical
Laplacians and must land on the exact same basis, so the decomposition
is canonicalized: eigenvalues ascending, every eigenvector's first
nonzero component positive, and degenerate groups ordered
lexicographically by entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graph import GeneralizedLaplacian

_SIGN_TOL = 1e-12
_DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class TransformBasis:
    basis: np.ndarray        # (n, n) orthonormal, columns = eigenvectors
    eigenvalues: np.ndarray  # (n,) ascending

    @property
    def n(self) -> int:
        return self.basis.shape[0]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    nonzero = np.abs(vectors) > _SIGN_TOL
    first = np.argmax(nonzero, axis=0)
    cols = np.arange(vectors.shape[1])
    signs = np.sign(vectors[first, cols])
    signs[signs == 0] = 1.0
    return vectors * signs[None, :]


def _order_degenerate_groups(values: np.ndarray, vectors: np.ndarray):
    """Within groups of (numerically) equal eigenvalues, order the
    columns lexicographically by their entries."""
    n = values.shape[0]
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    tol = _DEGENERACY_TOL * scale
    start = 0
    order = np.arange(n)
    for i in range(1, n + 1):
        if i == n or values[i] - values[i - 1] > tol:
            if i - start > 1:
                cols = order[start:i]
                # lexsort: last key is primary, so reverse the rows.
                sub = np.lexsort(vectors[::-1, cols])
                order[start:i] = cols[sub]
            start = i
    return values[order], vectors[:, order]


def eigendecompose(lap: GeneralizedLaplacian) -> TransformBasis:
    """Full symmetric eigendecomposition with canonical ordering."""
    m = np.asarray(lap.matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if m.size and np.max(np.abs(m - m.T)) > 1e-12:
        raise ValueError("matrix is not symmetric")
    values, vectors = np.linalg.eigh(m)
    vectors = _fix_signs(vectors)
    values, vectors = _order_degenerate_groups(values, vectors)
    return TransformBasis(basis=vectors, eigenvalues=values)


def gft_forward(signal: np.ndarray, basis: TransformBasis) -> np.ndarray:
    """Project a graph signal onto the basis: coefficients = Phi^T f."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.shape[0] != basis.n:
        raise ValueError("signal length does not match basis size")
    return basis.basis.T @ signal


def gft_inverse(coeffs: np.ndarray, basis: TransformBasis) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape[0] != basis.n:
        raise ValueError("coefficient length does not match basis size")
    return basis.basis @ coeffs


# The residual transform uses the same projection, just with the basis of
# L + I instead of L.
ggft_forward = gft_forward
ggft_inverse = gft_inverse


def inter_predict(laplacian: GeneralizedLaplacian, ref_attrs: np.ndarray) -> np.ndarray:
    """Temporal prediction: solve (L + I) p = x_ref per channel.

    L is the target cluster's combinatorial Laplacian; the result is a
    low-pass filtered version of the corresponded reference attributes.
    """
    if laplacian.kind != "combinatorial":
        raise ValueError("inter_predict expects the combinatorial Laplacian")
    ref = np.asarray(ref_attrs, dtype=np.float64)
    if ref.shape[0] != laplacian.n:
        raise ValueError("reference attribute length does not match cluster size")
    a = laplacian.matrix + np.eye(laplacian.n)
    c, low = scipy.linalg.cho_factor(a, lower=True)
    return scipy.linalg.cho_solve((c, low), ref)
