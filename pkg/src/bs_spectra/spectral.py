"""Dense Hermitian eigenproblem with verifiable residual certificates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .torus_quant import TorusOperator

HERMITICITY_GATE = 1e-10   # input rejected if max|H - H*| exceeds this times max|H|
RESIDUAL_GATE = 1e-10      # certified: ||Hv - lambda v|| <= gate * max|H| * dim


@dataclass(frozen=True)
class SpectrumResult:
    """Ascending eigenvalues with per-pair residuals ||Hv - lambda v||_2."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray
    hermiticity_defect: float

    @property
    def dim(self):
        return len(self.eigenvalues)


def _as_matrix(h):
    if isinstance(h, TorusOperator):
        return h.matrix
    return np.asarray(h)


def eigh(h, want_vectors: bool = True) -> SpectrumResult:
    """Full spectrum of a Hermitian matrix, residual-certified.

    Raises on non-Hermitian input (defect above 1e-10 * max|H|) and on
    residuals beyond the certificate gate; delegation target is LAPACK's
    Hermitian solver, the certificate is computed independently of it.
    """
    mat = _as_matrix(h)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise ValueError("expected a nonempty square matrix")
    scale = float(np.max(np.abs(mat)))
    defect = float(np.max(np.abs(mat - mat.conj().T)))
    if defect > HERMITICITY_GATE * max(scale, 1e-300):
        raise ValueError(f"matrix is not Hermitian: defect {defect:.3e} vs scale {scale:.3e}")
    vals, vecs = np.linalg.eigh(mat)
    residuals = np.linalg.norm(mat @ vecs - vecs * vals[np.newaxis, :], axis=0)
    bound = RESIDUAL_GATE * max(scale, 1e-300) * mat.shape[0]
    worst = float(np.max(residuals))
    if worst > bound:
        raise ArithmeticError(f"residual certificate failed: {worst:.3e} > {bound:.3e}")
    return SpectrumResult(
        eigenvalues=vals,
        eigenvectors=vecs if want_vectors else None,
        residuals=residuals,
        hermiticity_defect=defect,
    )


def operator_norm(h) -> float:
    """Spectral norm max|eigenvalue| of a Hermitian matrix."""
    return float(np.max(np.abs(eigh(h, want_vectors=False).eigenvalues)))


def dump_spectrum_csv(result: SpectrumResult, k: int, path):
    """CSV `k,j,lambda,residual`, j ascending, with header and trailing newline."""
    lines = ["k,j,lambda,residual"]
    for j, (lam, res) in enumerate(zip(result.eigenvalues, result.residuals)):
        lines.append(f"{k},{j},{lam:.17g},{res:.17g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
