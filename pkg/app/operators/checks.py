"""
Diagnósticos de positividade: padrão de sinais e M-matriz.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy import linalg

DENSE_INVERSE_LIMIT = 400


@dataclass
class MMatrixReport:
    """Veredito de M-matriz com os critérios individuais."""
    diagonal_positive: bool
    offdiagonal_nonpositive: bool
    row_dominant: bool
    strictly_dominant_rows: int
    inverse_nonnegative: bool | None = None

    @property
    def is_m_matrix(self) -> bool:
        verdict = (
            self.diagonal_positive
            and self.offdiagonal_nonpositive
            and self.row_dominant
            and self.strictly_dominant_rows > 0
        )
        if self.inverse_nonnegative is not None:
            verdict = verdict and self.inverse_nonnegative
        return verdict

    def to_dict(self) -> dict:
        return {
            "diagonal_positive": self.diagonal_positive,
            "offdiagonal_nonpositive": self.offdiagonal_nonpositive,
            "row_dominant": self.row_dominant,
            "strictly_dominant_rows": self.strictly_dominant_rows,
            "inverse_nonnegative": self.inverse_nonnegative,
            "is_m_matrix": self.is_m_matrix,
        }


def check_m_matrix(M: sp.spmatrix | np.ndarray, dense_check: bool = False, tol: float = 1e-14) -> MMatrixReport:
    """
    Verifica o padrão de M-matriz de uma matriz quadrada.

    Critérios: diagonal > 0, fora da diagonal <= 0 e dominância diagonal
    por linhas (fraca em todas, estrita em ao menos uma). Com dense_check,
    confirma também que a inversa é não negativa (matrizes pequenas).

    Args:
        M: Matriz quadrada
        dense_check: Calcula a inversa densa
        tol: Tolerância relativa para sinais e dominância

    Returns:
        MMatrixReport
    """
    A = sp.csr_matrix(M, dtype=float)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matriz não quadrada: {A.shape}")
    scale = max(abs(A).max(), 1.0)
    diag = A.diagonal()
    off = (A - sp.diags(diag)).tocsr()
    off.eliminate_zeros()

    off_abs_sum = np.asarray(abs(off).sum(axis=1)).ravel()
    margin = diag - off_abs_sum
    report = MMatrixReport(
        diagonal_positive=bool(np.all(diag > tol * scale)),
        offdiagonal_nonpositive=bool(np.all(off.data <= tol * scale)),
        row_dominant=bool(np.all(margin >= -tol * scale)),
        strictly_dominant_rows=int(np.sum(margin > tol * scale)),
    )
    if dense_check and A.shape[0] <= DENSE_INVERSE_LIMIT:
        try:
            inverse = linalg.inv(A.toarray())
            report.inverse_nonnegative = bool(np.all(inverse >= -tol * np.abs(inverse).max()))
        except linalg.LinAlgError:
            report.inverse_nonnegative = False
    return report
