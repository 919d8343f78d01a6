"""Time-centering operators for the stiff linear source ``-Sigma U``.

With ``chi = dt * Sigma`` the half-step predictor is multiplied by ``g(chi)``
and a uniform state is advanced by ``G(chi) = 1 - chi g(chi)`` per step.
"""
from __future__ import annotations

import csv
import enum
from pathlib import Path

import numpy as np


class InvalidSourceError(ValueError):
    pass


class SourceOperatorKind(str, enum.Enum):
    EXACT = "exact"
    BACKWARD_EULER = "backward_euler"
    L_STABLE_AVERAGE = "l_stable_average"

    @classmethod
    def parse(cls, value) -> "SourceOperatorKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise InvalidSourceError(f"unknown source operator {value!r} (expected one of {names})") from None


DEFAULT_KIND = SourceOperatorKind.L_STABLE_AVERAGE

# integer codes shared with the compiled kernels
KIND_CODES = {None: 0, SourceOperatorKind.EXACT: 1, SourceOperatorKind.BACKWARD_EULER: 2,
              SourceOperatorKind.L_STABLE_AVERAGE: 3}


def _g_scalar(chi, kind: SourceOperatorKind):
    chi = np.asarray(chi, dtype=float)
    if np.any(chi < 0):
        raise InvalidSourceError("chi must be non-negative")
    if kind is SourceOperatorKind.EXACT:
        return np.exp(-0.5 * chi)
    if kind is SourceOperatorKind.BACKWARD_EULER:
        return 1.0 / (1.0 + 0.5 * chi)
    return 0.5 * (np.exp(-0.5 * chi) + 1.0 / (1.0 + 0.5 * chi))


def g_factor(chi, kind=DEFAULT_KIND):
    """``g(chi)`` for a scalar/array of eigenvalues, or a square matrix.

    A 2-d square input is treated as a matrix and must be symmetric PSD, or
    block-diagonal with symmetric PSD 3x3 blocks; ``g`` is applied to its
    eigenvalues.
    """
    kind = SourceOperatorKind.parse(kind)
    chi = np.asarray(chi, dtype=float)
    if chi.ndim == 2 and chi.shape[0] == chi.shape[1] and chi.shape[0] > 1:
        return g_matrix(chi, kind)
    return _g_scalar(chi, kind)


def g_matrix(chi: np.ndarray, kind=DEFAULT_KIND) -> np.ndarray:
    kind = SourceOperatorKind.parse(kind)
    chi = np.asarray(chi, dtype=float)
    off = chi - np.diag(np.diag(chi))
    if not np.any(off):
        return np.diag(_g_scalar(np.diag(chi), kind))
    scale = max(np.max(np.abs(chi)), 1e-300)
    if not np.allclose(chi, chi.T, rtol=0, atol=1e-13 * scale):
        raise InvalidSourceError("source matrix must be symmetric")
    lam, vec = np.linalg.eigh(chi)
    if np.any(lam < -1e-12 * scale):
        raise InvalidSourceError("source matrix has a negative eigenvalue")
    lam = np.clip(lam, 0.0, None)
    return (vec * _g_scalar(lam, kind)) @ vec.T


def amplification(chi, kind=DEFAULT_KIND):
    """``G(chi) = 1 - chi g(chi)`` for scalar or array ``chi``."""
    kind = SourceOperatorKind.parse(kind)
    chi = np.asarray(chi, dtype=float)
    if kind is SourceOperatorKind.L_STABLE_AVERAGE:
        # 1 - chi/(2+chi) rewritten to avoid cancellation for large chi
        return 2.0 / (2.0 + chi) - 0.5 * chi * np.exp(-0.5 * chi)
    return 1.0 - chi * _g_scalar(chi, kind)


def apply_time_centering(u_evolved, dt: float, sigma_matrix, kind=DEFAULT_KIND) -> np.ndarray:
    """Return ``g(dt * Sigma) @ u_evolved``.

    ``sigma_matrix`` is a single ``(6, 6)`` matrix; ``u_evolved`` may carry
    trailing batch axes.
    """
    u = np.asarray(u_evolved, dtype=float)
    sig = np.asarray(sigma_matrix, dtype=float)
    if not np.any(sig):
        return u.copy()
    g = g_matrix(dt * sig, kind)
    return np.einsum("ij,j...->i...", g, u)


def amplification_table(chi_max: float = 40.0, samples: int = 401) -> np.ndarray:
    """Columns: chi, G_exact, G_backward_euler, G_l_stable_average."""
    if samples < 2 or chi_max <= 0:
        raise InvalidSourceError("need chi_max > 0 and at least two samples")
    chi = np.linspace(0.0, chi_max, samples)
    cols = [chi] + [amplification(chi, k) for k in SourceOperatorKind]
    return np.column_stack(cols)


AMPLIFICATION_SCHEMA = "amplification/1"


def write_amplification_csv(path, table: np.ndarray) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# schema: {AMPLIFICATION_SCHEMA}\n")
        w = csv.writer(fh)
        w.writerow(["chi", "G_exact", "G_backward_euler", "G_l_stable_average"])
        for row in table:
            w.writerow([f"{v:.12e}" for v in row])
    return path
