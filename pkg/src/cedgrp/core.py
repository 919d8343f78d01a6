"""Algebra of the Maxwell system written as a linear hyperbolic system.

State vectors are plain arrays with the six components on axis 0,
``U = (Dx, Dy, Dz, Bx, By, Bz)``, followed by any number of batch axes.
A gradient set is an array of shape ``(3, 6, ...)`` holding the x, y and z
derivatives of a state.  Material tensors and characteristic matrices carry
their batch axes last as well, so a single edge and a whole mesh family go
through the same code.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DX, DY, DZ, BX, BY, BZ = range(6)
COMPONENTS = ("Dx", "Dy", "Dz", "Bx", "By", "Bz")
AXES = ("x", "y", "z")


class InvalidMaterialError(ValueError):
    pass


class EigensystemError(RuntimeError):
    pass


def axis_index(axis) -> int:
    if isinstance(axis, str):
        return AXES.index(axis)
    if axis in (0, 1, 2):
        return int(axis)
    raise ValueError(f"unknown axis {axis!r}")


@dataclass(frozen=True)
class PhysicalConstants:
    eps0: float
    mu0: float

    @property
    def c(self) -> float:
        return 1.0 / np.sqrt(self.eps0 * self.mu0)

    @property
    def impedance(self) -> float:
        return np.sqrt(self.mu0 / self.eps0)


_C_SI = 299792458.0
_MU0_SI = 1.25663706212e-6
SI = PhysicalConstants(eps0=1.0 / (_MU0_SI * _C_SI**2), mu0=_MU0_SI)
NORMALIZED = PhysicalConstants(eps0=1.0, mu0=1.0)


def _check_spd(t: np.ndarray, name: str) -> None:
    if t.shape[:2] != (3, 3):
        raise InvalidMaterialError(f"{name} must have shape (3, 3, ...), got {t.shape}")
    if not np.all(np.isfinite(t)):
        raise InvalidMaterialError(f"{name} has non-finite entries")
    scale = np.max(np.abs(t)) if t.size else 1.0
    if not np.allclose(t, np.swapaxes(t, 0, 1), rtol=0.0, atol=1e-14 * scale):
        raise InvalidMaterialError(f"{name} is not symmetric")
    mats = np.moveaxis(t.reshape(3, 3, -1), -1, 0)
    if mats.shape[0] == 0:
        return
    # diagonal tensors are the common case; skip the batched eigensolve there
    off = mats - mats * np.eye(3)
    if not np.any(off):
        ok = np.all(np.diagonal(mats, axis1=1, axis2=2) > 0)
    else:
        ok = np.all(np.linalg.eigvalsh(mats) > 0)
    if not ok:
        raise InvalidMaterialError(f"{name} is not positive definite")


@dataclass(frozen=True)
class MaterialTensors:
    """Inverse permittivity/permeability tensors and scalar losses.

    ``eps_inv`` and ``mu_inv`` have shape ``(3, 3, ...)``; ``sigma`` and
    ``sigma_star`` broadcast against the trailing batch shape.
    """

    eps_inv: np.ndarray
    mu_inv: np.ndarray
    sigma: np.ndarray | float = 0.0
    sigma_star: np.ndarray | float = 0.0
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "eps_inv", np.asarray(self.eps_inv, dtype=float))
        object.__setattr__(self, "mu_inv", np.asarray(self.mu_inv, dtype=float))
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "sigma_star", np.asarray(self.sigma_star, dtype=float))
        if not self.validate:
            return
        _check_spd(self.eps_inv, "eps_inv")
        _check_spd(self.mu_inv, "mu_inv")
        if np.any(self.sigma < 0) or np.any(self.sigma_star < 0):
            raise InvalidMaterialError("conductivities must be non-negative")
        if not (np.all(np.isfinite(self.sigma)) and np.all(np.isfinite(self.sigma_star))):
            raise InvalidMaterialError("conductivities must be finite")

    @classmethod
    def diagonal(cls, eps=(1.0, 1.0, 1.0), mu=(1.0, 1.0, 1.0), sigma=0.0,
                 sigma_star=0.0, constants: PhysicalConstants = SI) -> "MaterialTensors":
        """Build from relative diagonal permittivity and permeability."""
        eps = np.asarray(eps, dtype=float) * constants.eps0
        mu = np.asarray(mu, dtype=float) * constants.mu0
        return cls(np.diag(1.0 / eps), np.diag(1.0 / mu), sigma, sigma_star)

    @classmethod
    def isotropic(cls, eps_r=1.0, mu_r=1.0, sigma=0.0, sigma_star=0.0,
                  constants: PhysicalConstants = SI) -> "MaterialTensors":
        return cls.diagonal((eps_r,) * 3, (mu_r,) * 3, sigma, sigma_star, constants)

    @classmethod
    def vacuum(cls, constants: PhysicalConstants = SI) -> "MaterialTensors":
        return cls.isotropic(constants=constants)

    @property
    def batch_shape(self) -> tuple:
        return self.eps_inv.shape[2:]

    @property
    def is_diagonal(self) -> bool:
        off = ~np.eye(3, dtype=bool)
        return not (np.any(self.eps_inv[off]) or np.any(self.mu_inv[off]))

    def permuted(self, perm) -> "MaterialTensors":
        """Relabel coordinate axes: new axis ``l`` is old axis ``perm[l]``."""
        p = list(perm)
        return MaterialTensors(self.eps_inv[p][:, p], self.mu_inv[p][:, p],
                               self.sigma, self.sigma_star, validate=False)


@dataclass(frozen=True)
class CharMatrices:
    """Flux Jacobians ``A, B, C`` and source matrix ``Sigma``, each ``(6, 6, ...)``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Sigma: np.ndarray

    def along(self, axis) -> np.ndarray:
        return (self.A, self.B, self.C)[axis_index(axis)]


def _curl_pattern(axis: int) -> np.ndarray:
    # maps (E, H) to the axis flux of (D, B); symmetric by construction
    k = np.zeros((6, 6))
    b, c = (axis + 1) % 3, (axis + 2) % 3
    # flux of D_b is -H_c, of D_c is +H_b; flux of B_b is +E_c, of B_c is -E_b
    k[b, 3 + c] = 1.0
    k[c, 3 + b] = -1.0
    k[3 + b, c] = -1.0
    k[3 + c, b] = 1.0
    return k


_CURL = tuple(_curl_pattern(a) for a in range(3))


def block_diag_material(eps_inv: np.ndarray, mu_inv: np.ndarray) -> np.ndarray:
    shape = (6, 6) + eps_inv.shape[2:]
    m = np.zeros(shape)
    m[:3, :3] = eps_inv
    m[3:, 3:] = mu_inv
    return m


def matvec(m: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply ``(6, 6, ...)`` matrices to ``(6, ...)`` vectors, broadcasting batches."""
    return np.einsum("ij...,j...->i...", m, u)


def build_characteristic_matrices(mat: MaterialTensors) -> CharMatrices:
    m = block_diag_material(mat.eps_inv, mat.mu_inv)
    a, b, c = (np.einsum("ij,jk...->ik...", k, m) for k in _CURL)
    sig = np.zeros_like(m)
    sig[:3, :3] = mat.sigma * mat.eps_inv
    sig[3:, 3:] = mat.sigma_star * mat.mu_inv
    return CharMatrices(a, b, c, sig)


def flux(u: np.ndarray, mat: MaterialTensors, axis) -> np.ndarray:
    """Matrix-free ``A u`` (or ``B u``, ``C u``) for per-element materials."""
    e = np.einsum("ij...,j...->i...", mat.eps_inv, u[:3])
    h = np.einsum("ij...,j...->i...", mat.mu_inv, u[3:])
    out = np.zeros(np.broadcast_shapes(u.shape, (6,) + e.shape[1:]))
    a = axis_index(axis)
    b, c = (a + 1) % 3, (a + 2) % 3
    out[b] = h[c]
    out[c] = -h[b]
    out[3 + b] = -e[c]
    out[3 + c] = e[b]
    return out


def fields_from_state(u: np.ndarray, mat: MaterialTensors):
    """Return ``(E, H, J, M)`` with ``E = eps_inv D``, ``H = mu_inv B``,
    ``J = sigma E`` and ``M = sigma_star H``."""
    u = np.asarray(u, dtype=float)
    e = np.einsum("ij...,j...->i...", mat.eps_inv, u[:3])
    h = np.einsum("ij...,j...->i...", mat.mu_inv, u[3:])
    return e, h, mat.sigma * e, mat.sigma_star * h


@dataclass(frozen=True)
class AxisEigensystem:
    """Eigenvalues (ascending) with biorthonormal left/right eigenvectors.

    ``right[m]`` and ``left[m]`` are the m-th vectors, shape ``(6, 6, ...)``;
    ``m_split`` counts the strictly negative eigenvalues.
    """

    lam: np.ndarray
    left: np.ndarray
    right: np.ndarray
    m_split: np.ndarray

    def zero_mask(self, rtol: float = 1e-10) -> np.ndarray:
        scale = np.max(np.abs(self.lam), axis=0, keepdims=True)
        return np.abs(self.lam) <= rtol * scale


def eigendecompose_axis(matrices: CharMatrices, axis, rtol: float = 1e-12) -> AxisEigensystem:
    a = axis_index(axis)
    mat = matrices.along(a)
    batch = mat.shape[2:]
    ms = np.moveaxis(mat.reshape(6, 6, -1), -1, 0)
    lam, vec = np.linalg.eig(ms)
    if np.max(np.abs(lam.imag), initial=0.0) > 1e-8 * max(np.max(np.abs(ms)), 1e-300):
        raise EigensystemError("complex eigenvalues: not a hyperbolic system")
    lam = lam.real
    vec = vec.real
    order = np.argsort(lam, axis=1, kind="stable")
    lam = np.take_along_axis(lam, order, axis=1)
    vec = np.take_along_axis(vec, order[:, None, :], axis=2)

    norm = np.max(np.abs(ms), axis=(1, 2))
    norm = np.where(norm > 0, norm, 1.0)
    zero = np.abs(lam) <= 1e-10 * norm[:, None]
    if not np.all(zero.sum(axis=1) == 2):
        raise EigensystemError("expected exactly two stationary (constraint) waves")
    # stationary waves: project the pure normal-D and normal-B directions onto the null space
    for n in range(ms.shape[0]):
        _, s, vt = np.linalg.svd(ms[n])
        null = vt[-2:].T
        proj = null @ null.T
        cols = np.nonzero(zero[n])[0]
        for col, unit in zip(cols, (a, 3 + a)):
            v = proj[:, unit]
            vec[n, :, col] = v / np.linalg.norm(v)
        other = ~zero[n]
        vec[n][:, other] /= np.linalg.norm(vec[n][:, other], axis=0)

    try:
        left = np.linalg.inv(vec)
    except np.linalg.LinAlgError as exc:
        raise EigensystemError("defective characteristic matrix") from exc
    resid = np.einsum("nij,njm->nim", ms, vec) - vec * lam[:, None, :]
    if np.max(np.abs(resid), initial=0.0) > 1e3 * rtol * np.max(norm):
        raise EigensystemError("eigenvector residual above tolerance")
    ortho = np.einsum("nmi,nik->nmk", left, vec) - np.eye(6)
    if np.max(np.abs(ortho), initial=0.0) > 1e-8:
        raise EigensystemError("eigenvectors are ill-conditioned")

    m_split = np.sum((lam < 0) & ~zero, axis=1)
    right = np.moveaxis(vec, 2, 1)  # right[n, m, :] is the m-th right vector
    return AxisEigensystem(
        lam=np.moveaxis(lam, 0, -1).reshape((6,) + batch),
        left=np.moveaxis(left, 0, -1).reshape((6, 6) + batch),
        right=np.moveaxis(right, 0, -1).reshape((6, 6) + batch),
        m_split=m_split.reshape(batch),
    )


def axis_speed(mat: MaterialTensors, axis) -> np.ndarray:
    """Largest signal speed along ``axis`` for every material in the batch."""
    a = axis_index(axis)
    b, c = (a + 1) % 3, (a + 2) % 3
    if mat.is_diagonal:
        ei, mi = mat.eps_inv, mat.mu_inv
        return np.maximum(np.sqrt(mi[c, c] * ei[b, b]), np.sqrt(mi[b, b] * ei[c, c]))
    m = build_characteristic_matrices(mat).along(a)
    ms = np.moveaxis(m.reshape(6, 6, -1), -1, 0)
    lam = np.linalg.eigvals(ms)
    return np.max(np.abs(lam.real), axis=1).reshape(m.shape[2:])
