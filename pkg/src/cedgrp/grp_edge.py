"""Multidimensional generalized Riemann problem at a z-directed mesh edge.

Four zones meet at the edge.  Each supplies a linear profile evaluated at the
edge (a state plus its x/y/z gradients).  Quadrant names follow the edge's
local frame: ``ru`` is the zone at larger x and larger y, ``lu`` smaller x
and larger y, ``ld`` smaller x and y, ``rd`` larger x and smaller y.

Every function accepts trailing batch axes, so a whole edge family can be
solved in one call.  Edges along x or y are handled by cyclically relabeling
axes (``edge_frame``) and reusing the z-edge solver.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (AxisEigensystem, CharMatrices, MaterialTensors, axis_index,
                   axis_speed, build_characteristic_matrices, eigendecompose_axis,
                   matvec)
from .riemann1d import DegenerateFanError, _hll
from .stiff_source import SourceOperatorKind, _g_scalar


class UnsupportedMaterialError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeGrpInput:
    u_ru: np.ndarray
    u_lu: np.ndarray
    u_ld: np.ndarray
    u_rd: np.ndarray
    g_ru: np.ndarray
    g_lu: np.ndarray
    g_ld: np.ndarray
    g_rd: np.ndarray
    speeds: tuple  # (S_L, S_R, S_D, S_U)
    matrices: CharMatrices
    eig_x: Optional[AxisEigensystem] = None
    eig_y: Optional[AxisEigensystem] = None
    material: Optional[MaterialTensors] = None

    def __post_init__(self):
        s_l, s_r, s_d, s_u = (np.asarray(s) for s in self.speeds)
        if np.any(s_l >= s_r) or np.any(s_d >= s_u):
            raise DegenerateFanError("edge fans need S_L < S_R and S_D < S_U")

    @classmethod
    def from_material(cls, states, grads, mat: MaterialTensors, speeds=None,
                      closed_form: bool = False) -> "EdgeGrpInput":
        """Build an input from four states/gradients ordered (ru, lu, ld, rd)."""
        cm = build_characteristic_matrices(mat)
        if speeds is None:
            speeds = extremal_speeds(mat, "z")
        if closed_form:
            ex = ey = None
        else:
            ex, ey = eigendecompose_axis(cm, "x"), eigendecompose_axis(cm, "y")
        return cls(*states, *grads, speeds=tuple(speeds), matrices=cm,
                   eig_x=ex, eig_y=ey, material=mat)


@dataclass(frozen=True)
class EdgeGrpOutput:
    u_star: np.ndarray
    grad_star: np.ndarray  # (3, 6, ...)
    fx_star: np.ndarray
    fy_star: np.ndarray
    u_star_half: np.ndarray


def extremal_speeds(mat: MaterialTensors, edge_axis="z"):
    """Fan speeds ``(S_L, S_R, S_D, S_U)`` in the frame of an edge along ``edge_axis``."""
    a = axis_index(edge_axis)
    s_x = axis_speed(mat, (a + 1) % 3)
    s_y = axis_speed(mat, (a + 2) % 3)
    return -s_x, s_x, -s_y, s_y


def resolved_state_x_pair(u_a, u_b, g_a, g_b, matrices: CharMatrices, speeds):
    """x-directed fan between ``u_b`` (left) and ``u_a`` (right).

    Returns the resolved state and its y and z derivatives.
    """
    s_l, s_r = speeds[0], speeds[1]
    a = matrices.A
    u = _hll(u_b, u_a, a, s_l, s_r)
    dy = _hll(g_b[1], g_a[1], a, s_l, s_r)
    dz = _hll(g_b[2], g_a[2], a, s_l, s_r)
    return u, dy, dz


def resolved_state_y_pair(u_a, u_b, g_a, g_b, matrices: CharMatrices, speeds):
    """y-directed fan between ``u_b`` (down) and ``u_a`` (up).

    Returns the resolved state and its x and z derivatives.
    """
    s_d, s_u = speeds[2], speeds[3]
    b = matrices.B
    u = _hll(u_b, u_a, b, s_d, s_u)
    dx = _hll(g_b[0], g_a[0], b, s_d, s_u)
    dz = _hll(g_b[2], g_a[2], b, s_d, s_u)
    return u, dx, dz


def strongly_interacting_state(u_r, u_l, u_u, u_d, matrices: CharMatrices, speeds):
    s_l, s_r, s_d, s_u = speeds
    return 0.5 * (_hll(u_l, u_r, matrices.A, s_l, s_r) + _hll(u_d, u_u, matrices.B, s_d, s_u))


def z_gradient_star(dz_r, dz_l, dz_u, dz_d, matrices: CharMatrices, speeds):
    return strongly_interacting_state(dz_r, dz_l, dz_u, dz_d, matrices, speeds)


def longitudinal_gradient_upwind(g_minus, g_plus, eig: AxisEigensystem, speeds=None):
    """Upwinded derivative along the fan axis at the edge.

    ``g_minus`` is the derivative of the resolved state on the negative side
    of the fan and ``g_plus`` on the positive side.  Waves are sorted by the
    sign of their eigenvalue; stationary waves keep the mean.  ``speeds``
    (``s_minus``, ``s_plus``) selects the fully one-sided branches when the
    fan does not straddle zero.
    """
    g_minus = np.asarray(g_minus, dtype=float)
    g_plus = np.asarray(g_plus, dtype=float)
    diff = g_plus - g_minus
    alpha = np.einsum("mi...,i...->m...", eig.left, diff)
    zero = eig.zero_mask()
    sgn = np.where(zero, 0.0, np.where(eig.lam < 0, 1.0, -1.0))
    # an unbatched eigensystem may serve batched gradients
    sgn = sgn.reshape(sgn.shape + (1,) * (alpha.ndim - sgn.ndim))
    out = 0.5 * (g_minus + g_plus) + 0.5 * np.einsum("m...,mi...->i...", sgn * alpha, eig.right)
    if speeds is not None:
        s_minus, s_plus = (np.asarray(s) for s in speeds)
        out = np.where(s_minus >= 0, g_minus, out)
        out = np.where(s_plus <= 0, g_plus, out)
    return out


def _require_diagonal(mat: MaterialTensors):
    if not mat.is_diagonal:
        raise UnsupportedMaterialError("closed-form upwinding needs diagonal tensors")


def longitudinal_gradient_closed_form(g_minus, g_plus, mat: MaterialTensors, axis="x"):
    """Closed-form upwinding for diagonal tensors along ``axis``."""
    _require_diagonal(mat)
    a = axis_index(axis)
    b, c = (a + 1) % 3, (a + 2) % 3
    e, m = mat.eps_inv, mat.mu_inv
    g_minus = np.asarray(g_minus, dtype=float)
    g_plus = np.asarray(g_plus, dtype=float)
    d = g_plus - g_minus
    out = 0.5 * (g_minus + g_plus)
    out[b] -= 0.5 * np.sqrt(m[c, c] / e[b, b]) * d[3 + c]
    out[3 + c] -= 0.5 * np.sqrt(e[b, b] / m[c, c]) * d[b]
    out[c] += 0.5 * np.sqrt(m[b, b] / e[c, c]) * d[3 + b]
    out[3 + b] += 0.5 * np.sqrt(e[c, c] / m[b, b]) * d[c]
    return out


def _source_kind(source_mode):
    if source_mode is None:
        return None
    if isinstance(source_mode, SourceOperatorKind):
        return source_mode
    key = str(source_mode).strip().lower()
    if key == "none":
        return None
    if key == "l_stable":
        return SourceOperatorKind.L_STABLE_AVERAGE
    return SourceOperatorKind.parse(key)


def apply_g_batched(w, dt, sigma, kind) -> np.ndarray:
    """``g(dt * Sigma) w`` for per-element source matrices ``(6, 6, ...)``."""
    if kind is None or not np.any(sigma):
        return np.array(w, dtype=float, copy=True)
    chi = dt * np.asarray(sigma, dtype=float)
    diag = np.einsum("ii...->i...", chi)
    off = chi - np.einsum("i...,ij->ij...", diag, np.eye(6))
    if not np.any(off):
        return _g_scalar(diag, kind) * w
    batch = chi.shape[2:]
    mats = np.moveaxis(chi.reshape(6, 6, -1), -1, 0)
    lam, vec = np.linalg.eigh(mats)
    g = np.einsum("nij,nj,nkj->nik", vec, _g_scalar(np.clip(lam, 0.0, None), kind), vec)
    g = np.moveaxis(g, 0, -1).reshape((6, 6) + batch)
    return matvec(g, w)


def solve_edge_grp(inp: EdgeGrpInput, dt: float, source_mode="none") -> EdgeGrpOutput:
    """Strongly-interacting state, its gradients and the half-step value."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    cm, sp = inp.matrices, inp.speeds
    u_up, dy_up, dz_up = resolved_state_x_pair(inp.u_ru, inp.u_lu, inp.g_ru, inp.g_lu, cm, sp)
    u_dn, dy_dn, dz_dn = resolved_state_x_pair(inp.u_rd, inp.u_ld, inp.g_rd, inp.g_ld, cm, sp)
    u_rt, dx_rt, dz_rt = resolved_state_y_pair(inp.u_ru, inp.u_rd, inp.g_ru, inp.g_rd, cm, sp)
    u_lt, dx_lt, dz_lt = resolved_state_y_pair(inp.u_lu, inp.u_ld, inp.g_lu, inp.g_ld, cm, sp)

    u_star = strongly_interacting_state(u_rt, u_lt, u_up, u_dn, cm, sp)
    dz_star = z_gradient_star(dz_rt, dz_lt, dz_up, dz_dn, cm, sp)
    if inp.eig_x is not None and inp.eig_y is not None:
        dx_star = longitudinal_gradient_upwind(dx_lt, dx_rt, inp.eig_x)
        dy_star = longitudinal_gradient_upwind(dy_dn, dy_up, inp.eig_y)
    elif inp.material is not None:
        dx_star = longitudinal_gradient_closed_form(dx_lt, dx_rt, inp.material, "x")
        dy_star = longitudinal_gradient_closed_form(dy_dn, dy_up, inp.material, "y")
    else:
        raise ValueError("edge input needs eigensystems or a diagonal material")

    grad = np.stack([dx_star, dy_star, dz_star])
    evolved = u_star - 0.5 * dt * (matvec(cm.A, dx_star) + matvec(cm.B, dy_star)
                                   + matvec(cm.C, dz_star))
    half = apply_g_batched(evolved, dt, cm.Sigma, _source_kind(source_mode))
    return EdgeGrpOutput(u_star=u_star, grad_star=grad, fx_star=matvec(cm.A, u_star),
                         fy_star=matvec(cm.B, u_star), u_star_half=half)


def edge_frame(axis):
    """Axis map and component permutation into the frame of an edge along ``axis``.

    Local axis ``l`` is global axis ``axes[l]`` and local component ``q`` is
    global component ``perm[q]``.  The relabeling is cyclic, so handedness
    and hence the curl structure are preserved.
    """
    a = axis_index(axis)
    axes = ((a + 1) % 3, (a + 2) % 3, a)
    perm = list(axes) + [3 + x for x in axes]
    return axes, perm


def to_edge_frame_state(u, axis):
    _, perm = edge_frame(axis)
    return np.asarray(u)[perm]


def from_edge_frame_state(u, axis):
    _, perm = edge_frame(axis)
    out = np.empty_like(u)
    out[perm] = u
    return out


def to_edge_frame_grad(g, axis):
    axes, perm = edge_frame(axis)
    return np.asarray(g)[list(axes)][:, perm]


def from_edge_frame_grad(g, axis):
    axes, perm = edge_frame(axis)
    out = np.empty_like(g)
    tmp = np.empty_like(g)
    tmp[:, perm] = g
    out[list(axes)] = tmp
    return out
