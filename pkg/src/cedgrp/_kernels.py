"""Compiled pointwise edge sweep for diagonal materials.

The kernel walks one edge family, evaluates the four quadrant traces from the
padded zone reconstruction, runs the z-edge GRP in the edge's local frame and
writes time-centered E, H, J and M in global component order.  It mirrors
``grp_edge.solve_edge_grp`` with closed-form upwinding and symmetric fans.
"""
import math

import numpy as np
from numba import njit

KIND_NONE, KIND_EXACT, KIND_BE, KIND_AVG = 0, 1, 2, 3


@njit(cache=True, inline="always")
def _g(chi, kind):
    if kind == KIND_NONE or chi == 0.0:
        return 1.0
    if kind == KIND_EXACT:
        return math.exp(-0.5 * chi)
    if kind == KIND_BE:
        return 1.0 / (1.0 + 0.5 * chi)
    return 0.5 * (math.exp(-0.5 * chi) + 1.0 / (1.0 + 0.5 * chi))


@njit(cache=True, inline="always")
def _hll_x(S, il, ir, io, e, m, s):
    h = 0.5 / s
    S[io, 0] = 0.5 * (S[il, 0] + S[ir, 0])
    S[io, 1] = 0.5 * (S[il, 1] + S[ir, 1]) - h * m[2] * (S[ir, 5] - S[il, 5])
    S[io, 2] = 0.5 * (S[il, 2] + S[ir, 2]) + h * m[1] * (S[ir, 4] - S[il, 4])
    S[io, 3] = 0.5 * (S[il, 3] + S[ir, 3])
    S[io, 4] = 0.5 * (S[il, 4] + S[ir, 4]) + h * e[2] * (S[ir, 2] - S[il, 2])
    S[io, 5] = 0.5 * (S[il, 5] + S[ir, 5]) - h * e[1] * (S[ir, 1] - S[il, 1])


@njit(cache=True, inline="always")
def _hll_y(S, idn, iup, io, e, m, s):
    h = 0.5 / s
    S[io, 0] = 0.5 * (S[idn, 0] + S[iup, 0]) + h * m[2] * (S[iup, 5] - S[idn, 5])
    S[io, 1] = 0.5 * (S[idn, 1] + S[iup, 1])
    S[io, 2] = 0.5 * (S[idn, 2] + S[iup, 2]) - h * m[0] * (S[iup, 3] - S[idn, 3])
    S[io, 3] = 0.5 * (S[idn, 3] + S[iup, 3]) - h * e[2] * (S[iup, 2] - S[idn, 2])
    S[io, 4] = 0.5 * (S[idn, 4] + S[iup, 4])
    S[io, 5] = 0.5 * (S[idn, 5] + S[iup, 5]) + h * e[0] * (S[iup, 0] - S[idn, 0])


@njit(cache=True, inline="always")
def _upwind_x(S, im, ip, io, e, m):
    for c in range(6):
        S[io, c] = 0.5 * (S[im, c] + S[ip, c])
    S[io, 1] -= 0.5 * math.sqrt(m[2] / e[1]) * (S[ip, 5] - S[im, 5])
    S[io, 5] -= 0.5 * math.sqrt(e[1] / m[2]) * (S[ip, 1] - S[im, 1])
    S[io, 2] += 0.5 * math.sqrt(m[1] / e[2]) * (S[ip, 4] - S[im, 4])
    S[io, 4] += 0.5 * math.sqrt(e[2] / m[1]) * (S[ip, 2] - S[im, 2])


@njit(cache=True, inline="always")
def _upwind_y(S, im, ip, io, e, m):
    for c in range(6):
        S[io, c] = 0.5 * (S[im, c] + S[ip, c])
    S[io, 0] += 0.5 * math.sqrt(m[2] / e[0]) * (S[ip, 5] - S[im, 5])
    S[io, 5] += 0.5 * math.sqrt(e[0] / m[2]) * (S[ip, 0] - S[im, 0])
    S[io, 2] -= 0.5 * math.sqrt(m[0] / e[2]) * (S[ip, 3] - S[im, 3])
    S[io, 3] -= 0.5 * math.sqrt(e[2] / m[0]) * (S[ip, 2] - S[im, 2])


# scratch rows: quadrant states / x, y, z gradients (ru, lu, ld, rd each)
QS, QGX, QGY, QGZ = 0, 4, 8, 12
U_UP, U_DN, U_RT, U_LT = 16, 17, 18, 19
DY_UP, DY_DN, DZ_UP, DZ_DN = 20, 21, 22, 23
DX_RT, DX_LT, DZ_RT, DZ_LT = 24, 25, 26, 27
T1, T2, U_ST, DX_S, DY_S, DZ_S = 28, 29, 30, 31, 32, 33
N_ROWS = 34


@njit(cache=True)
def edge_sweep(R, M, axes, spacing, n_nodes, dt, kind, out_e, out_h, out_j, out_m):
    """Solve every edge of one family.

    R (P0, P1, P2, 4, 6) holds the padded zone reconstruction (one ghost zone
    per side): value then x, y, z slopes of the six components.  M
    (P0, P1, P2, 11) packs the diagonal of eps_inv, of mu_inv, sigma,
    sigma_star and the largest signal speed along x, y, z.
    ``axes`` maps local axis l to the global axis; ``n_nodes`` holds, in
    global axis order, how many nodes (or zones, along the edge) to compute.
    Outputs have global edge-array shape with leading component axis 3.
    """
    ax0, ax1, ax2 = axes[0], axes[1], axes[2]
    hx = 0.5 * spacing[ax0]
    hy = 0.5 * spacing[ax1]
    p0, p1, p2 = R.shape[0], R.shape[1], R.shape[2]
    Rf = R.reshape((p0 * p1 * p2, 24))
    Mf = M.reshape((p0 * p1 * p2, M.shape[3]))
    stride = np.array([p1 * p2, p2, 1])

    # columns of the packed rows in local component order
    col_v = np.empty(6, np.int64)
    col_x = np.empty(6, np.int64)
    col_y = np.empty(6, np.int64)
    col_z = np.empty(6, np.int64)
    for l in range(3):
        for half in range(2):
            c = 3 * half + l
            gc = 3 * half + axes[l]
            col_v[c] = gc
            col_x[c] = 6 * (1 + ax0) + gc
            col_y[c] = 6 * (1 + ax1) + gc
            col_z[c] = 6 * (1 + ax2) + gc
    col_e = np.array([axes[0], axes[1], axes[2]])
    col_m = col_e + 3

    # quadrants ru, lu, ld, rd: zone offsets from the lower-left zone of the edge
    dpx = np.array([1, 0, 0, 1])
    dpy = np.array([1, 1, 0, 0])
    qoff = np.empty(4, np.int64)
    oxs = np.empty(4)
    oys = np.empty(4)
    for quad in range(4):
        qoff[quad] = dpx[quad] * stride[ax0] + dpy[quad] * stride[ax1] + stride[ax2]
        # upper zones see the edge on their lower face
        oxs[quad] = -hx if dpx[quad] == 1 else hx
        oys[quad] = -hy if dpy[quad] == 1 else hy

    S = np.empty((N_ROWS, 6))
    e = np.empty(3)
    m = np.empty(3)
    w = np.empty(6)
    hd = 0.5 * dt

    for i0 in range(n_nodes[0]):
        for j0 in range(n_nodes[1]):
            for k0 in range(n_nodes[2]):
                base = i0 * stride[0] + j0 * stride[1] + k0
                sx = 0.0
                sy = 0.0
                for c in range(3):
                    e[c] = 0.0
                    m[c] = 0.0
                s_e = 0.0
                s_m = 0.0
                for quad in range(4):
                    z = base + qoff[quad]
                    ox = oxs[quad]
                    oy = oys[quad]
                    for c in range(6):
                        gx = Rf[z, col_x[c]]
                        gy = Rf[z, col_y[c]]
                        S[QS + quad, c] = Rf[z, col_v[c]] + ox * gx + oy * gy
                        S[QGX + quad, c] = gx
                        S[QGY + quad, c] = gy
                        S[QGZ + quad, c] = Rf[z, col_z[c]]
                    for c in range(3):
                        e[c] += 0.25 * Mf[z, col_e[c]]
                        m[c] += 0.25 * Mf[z, col_m[c]]
                    s_e += 0.25 * Mf[z, 6]
                    s_m += 0.25 * Mf[z, 7]
                    vx = Mf[z, 8 + ax0]
                    vy = Mf[z, 8 + ax1]
                    if vx > sx:
                        sx = vx
                    if vy > sy:
                        sy = vy

                # one-dimensional fans: x-directed above and below, y-directed right and left
                _hll_x(S, QS + 1, QS + 0, U_UP, e, m, sx)
                _hll_x(S, QGY + 1, QGY + 0, DY_UP, e, m, sx)
                _hll_x(S, QGZ + 1, QGZ + 0, DZ_UP, e, m, sx)
                _hll_x(S, QS + 2, QS + 3, U_DN, e, m, sx)
                _hll_x(S, QGY + 2, QGY + 3, DY_DN, e, m, sx)
                _hll_x(S, QGZ + 2, QGZ + 3, DZ_DN, e, m, sx)
                _hll_y(S, QS + 3, QS + 0, U_RT, e, m, sy)
                _hll_y(S, QGX + 3, QGX + 0, DX_RT, e, m, sy)
                _hll_y(S, QGZ + 3, QGZ + 0, DZ_RT, e, m, sy)
                _hll_y(S, QS + 2, QS + 1, U_LT, e, m, sy)
                _hll_y(S, QGX + 2, QGX + 1, DX_LT, e, m, sy)
                _hll_y(S, QGZ + 2, QGZ + 1, DZ_LT, e, m, sy)

                # strongly-interacting state and its z derivative
                _hll_x(S, U_LT, U_RT, T1, e, m, sx)
                _hll_y(S, U_DN, U_UP, T2, e, m, sy)
                for c in range(6):
                    S[U_ST, c] = 0.5 * (S[T1, c] + S[T2, c])
                _hll_x(S, DZ_LT, DZ_RT, T1, e, m, sx)
                _hll_y(S, DZ_DN, DZ_UP, T2, e, m, sy)
                for c in range(6):
                    S[DZ_S, c] = 0.5 * (S[T1, c] + S[T2, c])
                _upwind_x(S, DX_LT, DX_RT, DX_S, e, m)
                _upwind_y(S, DY_DN, DY_UP, DY_S, e, m)

                # half-step predictor: U* - dt/2 (A dx + B dy + C dz)
                w[0] = S[U_ST, 0] - hd * (-m[2] * S[DY_S, 5] + m[1] * S[DZ_S, 4])
                w[1] = S[U_ST, 1] - hd * (m[2] * S[DX_S, 5] - m[0] * S[DZ_S, 3])
                w[2] = S[U_ST, 2] - hd * (-m[1] * S[DX_S, 4] + m[0] * S[DY_S, 3])
                w[3] = S[U_ST, 3] - hd * (e[2] * S[DY_S, 2] - e[1] * S[DZ_S, 1])
                w[4] = S[U_ST, 4] - hd * (-e[2] * S[DX_S, 2] + e[0] * S[DZ_S, 0])
                w[5] = S[U_ST, 5] - hd * (e[1] * S[DX_S, 1] - e[0] * S[DY_S, 0])

                for c in range(3):
                    ec = e[c] * w[c] * _g(dt * s_e * e[c], kind)
                    hc = m[c] * w[3 + c] * _g(dt * s_m * m[c], kind)
                    a = axes[c]
                    out_e[a, i0, j0, k0] = ec
                    out_h[a, i0, j0, k0] = hc
                    out_j[a, i0, j0, k0] = s_e * ec
                    out_m[a, i0, j0, k0] = s_m * hc


@njit(cache=True, inline="always")
def _minmod(l, r):
    return 0.5 * (np.sign(l) + np.sign(r)) * min(abs(l), abs(r))


@njit(cache=True, inline="always")
def _zone_component(P, out, c, i, j, k, di, dj, dk, bi, bj, bk, ci, cj, ck,
                    inv_a, inv_b, inv_c, a, b, d, minmod):
    lo = P[c, i + 1, j + 1, k + 1]
    hi = P[c, i + 1 + di, j + 1 + dj, k + 1 + dk]
    out[i, j, k, 0, c] = 0.5 * (lo + hi)
    out[i, j, k, 1 + a, c] = (hi - lo) * inv_a
    acc_b = 0.0
    acc_c = 0.0
    for f in range(2):
        si = i + 1 + f * di
        sj = j + 1 + f * dj
        sk = k + 1 + f * dk
        c0 = P[c, si, sj, sk]
        lb = c0 - P[c, si - bi, sj - bj, sk - bk]
        rb = P[c, si + bi, sj + bj, sk + bk] - c0
        lc = c0 - P[c, si - ci, sj - cj, sk - ck]
        rc = P[c, si + ci, sj + cj, sk + ck] - c0
        if minmod:
            acc_b += _minmod(lb, rb)
            acc_c += _minmod(lc, rc)
        else:
            acc_b += 0.5 * (lb + rb)
            acc_c += 0.5 * (lc + rc)
    out[i, j, k, 1 + b, c] = 0.5 * acc_b * inv_b
    out[i, j, k, 1 + d, c] = 0.5 * acc_c * inv_c


@njit(cache=True)
def reconstruct_zones(P, spacing, minmod, out):
    """Linear zone profiles of all six components from padded face data.

    ``P`` is (6, N0+4, N1+4, N2+4): component ``c`` lives on faces normal to
    axis ``c % 3``; padded index ``q`` is face (normal axis) or zone
    (transverse axes) ``q - 2``.  ``out`` is the packed (N0+2, N1+2, N2+2,
    4, 6) reconstruction covering zones -1..N.
    """
    n0, n1, n2 = out.shape[0], out.shape[1], out.shape[2]
    ix, iy, iz = 1.0 / spacing[0], 1.0 / spacing[1], 1.0 / spacing[2]
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                # normal axis x: transverse y, z ; y: z, x ; z: x, y
                _zone_component(P, out, 0, i, j, k, 1, 0, 0, 0, 1, 0, 0, 0, 1, ix, iy, iz, 0, 1, 2, minmod)
                _zone_component(P, out, 3, i, j, k, 1, 0, 0, 0, 1, 0, 0, 0, 1, ix, iy, iz, 0, 1, 2, minmod)
                _zone_component(P, out, 1, i, j, k, 0, 1, 0, 0, 0, 1, 1, 0, 0, iy, iz, ix, 1, 2, 0, minmod)
                _zone_component(P, out, 4, i, j, k, 0, 1, 0, 0, 0, 1, 1, 0, 0, iy, iz, ix, 1, 2, 0, minmod)
                _zone_component(P, out, 2, i, j, k, 0, 0, 1, 1, 0, 0, 0, 1, 0, iz, ix, iy, 2, 0, 1, minmod)
                _zone_component(P, out, 5, i, j, k, 0, 0, 1, 1, 0, 0, 0, 1, 0, iz, ix, iy, 2, 0, 1, minmod)
