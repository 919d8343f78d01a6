"""Acceptance checks, one PASS/FAIL line per criterion.

Tolerances are pinned; nothing here is tuned to make a result pass.  The
slow checks (beams, plane-wave ladder, skin depth) take several minutes
on one core.  Criterion 9 is a manual target: set ``CEDGRP_MANUAL=1``.

    pytest tests/test_acceptance.py -v
"""
import os

import numpy as np
import pytest

from cedgrp.core import MaterialTensors, NORMALIZED
from cedgrp.grp_edge import EdgeGrpInput, solve_edge_grp
from cedgrp.mesh import StaggeredMesh, divergence_diagnostics, update_step
from cedgrp.problems import BeamSpec, SkinDepthSpec, init_random_field
from cedgrp.riemann1d import WavePair, hll_resolved, hll_resolved_gradient
from cedgrp.stiff_source import SourceOperatorKind, amplification, g_factor
from cedgrp.studies import (plane_wave_convergence, pulse_self_convergence, refraction_study,
                            skin_depth_study, tir_study)

pytestmark = pytest.mark.slow


@pytest.fixture
def report(capsys):
    def emit(num, name, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {num} ({name}): {detail}")
        return ok
    return emit


def _random_material(rng):
    eps, mu = rng.uniform(1.0, 4.0, 3), rng.uniform(1.0, 2.0, 3)
    return MaterialTensors.diagonal(eps, mu, 0.0, 0.0, NORMALIZED)


# 1 -------------------------------------------------------------------------

TABLE1_DY_L1 = {16: 9.8208e-05, 64: 5.5153e-06}


def test_1_plane_wave_convergence(report):
    tables = plane_wave_convergence(levels=(16, 32, 64, 128), cfl=0.45, t_final=3.5e-9)
    orders, lines = [], []
    for comp in ("Dy", "Bz"):
        for r in tables[comp][1:]:
            orders += [r.l1_order, r.linf_order]
        lines.append(comp + " orders " + ", ".join(f"{r.l1_order:.2f}/{r.linf_order:.2f}"
                                                  for r in tables[comp][1:]))
    dy = {r.n: r.l1 for r in tables["Dy"]}
    ratios = {n: dy[n] / ref for n, ref in TABLE1_DY_L1.items()}
    ok_orders = all(1.85 <= o <= 2.2 for o in orders)
    ok_abs = all(0.5 <= q <= 2.0 for q in ratios.values())
    detail = ("; ".join(lines) + f"; Dy L1 {dy[16]:.4e} at 16 (ratio {ratios[16]:.2f}),"
              f" {dy[64]:.4e} at 64 (ratio {ratios[64]:.2f}); target orders in [1.85, 2.2]")
    assert report(1, "plane-wave convergence", ok_orders and ok_abs, detail)


# 2 -------------------------------------------------------------------------

QUOTED_DELTA = {"carbon": 3.44e-6, "copper": 2.06e-8}


@pytest.mark.parametrize("material", ["carbon", "copper"])
def test_2_skin_depth(report, material):
    res = skin_depth_study(SkinDepthSpec.preset(material))
    err = abs(res.slope * QUOTED_DELTA[material] + 1.0)
    detail = (f"{material}: slope {res.slope:.5e} 1/m vs -1/delta {-1 / QUOTED_DELTA[material]:.5e}"
              f" ({100 * err:.2f} % off, limit 3 %)")
    assert report(2, "skin depth", err <= 0.03, detail)


# 3 -------------------------------------------------------------------------

# Beam data are smooth; at the desk-scaled meshes (about 13 zones per medium
# wavelength) minmod dissipates most of the beam before it is measured, so the
# beam criteria run unlimited, like the plane wave.

def test_3_snell_angle(report):
    res = refraction_study(BeamSpec.refraction(limiter="none"))
    ok = abs(res.angle_deg - 28.1) <= 1.5
    detail = (f"refracted angle {res.angle_deg:.2f} deg (Snell {res.expected_deg:.2f},"
              f" target 28.1 +- 1.5) in {res.wall_time:.0f} s")
    assert report(3, "Snell angle", ok, detail)


# 4 -------------------------------------------------------------------------

def test_4_total_internal_reflection(report):
    res = tir_study(BeamSpec.tir(limiter="none"))
    detail = (f"flux past x = {res.probe_x:.3e} m is {100 * res.fraction:.4f} % of incident"
              f" (limit 1 %) in {res.wall_time:.0f} s")
    assert report(4, "total internal reflection", res.fraction < 0.01, detail)


# 5 -------------------------------------------------------------------------

def _uniform_lossy_run(kind, chi=1e6):
    """One step on a uniform field with dt * sigma * eps_inv = chi (no gradients)."""
    dims = (4, 4, 1)
    dt = 0.1
    mat = MaterialTensors.diagonal((1.0,) * 3, (1.0,) * 3, chi / dt, 0.0, NORMALIZED)
    m = StaggeredMesh.from_arrays(dims, ((0, 1), (0, 1), (0, 0.25)), constants=NORMALIZED,
                                  source_kind=kind)
    m.materials = MaterialTensors(np.broadcast_to(mat.eps_inv[..., None, None, None],
                                                  (3, 3) + dims),
                                  np.broadcast_to(mat.mu_inv[..., None, None, None], (3, 3) + dims),
                                  mat.sigma, mat.sigma_star)
    for a in range(2):
        m.d_faces[a][...] = 1.0 + a
    d0 = [f.copy() for f in m.d_faces]
    m1 = update_step(m, dt)
    return [m1.d_faces[a] / d0[a] for a in range(2)]


def test_5_l_stability(report):
    avg, be = SourceOperatorKind.L_STABLE_AVERAGE, SourceOperatorKind.BACKWARD_EULER
    a = abs(1e6 * g_factor(1e6, avg) - 1.0)
    ratios = np.concatenate([r.ravel() for r in _uniform_lossy_run(avg)])
    decay = float(np.max(np.abs(ratios)))
    no_flip = bool(np.all(ratios >= 0))
    be_ratios = np.concatenate([r.ravel() for r in _uniform_lossy_run(be)])
    be_g = float(amplification(1e12, be))
    ok = (a <= 1e-5 and decay <= 1e-5 and no_flip
          and np.all(be_ratios < -0.99) and be_g == pytest.approx(-1.0, abs=1e-9))
    detail = (f"(a) |chi g - 1| = {a:.2e} at chi=1e6; (b) |D1/D0| <= {decay:.2e}, sign kept: {no_flip};"
              f" (c) backward Euler D1/D0 = {be_ratios.max():.6f}, G(1e12) = {be_g:.9f}")
    assert report(5, "L-stability", ok, detail)


# 6 -------------------------------------------------------------------------

def test_6_constraint_preservation(report):
    m = init_random_field((64, 64, 1), seed=2024)
    r0 = divergence_diagnostics(m)
    dt = 0.45 * m.spacing[0] / 2
    for _ in range(1000):
        m = update_step(m, dt)
    r = divergence_diagnostics(m)
    worst = max(r.rel_div_b, r.rel_div_d)
    detail = (f"after 1000 steps rel |div B - rho_M| {r.rel_div_b:.2e}, rel |div D - rho_E|"
              f" {r.rel_div_d:.2e} (start {max(r0.rel_div_b, r0.rel_div_d):.2e}, limit 1e-12)")
    assert report(6, "constraint preservation", worst <= 1e-12, detail)


# 7 -------------------------------------------------------------------------

def test_7_dual_formula_equivalence(report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        mat = _random_material(rng)
        states = [rng.normal(size=6) for _ in range(4)]
        grads = [rng.normal(size=(3, 6)) for _ in range(4)]
        a = solve_edge_grp(EdgeGrpInput.from_material(states, grads, mat), 0.1)
        b = solve_edge_grp(EdgeGrpInput.from_material(states, grads, mat, closed_form=True), 0.1)
        worst = max(worst, np.abs(a.grad_star - b.grad_star).max(),
                    np.abs(a.u_star_half - b.u_star_half).max())
    detail = f"max difference over 1000 random edge solves {worst:.2e} (limit 1e-12)"
    assert report(7, "dual-formula equivalence", worst <= 1e-12, detail)


# 8 -------------------------------------------------------------------------

def test_8_grp_invariants(report):
    rng = np.random.default_rng(8)
    worst = {"consistency": 0.0, "linearity": 0.0, "hll": 0.0}
    for _ in range(300):
        mat = _random_material(rng)
        u, g = rng.normal(size=6), rng.normal(size=(3, 6))
        out = solve_edge_grp(EdgeGrpInput.from_material([u] * 4, [g] * 4, mat), 0.1)
        worst["consistency"] = max(worst["consistency"], np.abs(out.u_star - u).max(),
                                   np.abs(out.grad_star - g).max())
        p = [rng.normal(size=6) for _ in range(4)], [rng.normal(size=(3, 6)) for _ in range(4)]
        q = [rng.normal(size=6) for _ in range(4)], [rng.normal(size=(3, 6)) for _ in range(4)]
        a, b = rng.uniform(-2, 2, 2)
        mix = ([a * x + b * y for x, y in zip(p[0], q[0])],
               [a * x + b * y for x, y in zip(p[1], q[1])])
        op, oq, om = (solve_edge_grp(EdgeGrpInput.from_material(*s, mat), 0.1) for s in (p, q, mix))
        for name in ("u_star", "grad_star", "u_star_half"):
            want = a * getattr(op, name) + b * getattr(oq, name)
            scale = max(1.0, np.abs(want).max())
            worst["linearity"] = max(worst["linearity"],
                                     np.abs(getattr(om, name) - want).max() / scale)
        # 1D kernel: consistency and linearity
        w = WavePair(-rng.uniform(0.5, 2), rng.uniform(0.5, 2))
        mat6 = np.diag(rng.uniform(-1, 1, 6))
        ul, ur = rng.normal(size=6), rng.normal(size=6)
        worst["hll"] = max(worst["hll"], np.abs(hll_resolved(ul, ul, mat6, w) - ul).max(),
                           np.abs(hll_resolved_gradient(ul, ul, mat6, w) - ul).max())
        both = hll_resolved(a * ul, a * ur, mat6, w) + hll_resolved(b * ur, b * ul, mat6, w)
        want = hll_resolved(a * ul + b * ur, a * ur + b * ul, mat6, w)
        worst["hll"] = max(worst["hll"], np.abs(both - want).max() / max(1.0, np.abs(want).max()))
    ok = all(v <= 1e-13 for v in worst.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (limit 1e-13)"
    assert report(8, "GRP invariants", ok, detail)


# 9 -------------------------------------------------------------------------

@pytest.mark.skipif(os.environ.get("CEDGRP_MANUAL") != "1",
                    reason="manual target (30-60 min): set CEDGRP_MANUAL=1")
def test_9_pulse_self_convergence(report):
    res = pulse_self_convergence(levels=(120, 240, 480), reference=960)
    orders = [r.l1_order for r in res["Bz"][1:]]
    ok = orders[0] >= 1.3 and orders[-1] > orders[0] and abs(orders[0] - 1.38) <= 0.4 \
        and abs(orders[1] - 2.23) <= 0.4
    assert report(9, "pulse self-convergence", ok, "Bz L1 orders " + ", ".join(
        f"{o:.2f}" for o in orders))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v"]))
