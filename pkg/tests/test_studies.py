import math

import numpy as np
import pytest

from cedgrp.problems import BeamSpec, PlaneWaveSpec, PlaneWave, SkinDepthSpec
from cedgrp.studies import (refraction_study, run_beam, self_convergence, skin_depth_study,
                            tir_study)
from cedgrp.mesh import advance

SMALL = dict(dims=(65, 48), t_final=1.0e-14)


def test_run_beam_samples_on_schedule():
    spec = BeamSpec.refraction(**SMALL)
    _, mesh, snaps = run_beam(spec, frames=4)
    assert len(snaps) == 4
    np.testing.assert_allclose([t for t, _ in snaps], np.linspace(0, 1e-14, 5)[1:], rtol=1e-12)
    assert snaps[0][1].shape == (65, 48)
    assert mesh.time == pytest.approx(1e-14, rel=1e-14)


def test_refraction_study_reports_flux_direction():
    res = refraction_study(BeamSpec.refraction(dims=(65, 48), t_final=2.5e-14), frames=5)
    assert res.expected_deg == pytest.approx(28.126, abs=1e-3)
    fx, fy = res.flux
    assert fx > 0 and fy > 0
    assert res.angle_deg == pytest.approx(math.degrees(math.atan2(fy, fx)))
    assert len(res.track.times) == len(res.track.centroids) <= 5


def test_tir_study_needs_the_beam_to_arrive():
    with pytest.raises(RuntimeError, match="reaches the interface"):
        tir_study(BeamSpec.tir(dims=(35, 43), t_final=1e-14))


def test_skin_depth_study_small_mesh():
    res = skin_depth_study(SkinDepthSpec.preset("carbon", n_zones=50))
    assert res.delta_exact == pytest.approx(3.4421e-6, rel=1e-4)
    assert res.rel_error < 0.05
    assert res.envelope.shape == (50,)


def test_self_convergence_against_exact_reference():
    # a fine run restricted onto coarse meshes should recover the oracle order
    runs = []
    for n in (8, 16, 64):
        prob = PlaneWave(PlaneWaveSpec(n=n, t_final=1.0e-9))
        runs.append(advance(prob.mesh(), 1.0e-9, 0.45))
    tables = self_convergence(runs[:2], runs[2], components=("Dy",))
    assert tables["Dy"][1].l1_order > 1.8


def test_column_flux_matches_full_poynting():
    from cedgrp.mesh import cfl_timestep, update_step
    from cedgrp.problems import Beam, poynting
    from cedgrp.studies import _column_sx
    m = Beam(BeamSpec.tir(dims=(70, 85))).mesh()
    m = update_step(m, cfl_timestep(m, 0.45))
    s = poynting(m)[0]
    for i in (5, 30, 60):
        assert _column_sx(m, i) == pytest.approx(float(s[i].sum()), rel=1e-12)
