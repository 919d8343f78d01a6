"""Two-wave HLL solver for linear systems.

The resolved state between two constant states and the resolved value of
their gradients are the same linear form, so both go through ``_hll``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import matvec


class DegenerateFanError(ValueError):
    pass


@dataclass(frozen=True)
class WavePair:
    s_minus: float | np.ndarray
    s_plus: float | np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.s_plus) <= np.asarray(self.s_minus)):
            raise DegenerateFanError("wave fan needs s_minus < s_plus")


def _hll(v_l, v_r, mat6, s_l, s_r):
    # -[(A - sR) vR - (A - sL) vL] / (sR - sL)
    num = matvec(mat6, v_r - v_l) - s_r * v_r + s_l * v_l
    return -num / (s_r - s_l)


def hll_resolved(u_l, u_r, mat6, w: WavePair) -> np.ndarray:
    """Constant intermediate state of the HLL fan.

    ``u_l``, ``u_r`` have shape ``(6, ...)`` and ``mat6`` ``(6, 6, ...)``.
    """
    return _hll(np.asarray(u_l, float), np.asarray(u_r, float), np.asarray(mat6, float),
                w.s_minus, w.s_plus)


def hll_resolved_gradient(g_l, g_r, mat6, w: WavePair) -> np.ndarray:
    """Resolved-state derivative; the fan is linear so this is the same form."""
    return hll_resolved(g_l, g_r, mat6, w)


def hll_flux(u_l, u_r, mat6, w: WavePair) -> np.ndarray:
    """HLL flux consistent with ``hll_resolved`` (``A`` times the resolved state)."""
    return matvec(np.asarray(mat6, float), hll_resolved(u_l, u_r, mat6, w))
