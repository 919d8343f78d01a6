"""Finite-volume time-domain Maxwell solver with a multidimensional GRP edge solver."""
from .core import (NORMALIZED, SI, AxisEigensystem, CharMatrices, EigensystemError,
                   InvalidMaterialError, MaterialTensors, PhysicalConstants,
                   build_characteristic_matrices, eigendecompose_axis, fields_from_state)
from .riemann1d import DegenerateFanError, WavePair, hll_resolved, hll_resolved_gradient
from .stiff_source import SourceOperatorKind, amplification, apply_time_centering, g_factor

__version__ = "0.1.0"
