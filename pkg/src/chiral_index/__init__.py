"""Chiral indices of signature operators from truncated mode representations."""

from .cfs import CFSPoint, DiscreteCFS, assemble_chiral, assemble_signature, build_shift_cfs, validate_pseudoscalar
from .homotopy import (
    HomotopyPath,
    SweepReport,
    asymptotic_check,
    conformal_coeff,
    homotopy_sweep,
    lifetime_block,
    lifetime_index0,
)
from .index import IndexReport, TruncationPolicy, chiral_index_odd, noether_index, stabilize_index
from .modes import Mode, dispersion
from .pinum import PiRational
from .spectral import KernelResult, SparseComplexOperator, adjoint, block_decompose, kernel
from .spiral import MuCoefficients, assemble_spiral_sl, build_mu, spiral_index, v_conjugate_mode
from .torus import FourierSeries, assemble_torus_sl, fourier_coefficients, torus_index0
from .trigpoly import TrigPoly, TrigSpinor, integrate_cell, trig_mul

__version__ = "0.1.0"
