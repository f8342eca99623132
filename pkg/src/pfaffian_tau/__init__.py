"""Pfaffian and determinantal tau-functions built from loop-group factorization data.

The package is organised bottom-up:

* :mod:`pfaffian_tau.algebra` -- exact rational polynomials, scalar rings,
  small matrices and truncated matrix series.
* :mod:`pfaffian_tau.lie` -- matrix realizations of the orthogonal affine
  algebras B_l^(1) and D_l^(1).
* :mod:`pfaffian_tau.kernels` -- the ``a``/``d`` kernels and their Fourier blocks.
* :mod:`pfaffian_tau.combinatorics` -- strict partitions, Maya diagrams.
* :mod:`pfaffian_tau.engines` -- Pfaffians, determinants and minor expansions.
* :mod:`pfaffian_tau.qschur` -- Schur Q-functions in odd times.
* :mod:`pfaffian_tau.drinfeld_sokolov` -- polynomial tau-functions of DS type.
* :mod:`pfaffian_tau.isomonodromy` -- the numeric four-point SL(2)/SO(3) case.
"""

from pfaffian_tau.algebra import (
    ComplexField,
    ConfigurationError,
    MatSeries,
    Poly,
    PolyRing,
    SeriesError,
)
from pfaffian_tau.combinatorics import StrictTuple, enumerate_strict_tuples
from pfaffian_tau.engines import (
    TauResult,
    fredholm_pfaffian_truncated,
    minor_tables,
    pfaffian,
    pfaffian_tau,
    square_check,
    widom_tau,
)
from pfaffian_tau.kernels import KernelBlocks, build_a, build_d, check_antisymmetry
from pfaffian_tau.lie import AlgebraSpec, build_algebra, shift_matrix

__version__ = "0.1.0"

__all__ = [
    "AlgebraSpec",
    "ComplexField",
    "ConfigurationError",
    "KernelBlocks",
    "MatSeries",
    "Poly",
    "PolyRing",
    "SeriesError",
    "StrictTuple",
    "TauResult",
    "build_a",
    "build_algebra",
    "build_d",
    "check_antisymmetry",
    "enumerate_strict_tuples",
    "fredholm_pfaffian_truncated",
    "minor_tables",
    "pfaffian",
    "pfaffian_tau",
    "shift_matrix",
    "square_check",
    "widom_tau",
]
