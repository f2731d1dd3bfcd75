"""Fuglede-Kadison determinants of group-ring elements, computed several ways."""

from .determinant_lab import (
    EstimateReport,
    Step,
    certify_positive,
    foelner_logdet,
    lattice_index,
    lattice_index_sequence,
    lueck_trace,
    trace_series_logdet,
)
from .expansive import Route, certify_expansive, expansiveness_constant, neumann_inverse
from .finite_entropy import INFINITE, finite_entropy, finite_logdet_eigen
from .group_core import (
    FoelnerSet,
    GeneratingSet,
    GroupKind,
    GroupSpec,
    ball,
    box,
    foelner_defect,
    growth_series,
    load_cayley_table,
    multiply,
)
from .group_ring import (
    CoeffKind,
    GroupRingElement,
    build_l1_unit,
    convolve,
    l1_norm,
    make_positive,
    star,
    trace_e,
)
from .mahler import TorusGrid, jensen_1d, mahler_quadrature, nonvanishing_certificate
from .snf import elementary_divisors, snf
from .truncation import TruncatedMatrix, assemble, spectral_bounds_check

__version__ = "0.1.0"
