"""Finite-dimensional workbench for refined analytic torsion on manifolds with boundary.

Submodules
----------
linalg_core      spectral projectors, Agmon-cut log determinants, ranks
symbols          exterior-algebra symbols and the well-posedness test
boundary_model   boundary form spaces, projections and Lagrangian data
cylinder_heat    cylinder heat traces and zeta(0) values from boundary spectra
graded_complex   chirality complexes, signature operator, windows, sector bounds
det_line         determinant lines, chirality element and fusion map
zeta_eta         eta invariant, graded determinants, torsion reports
twisted_cochain  simplicial cochains with flat coefficients
schemas          JSON documents
cli              the ``torsionlab`` command
"""

__version__ = "0.1.0"

from .graded_complex import GradedChainComplex, signature_operator, validate  # noqa: E402
from .det_line import DetLineElement, refined_torsion_element  # noqa: E402
from .zeta_eta import TorsionReport, rho_element, torsion_report  # noqa: E402

__all__ = [
    "__version__",
    "GradedChainComplex",
    "signature_operator",
    "validate",
    "DetLineElement",
    "refined_torsion_element",
    "TorsionReport",
    "rho_element",
    "torsion_report",
]
