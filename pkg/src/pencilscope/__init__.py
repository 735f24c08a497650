"""Spectra and (n, eps)-pseudospectra of matrix pencils ``lambda*B - A``."""
from .errors import (
    AtPivotSpectrum,
    AtSpectrum,
    GridMismatch,
    LevelTooLarge,
    OutsideRadius,
    ParseError,
    PencilError,
    PowerOverflow,
    SchurSingular,
    SingularB,
    SingularMatrix,
)
from .pencil import (
    Pencil,
    Witness,
    eigenvalues,
    in_pseudospectrum,
    neumann_series_resolvent,
    perturbation_witness,
    pseudo_resolvent_norm,
    resolvent_derivative,
    resolvent_matrix,
)
from .blockpencil import BlockPencil, assemble
from .pseudogrid import Field, GridSpec, evaluate_field, extract_contours, locate_minima

__all__ = [
    "AtPivotSpectrum", "AtSpectrum", "GridMismatch", "LevelTooLarge", "OutsideRadius", "ParseError",
    "PencilError", "PowerOverflow", "SchurSingular", "SingularB", "SingularMatrix",
    "Pencil", "Witness", "eigenvalues", "in_pseudospectrum", "neumann_series_resolvent",
    "perturbation_witness", "pseudo_resolvent_norm", "resolvent_derivative", "resolvent_matrix",
    "BlockPencil", "assemble", "Field", "GridSpec", "evaluate_field", "extract_contours", "locate_minima",
]
__version__ = "0.1.0"
