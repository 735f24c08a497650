"""Exception types shared across the package."""


class PencilError(Exception):
    """Base class for every error raised by pencilscope."""


class SingularMatrix(PencilError):
    """A pivot fell below the singularity floor during LU factorization."""


class AtSpectrum(PencilError):
    """``lambda*B - A`` is singular, so ``lambda`` is in the spectrum."""

    def __init__(self, lam, message=None):
        self.lam = lam
        super().__init__(message or f"lambda={lam!r} lies in the spectrum of the pencil")


class SingularB(PencilError):
    """B is singular; eigenvalues must be located from a grid instead."""


class OutsideRadius(PencilError):
    """The requested point is outside the Neumann series convergence disk."""


class AtPivotSpectrum(PencilError):
    """The pivot block of a Frobenius-Schur factorization is singular at lambda."""


class SchurSingular(PencilError):
    """The Schur complement pencil is singular at lambda (so lambda is in the spectrum)."""


class LevelTooLarge(PencilError):
    """Requested pseudospectral level exceeds the supported cap."""


class PowerOverflow(PencilError, OverflowError):
    """A scaled square still overflowed the floating point range."""


class GridMismatch(PencilError):
    """Two sampled functions do not share the same uniform grid."""


class ParseError(PencilError):
    """Malformed input file; ``line`` is 1-based."""

    def __init__(self, message, line=None, path=None):
        self.message = message
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
