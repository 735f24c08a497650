"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; :func:`as_cmatrix`
is the single entry point that validates shape and finiteness.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ParseError, PowerOverflow, SingularMatrix, LevelTooLarge

PIVOT_FLOOR = 1e-14
LOG_FLOOR = 1e-300
MAX_LEVEL = 20


def as_cmatrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-D complex128 array (copied)."""
    arr = np.array(M, dtype=np.complex128, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _require_square(M: np.ndarray, name: str = "matrix") -> None:
    if M.shape[-1] != M.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")


def adjoint(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


@dataclass(frozen=True)
class LuFactors:
    """Partial-pivot LU: ``M[permutation] == L @ U`` with L unit lower."""

    lower_upper: np.ndarray
    singular: bool
    min_pivot: float
    scale: float
    piv: np.ndarray  # LAPACK swap form

    @property
    def permutation(self) -> np.ndarray:
        perm = np.arange(self.piv.shape[0])
        for i, j in enumerate(self.piv):
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    @property
    def lower(self) -> np.ndarray:
        return np.tril(self.lower_upper, -1) + np.eye(self.lower_upper.shape[0])

    @property
    def upper(self) -> np.ndarray:
        return np.triu(self.lower_upper)


@functools.lru_cache(maxsize=None)
def _lapack():
    # deferred: scipy.linalg dominates start-up time for commands that never factor
    from scipy.linalg import lapack
    return lapack


def lu_factor(M) -> LuFactors:
    """Factor a square matrix and flag pivots below ``1e-14 * max|entry|``.

    A zero matrix is always flagged singular.
    """
    M = np.asarray(M, dtype=np.complex128)
    _require_square(M)
    scale = float(np.abs(M).max()) if M.size else 0.0
    # getrf reports exact zero pivots through info; the floor test below covers them
    lu, piv, _ = _lapack().zgetrf(M)
    min_pivot = float(np.abs(np.diagonal(lu)).min())
    singular = scale == 0.0 or min_pivot <= PIVOT_FLOOR * scale
    return LuFactors(lu, singular, min_pivot, scale, piv)


def lu_solve(M, rhs, factors: LuFactors | None = None) -> np.ndarray:
    """Solve ``M X = rhs``; raises :class:`SingularMatrix` on a tiny pivot."""
    rhs = np.asarray(rhs, dtype=np.complex128)
    n = factors.lower_upper.shape[0] if factors is not None else np.shape(M)[0]
    if rhs.shape[0] != n:
        raise ValueError(f"rhs has {rhs.shape[0]} rows, matrix has {n}")
    f = factors if factors is not None else lu_factor(M)
    if f.singular:
        raise SingularMatrix(
            f"pivot {f.min_pivot:.3e} below floor {PIVOT_FLOOR:.0e} * {f.scale:.3e}"
        )
    x, info = _lapack().zgetrs(f.lower_upper, f.piv, rhs)
    if info != 0:
        raise ValueError(f"getrs failed with info={info}")
    return x


def inverse(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.complex128)
    _require_square(M)
    return lu_solve(M, np.eye(M.shape[0], dtype=np.complex128))


def extreme_singular_values(M) -> Tuple[float, float]:
    """Return ``(sigma_max, sigma_min)``.

    For a rectangular matrix only ``sigma_max`` is meaningful and ``sigma_min``
    is returned as NaN.
    """
    M = np.asarray(M, dtype=np.complex128)
    s = np.linalg.svd(M, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    if M.shape[0] != M.shape[1]:
        return smax, math.nan
    return smax, float(s[-1])


def spectral_norm(M) -> float:
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if M.ndim != 2:
        return float(np.linalg.norm(M, 2))
    # svd directly: np.linalg.norm(ord=2) adds noticeable per-call overhead on small blocks
    return float(np.linalg.svd(M, compute_uv=False)[0])


def _check_level(n: int, cap: int = MAX_LEVEL) -> None:
    if n < 0 or int(n) != n:
        raise ValueError(f"level must be a non-negative integer, got {n!r}")
    if n > cap:
        raise LevelTooLarge(f"level n={n} exceeds cap {cap}")


def scaled_square_power(X, n: int, cap: int = MAX_LEVEL) -> np.ndarray | float:
    """Natural log of ``||X^(2^n)||_2`` by ``n`` rescaled squarings.

    ``X`` may be a single matrix or a stack ``(..., d, d)``. Each iterate is
    divided by its Frobenius norm ``s_k`` so that
    ``X^(2^n) = s_0^(2^n) * prod_k s_k^(2^(n-k)) * X_n``; the logarithm is
    accumulated term by term and never exponentiated.
    """
    _check_level(n, cap)
    X = np.asarray(X, dtype=np.complex128)
    _require_square(X)
    single = X.ndim == 2
    if single:
        X = X[None]
    log_acc = np.zeros(X.shape[0])
    weight = float(2 ** n)
    s0 = np.linalg.norm(X, axis=(-2, -1))
    if not np.all(np.isfinite(s0)):
        raise PowerOverflow("Frobenius norm of the input is not finite")
    s0 = np.maximum(s0, LOG_FLOOR)
    Y = X / s0[:, None, None]
    log_acc += weight * np.log(s0)
    for k in range(1, n + 1):
        Y = Y @ Y
        sk = np.linalg.norm(Y, axis=(-2, -1))
        if not np.all(np.isfinite(sk)):
            raise PowerOverflow(f"scaled square {k} of {n} is not finite")
        sk = np.maximum(sk, LOG_FLOOR)
        Y = Y / sk[:, None, None]
        log_acc += 2.0 ** (n - k) * np.log(sk)
    last = np.linalg.norm(Y, 2, axis=(-2, -1))
    out = log_acc + np.log(np.maximum(last, LOG_FLOOR))
    return float(out[0]) if single else out


# --- CPENCIL-MAT v1 text format -------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % x


def format_matrix(M) -> str:
    M = np.asarray(M, dtype=np.complex128)
    rows, cols = M.shape
    lines = [f"{rows} {cols}"]
    for i in range(rows):
        lines.append(" ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in M[i]))
    return "\n".join(lines) + "\n"


def _parse_int_pair(text: str, lineno: int, what: str) -> Tuple[int, int]:
    parts = text.split()
    if len(parts) != 2:
        raise ParseError(f"expected '{what}' with two integers, got {text!r}", lineno)
    try:
        a, b = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"non-integer in {what}: {text!r}", lineno) from None
    if a < 1 or b < 1:
        raise ParseError(f"{what} must be positive: {text!r}", lineno)
    return a, b


def read_matrix_block(lines: Sequence[str], start: int = 0) -> Tuple[np.ndarray, int]:
    """Parse one matrix starting at ``lines[start]``; return it and the next index."""
    if start >= len(lines):
        raise ParseError("unexpected end of input, expected 'rows cols'", start + 1)
    rows, cols = _parse_int_pair(lines[start], start + 1, "rows cols")
    M = np.empty((rows, cols), dtype=np.complex128)
    for i in range(rows):
        idx = start + 1 + i
        if idx >= len(lines):
            raise ParseError(f"unexpected end of input, expected row {i + 1} of {rows}", idx + 1)
        parts = lines[idx].split()
        if len(parts) != 2 * cols:
            raise ParseError(f"expected {2 * cols} numbers, got {len(parts)}", idx + 1)
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ParseError(f"bad number in row: {lines[idx]!r}", idx + 1) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite entry", idx + 1)
        M.real[i] = vals[0::2]
        M.imag[i] = vals[1::2]
    return M, start + 1 + rows


def significant_lines(text: str) -> List[str]:
    """Split text into lines keeping positions (blank trailing lines dropped)."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    return lines


def parse_matrix(text: str) -> np.ndarray:
    lines = significant_lines(text)
    M, end = read_matrix_block(lines, 0)
    if end != len(lines):
        raise ParseError("trailing content after matrix", end + 1)
    return M


def write_matrix(path, M) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(M))


def read_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_matrix(text)
    except ParseError as exc:
        raise ParseError(exc.message, exc.line, path) from None
