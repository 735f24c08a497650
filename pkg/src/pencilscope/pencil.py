"""Matrix pencils ``lambda*B - A`` and their (n, eps)-pseudospectral quantities.

The central quantity is the level-``n`` resolvent norm

    r_n(lambda) = ||(lambda*B - A)^(-2^n)||_2^(1/2^n)

and a point belongs to the (n, eps)-pseudospectrum when it is a spectral point
or ``r_n(lambda) >= 1/eps`` (closed condition).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AtSpectrum, OutsideRadius, ParseError, SingularB, SingularMatrix
from .linalg import (
    _check_level,
    adjoint,
    as_cmatrix,
    format_matrix,
    lu_factor,
    lu_solve,
    read_matrix_block,
    scaled_square_power,
    significant_lines,
    spectral_norm,
)


@dataclass(frozen=True)
class Pencil:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = as_cmatrix(self.A, "A")
        B = as_cmatrix(self.B, "B")
        if A.shape[0] != A.shape[1] or B.shape != A.shape:
            raise ValueError(f"A and B must be square of equal size, got {A.shape} and {B.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def matrix(self, lam: complex) -> np.ndarray:
        return lam * self.B - self.A

    def adjoint(self) -> "Pencil":
        return Pencil(adjoint(self.A), adjoint(self.B))

    @classmethod
    def standard(cls, A) -> "Pencil":
        A = as_cmatrix(A, "A")
        return cls(A, np.eye(A.shape[0]))


@dataclass(frozen=True)
class Witness:
    """Rank-one perturbation ``E = w u^H`` with ``[(lambda B - A)^(2^n) - E] u = 0``."""

    E: np.ndarray
    u: np.ndarray
    defect: float
    norm_E: float
    lam: complex
    n: int


def resolvent_matrix(p: Pencil, lam: complex) -> np.ndarray:
    M = p.matrix(lam)
    f = lu_factor(M)
    if f.singular:
        raise AtSpectrum(lam)
    return lu_solve(M, np.eye(p.dim, dtype=np.complex128), factors=f)


def log_resolvent_norms(p: Pencil, lams: Sequence[complex], n: int) -> np.ndarray:
    """Natural log of ``r_n`` at each point; ``+inf`` where the pencil is singular.

    This is the only code path that evaluates ``r_n``; the scalar and grid
    entry points both call it so they agree bit for bit.
    """
    _check_level(n)
    lams = np.atleast_1d(np.asarray(lams, dtype=np.complex128))
    out = np.full(lams.shape[0], np.inf)
    eye = np.eye(p.dim, dtype=np.complex128)
    inverses = []
    keep = []
    for idx, lam in enumerate(lams):
        M = lam * p.B - p.A
        f = lu_factor(M)
        if f.singular:
            continue
        inverses.append(lu_solve(M, eye, factors=f))
        keep.append(idx)
    if keep:
        logs = scaled_square_power(np.stack(inverses), n)
        out[np.asarray(keep)] = np.asarray(logs) / 2.0 ** n
    return out


def pseudo_resolvent_norm(p: Pencil, lam: complex, n: int = 0) -> float:
    """``r_n(lambda)``, or ``math.inf`` at a spectral point."""
    log_r = float(log_resolvent_norms(p, [lam], n)[0])
    if math.isinf(log_r):
        return math.inf
    return math.exp(min(log_r, 709.0))


def in_pseudospectrum(p: Pencil, lam: complex, eps: float, n: int = 0) -> bool:
    if eps <= 0:
        raise ValueError("eps must be positive")
    return pseudo_resolvent_norm(p, lam, n) >= 1.0 / eps


def resolvent_derivative(p: Pencil, lam: complex) -> np.ndarray:
    R = resolvent_matrix(p, lam)
    return -R @ p.B @ R


def neumann_series_resolvent(
    p: Pencil,
    lam0: complex,
    lam: complex,
    tol: float = 1e-12,
    max_terms: int = 100_000,
    alternating: bool = True,
) -> np.ndarray:
    """Resolvent at ``lam`` from a power series around ``lam0``.

    Uses ``R(lam) = R(lam0) * sum_m (lam0 - lam)^m [B R(lam0)]^m``; note the
    alternating sign. ``alternating=False`` drops the sign and sums
    ``(lam - lam0)^m [B R(lam0)]^m``, which converges to
    ``R(2*lam0 - lam)`` rather than ``R(lam)``; it exists for comparison only.

    Summation stops once the geometric tail bound falls below ``tol``.
    """
    R0 = resolvent_matrix(p, lam0)
    K = p.B @ R0
    k_norm = spectral_norm(K)
    delta = lam - lam0
    q = abs(delta) * k_norm
    if q >= 1.0:
        radius = math.inf if k_norm == 0 else 1.0 / k_norm
        raise OutsideRadius(f"|lam - lam0| = {abs(delta):.6g} >= radius {radius:.6g}")
    step = (-delta if alternating else delta) * K
    term = R0
    total = R0.copy()
    for _ in range(max_terms):
        tail = np.linalg.norm(term) * q / (1.0 - q)
        if tail < tol:
            break
        term = term @ step
        total = total + term
    return total


def _power_direction(R: np.ndarray, n: int):
    """``(Y, log c)`` with ``R^(2^n) = c Y`` and ``||Y||_F = 1``."""
    s = float(np.linalg.norm(R))
    Y = R / s
    log_c = math.log(s)
    for _ in range(n):
        Y = Y @ Y
        t = float(np.linalg.norm(Y))
        Y = Y / t
        log_c = 2.0 * log_c + math.log(t)
    return Y, log_c


def perturbation_witness(p: Pencil, lam: complex, n: int = 0) -> Witness:
    """Rank-one ``E`` that makes ``lam`` an eigenvalue of ``(lam B - A)^(2^n) - E``.

    ``u`` is the normalized image of the dominant right singular vector ``x``
    of ``(lam B - A)^(-2^n)`` and ``E = w u^H`` with ``w = (lam B - A)^(2^n) u``,
    so ``||E|| = (1/r_n(lam))^(2^n)``. ``w`` is evaluated as ``x / ||R^k x||``
    (the same vector, exactly) because applying ``lam B - A`` k times cancels
    badly far from the spectrum. ``defect`` is ``||(lam B - A)^k u - w||``
    relative to ``||lam B - A||^k``.
    """
    _check_level(n)
    R = resolvent_matrix(p, lam)
    Y, log_c = _power_direction(R, n)
    _, _, vh = np.linalg.svd(Y)
    x = vh[0].conj()
    v = Y @ x
    nv = float(np.linalg.norm(v))
    u = v / nv
    w = x * (math.exp(-log_c) / nv)
    M = p.matrix(lam)
    direct = u.copy()
    for _ in range(2 ** n):
        direct = M @ direct
    scale = spectral_norm(M) ** (2 ** n)
    defect = float(np.linalg.norm(direct - w) / scale) if scale > 0 else 0.0
    E = np.outer(w, u.conj())
    return Witness(E, u, defect, float(np.linalg.norm(w) * np.linalg.norm(u)), lam, n)


def eigenvalues(p: Pencil) -> np.ndarray:
    """Generalized eigenvalues via the eigenvalues of ``B^-1 A``.

    Raises :class:`SingularB` when B fails the pivot floor; use
    :func:`refine_eigenvalue` from grid seeds in that case.
    """
    fB = lu_factor(p.B)
    if fB.singular:
        raise SingularB("B is singular; locate eigenvalues from a grid instead")
    C = lu_solve(p.B, p.A, factors=fB)
    mu = np.linalg.eigvals(C)
    order = np.lexsort((mu.imag, mu.real))
    return mu[order]


def refine_eigenvalue(p: Pencil, seed: complex, max_iter: int = 60, tol: float = 1e-13) -> complex:
    """Shifted inverse iteration with a moving shift, started at ``seed``.

    If ``(mu B - A) y = B x`` and ``x`` is close to an eigenvector for
    ``lambda``, then ``y ~ x / (mu - lambda)``, giving the update
    ``mu <- mu - 1/(x^H y)``.
    """
    d = p.dim
    x = np.ones(d, dtype=np.complex128) / math.sqrt(d)
    mu = complex(seed)
    for _ in range(max_iter):
        try:
            y = lu_solve(p.matrix(mu), p.B @ x)
        except SingularMatrix:
            return mu
        ny = np.linalg.norm(y)
        if ny == 0:
            break
        proj = np.vdot(x, y)
        x = y / ny
        if proj == 0:
            continue
        new = mu - 1.0 / proj
        if abs(new - mu) <= tol * (1.0 + abs(mu)):
            return complex(new)
        mu = complex(new)
    return mu


# --- CPENCIL v1 ----------------------------------------------------------

def format_pencil(p: Pencil) -> str:
    return f"pencil {p.dim}\n" + format_matrix(p.A) + format_matrix(p.B)


def parse_pencil(text: str, path=None) -> Pencil:
    lines = significant_lines(text)
    try:
        if not lines:
            raise ParseError("empty pencil file", 1)
        head = lines[0].split()
        if len(head) != 2 or head[0] != "pencil":
            raise ParseError(f"expected header 'pencil dim', got {lines[0]!r}", 1)
        try:
            dim = int(head[1])
        except ValueError:
            raise ParseError(f"bad dimension {head[1]!r}", 1) from None
        A, nxt = read_matrix_block(lines, 1)
        B, nxt = read_matrix_block(lines, nxt)
        if nxt != len(lines):
            raise ParseError("trailing content after pencil", nxt + 1)
        if A.shape != (dim, dim) or B.shape != (dim, dim):
            raise ParseError(f"header says dim {dim} but blocks are {A.shape} and {B.shape}", 1)
    except ParseError as exc:
        raise ParseError(exc.message, exc.line, path) from None
    return Pencil(A, B)


def write_pencil(path, p: Pencil) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_pencil(p))


def read_pencil(path) -> Pencil:
    with open(path, encoding="utf-8") as fh:
        return parse_pencil(fh.read(), path=path)
