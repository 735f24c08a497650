"""The 1-D heat equation on [0, d] with phi(0) = 0 and phi_x(d) = 0.

Writing ``psi = (phi, phi_x)`` turns separated solutions ``exp(lambda t) psi(x)``
into the block pencil

    A = [[c^2 d^2/dx^2, 0], [0, 0]],   B = [[I, 0], [d/dx, -I]],

with ``psi_1(0) = psi_2(d) = 0``. Its eigenvalues are
``lambda_n = -c^2 (n + 1/2)^2 (pi/d)^2``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .blockpencil import BlockPencil
from .errors import AtPivotSpectrum, GridMismatch
from .linalg import lu_factor, lu_solve, spectral_norm


@dataclass(frozen=True)
class HeatParams:
    c: float = 1.0
    d: float = math.pi

    def __post_init__(self):
        if not (self.c > 0 and self.d > 0):
            raise ValueError(f"c and d must be positive, got c={self.c}, d={self.d}")


@dataclass(frozen=True)
class FtcsParams:
    """Explicit scheme parameters; ``a = c^2 dt / dx^2`` with ``dx = d/m``."""

    m: int
    delta_t: float
    delta_x: float
    a: float
    c: float = 1.0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be at least 2")

    @classmethod
    def from_a(cls, m: int, a: float, hp: HeatParams = HeatParams()) -> "FtcsParams":
        dx = hp.d / m
        return cls(m, a * dx * dx / (hp.c * hp.c), dx, float(a), hp.c)

    @classmethod
    def from_dt(cls, m: int, dt: float, hp: HeatParams = HeatParams()) -> "FtcsParams":
        dx = hp.d / m
        return cls(m, float(dt), dx, hp.c * hp.c * dt / (dx * dx), hp.c)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.m + 1) * self.delta_x

    @property
    def unstable(self) -> bool:
        return self.a > 0.5


def heat_eigenvalues(hp: HeatParams, count: int) -> List[float]:
    k = np.arange(count)
    return list(-(hp.c ** 2) * (k + 0.5) ** 2 * (math.pi / hp.d) ** 2)


def heat_eigenfunction(hp: HeatParams, n: int, xs) -> Tuple[np.ndarray, np.ndarray]:
    """``(sinh(sqrt(l) x / c), sqrt(l)/c cosh(sqrt(l) x / c))`` at ``l = lambda_n``.

    ``sqrt`` is the principal branch, so ``sqrt(lambda_n)`` is purely imaginary.
    """
    lam = heat_eigenvalues(hp, n + 1)[n]
    s = cmath.sqrt(complex(lam))
    z = s * np.asarray(xs, dtype=np.complex128) / hp.c
    return np.sinh(z), (s / hp.c) * np.cosh(z)


# --- discretized pencil ---------------------------------------------------

def heat_grid(hp: HeatParams, m: int) -> Tuple[np.ndarray, float]:
    """Unknown locations ``x_i = i h`` (i = 1..m) and the spacing ``h``.

    ``h = d / (m + 1/2)`` places the Neumann wall midway between ``x_m`` and
    the mirror node ``x_{m+1}``; the Dirichlet node ``x_0 = 0`` is eliminated.
    """
    h = hp.d / (m + 0.5)
    return np.arange(1, m + 1) * h, h


def second_difference(hp: HeatParams, m: int) -> np.ndarray:
    """Symmetric ``d^2/dx^2``: Dirichlet at 0, one-sided ``psi_{m+1} = psi_m`` at d."""
    _, h = heat_grid(hp, m)
    D2 = (np.diag(np.full(m, -2.0)) + np.diag(np.ones(m - 1), 1) + np.diag(np.ones(m - 1), -1))
    D2[-1, -1] = -1.0
    return D2 / (h * h)


def first_difference(hp: HeatParams, m: int) -> np.ndarray:
    """Centered ``d/dx`` with ``psi_0 = 0``; backward one-sided in the last row."""
    _, h = heat_grid(hp, m)
    D1 = (np.diag(np.ones(m - 1), 1) - np.diag(np.ones(m - 1), -1)) / (2 * h)
    D1[-1, :] = 0.0
    D1[-1, -1] = 1.0 / h
    D1[-1, -2] = -1.0 / h
    return D1


def heat_pencil_matrices(hp: HeatParams, m: int) -> BlockPencil:
    if m < 3:
        raise ValueError("m must be at least 3")
    I = np.eye(m)
    Z = np.zeros((m, m))
    D2 = second_difference(hp, m)
    D1 = first_difference(hp, m)
    return BlockPencil(hp.c ** 2 * D2, Z, Z, Z, I, Z, D1, -I)


# --- Green's function resolvent -------------------------------------------

@dataclass
class GreenResult:
    x: np.ndarray
    u: np.ndarray
    quadrature: str
    branch_cut: bool


# integral over [x1, x2] from samples at x0, x1, x2
_LAST_INTERVAL = np.array([-1.0, 8.0, 5.0]) / 12.0


def _weights(npts: int, h: float, rule: str) -> np.ndarray:
    """Quadrature weights on ``npts`` equispaced samples."""
    w = np.zeros(npts)
    intervals = npts - 1
    if intervals == 0:
        return w
    if rule == "trapezoid" or intervals == 1:
        w[:] = h
        w[0] = w[-1] = h / 2
        return w
    if intervals % 2 == 0:
        w[0:-1:2] += h / 3
        w[1::2] += 4 * h / 3
        w[2::2] += h / 3
        return w
    # odd: Simpson on all but the last three intervals, 3/8 rule on those
    head = npts - 3
    if head > 1:
        w[:head] = _weights(head, h, "simpson")
    w[head - 1:] += np.array([3, 9, 9, 3]) * h * 3 / 8 / 3
    return w


def green_resolvent_apply(hp: HeatParams, lam: complex, f_samples, quadrature: str = "simpson") -> GreenResult:
    """Apply ``u(x) = 1/(2 s c) int_x^d (e^{s(x-t)/c} - e^{-s(x-t)/c}) f(t) dt``, ``s = sqrt(lam)``.

    ``f_samples`` are values on a uniform grid over ``[0, d]`` (endpoints
    included). The kernel satisfies ``lam u - c^2 u'' = f`` with
    ``u(d) = u'(d) = 0``.
    """
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if quadrature not in ("simpson", "trapezoid"):
        raise ValueError(f"unknown quadrature {quadrature!r}")
    f = np.asarray(f_samples, dtype=np.complex128)
    npts = f.shape[0]
    if npts < 2:
        raise ValueError("need at least two samples")
    x = np.linspace(0.0, hp.d, npts)
    h = x[1] - x[0]
    lam = complex(lam)
    s = cmath.sqrt(lam)
    branch = lam.imag == 0 and lam.real < 0
    u = np.zeros(npts, dtype=np.complex128)
    for i in range(npts - 1):
        # a lone last interval borrows the sample to its left so Simpson mode stays third order
        lo = i - 1 if (quadrature == "simpson" and i == npts - 2 and i > 0) else i
        t = x[lo:]
        arg = s * (x[i] - t) / hp.c
        kern = np.exp(arg) - np.exp(-arg)
        w = _LAST_INTERVAL * h if lo < i else _weights(npts - i, h, quadrature)
        u[i] = np.dot(w, kern * f[lo:]) / (2 * s * hp.c)
    return GreenResult(x, u, quadrature, branch)


def right_end_discrete_resolvent(hp: HeatParams, lam: complex, f_samples) -> np.ndarray:
    """Solve ``lam u - c^2 u'' = f`` on a uniform grid with ``u(d) = u'(d) = 0``.

    Centered differences in the interior; ``u'(d) = 0`` uses the mirror
    value ``u_{N+1} = u_{N-1}`` in the equation at ``x_N``. Second order.
    """
    f = np.asarray(f_samples, dtype=np.complex128)
    N = f.shape[0] - 1
    if N < 2:
        raise ValueError("need at least three samples")
    h = hp.d / N
    k = hp.c ** 2 / (h * h)
    M = np.zeros((N + 1, N + 1), dtype=np.complex128)
    rhs = np.zeros(N + 1, dtype=np.complex128)
    # row 0 carries the mirrored equation at x_N, row 1 the condition u_N = 0
    M[0, N - 1] = -2.0 * k
    rhs[0] = f[N]
    M[1, N] = 1.0
    for i in range(1, N):
        M[i + 1, i - 1] = -k
        M[i + 1, i] = lam + 2.0 * k
        M[i + 1, i + 1] = -k
        rhs[i + 1] = f[i]
    return lu_solve(M, rhs)


# --- enclosure radius -----------------------------------------------------

@dataclass(frozen=True)
class HeatDelta:
    """``delta1 = |l| ||D1 (l I - c^2 D2)^-1||`` plus the split-form cross check.

    ``split`` is ``|l|/(2c) ||(sI - cD1)^-1 - (sI + cD1)^-1||`` with
    ``s = sqrt(l)``. It equals ``shared = |l| ||D1 (l I - c^2 D1^2)^-1||``
    exactly, i.e. on the discretization whose second derivative is ``D1^2``.
    ``split_plus`` uses ``+`` between the two inverses instead.
    """

    delta1: float
    shared: float
    split: float
    split_plus: float


def enclosure_delta1(hp: HeatParams, m: int, lam: complex) -> HeatDelta:
    lam = complex(lam)
    D1 = first_difference(hp, m)
    D2 = second_difference(hp, m)
    I = np.eye(m)
    P = lam * I - hp.c ** 2 * D2
    f = lu_factor(P)
    if f.singular:
        raise AtPivotSpectrum(f"lambda={lam!r} is an eigenvalue of c^2 D2")
    delta1 = abs(lam) * spectral_norm(D1 @ lu_solve(P, I, factors=f))
    s = cmath.sqrt(lam)
    Kp = lu_solve(s * I - hp.c * D1, I)
    Km = lu_solve(s * I + hp.c * D1, I)
    scale = abs(lam) / (2 * hp.c)
    shared = abs(lam) * spectral_norm(D1 @ lu_solve(lam * I - hp.c ** 2 * (D1 @ D1), I))
    return HeatDelta(delta1, shared, scale * spectral_norm(Kp - Km), scale * spectral_norm(Kp + Km))


def enclosure_set(hp: HeatParams, m: int, include_zero: bool = True) -> np.ndarray:
    """Centers of the enclosure disks: ``c^2 sigma(D2)``, optionally with 0.

    The assembled pencil has ``S2 = 0`` and ``B4 = -I``, so 0 is one of its
    eigenvalues and must be a center for the enclosure to hold near the origin.
    """
    ev = np.linalg.eigvalsh(hp.c ** 2 * second_difference(hp, m))
    return np.concatenate([ev, [0.0]]) if include_zero else ev


@dataclass
class HeatEnclosureReport:
    m: int
    epsilons: List[float]
    sup_radius: bool
    include_zero: bool
    members: dict
    violations: dict
    skipped: int
    worst: dict  # eps -> max(distance - radius) over members

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "epsilons": self.epsilons,
            "sup_radius": self.sup_radius,
            "include_zero": self.include_zero,
            "members": self.members,
            "violations": self.violations,
            "skipped": self.skipped,
            "worst_gap": {k: (None if math.isinf(v) else v) for k, v in self.worst.items()},
        }


def heat_enclosure_check(
    hp: HeatParams,
    m: int,
    field,
    epsilons: Sequence[float],
    sup_radius: bool = False,
    include_zero: bool = True,
) -> HeatEnclosureReport:
    """Count field points with ``r_0 >= 1/eps`` farther than ``eps (1 + delta1)`` from the centers.

    ``field`` is a level-0 :class:`~pencilscope.pseudogrid.Field` of the
    assembled heat pencil. Points where ``lambda I - c^2 D2`` is singular are
    skipped. With ``sup_radius`` the largest ``delta1`` among member points
    replaces the pointwise value.
    """
    centers = enclosure_set(hp, m, include_zero)
    eps_list = [float(e) for e in epsilons]
    cutoff = -math.log10(max(eps_list))
    rows = []
    skipped = 0
    for z, v in zip(field.grid.points().ravel(), field.values.ravel()):
        if v < cutoff:
            continue
        z = complex(z)
        try:
            d1 = enclosure_delta1(hp, m, z).delta1
        except AtPivotSpectrum:
            skipped += 1
            continue
        rows.append((z, float(v), float(np.min(np.abs(centers - z))), d1))
    if sup_radius and rows:
        top = max(r[3] for r in rows)
        rows = [(z, v, dist, top) for z, v, dist, _ in rows]
    members = {str(e): 0 for e in eps_list}
    violations = {str(e): 0 for e in eps_list}
    worst = {str(e): -math.inf for e in eps_list}
    for z, v, dist, d1 in rows:
        for eps in eps_list:
            if v < -math.log10(eps):
                continue
            key = str(eps)
            members[key] += 1
            gap = dist - eps * (1 + d1)
            worst[key] = max(worst[key], gap)
            if gap > 1e-12 * (1 + abs(z)):
                violations[key] += 1
    return HeatEnclosureReport(m, eps_list, sup_radius, include_zero, members, violations, skipped, worst)


# --- FTCS -----------------------------------------------------------------

def ftcs_matrix(fp: FtcsParams) -> np.ndarray:
    """The (m+1)x(m+1) update/constraint matrix: ``e_0``, rows ``(a, 1-2a, a)``, last ``(-1, 1)``."""
    m, a = fp.m, fp.a
    T = np.zeros((m + 1, m + 1))
    T[0, 0] = 1.0
    for i in range(1, m):
        T[i, i - 1] = a
        T[i, i] = 1.0 - 2.0 * a
        T[i, i + 1] = a
    T[m, m - 1] = -1.0
    T[m, m] = 1.0
    return T


@dataclass
class Simulation:
    params: FtcsParams
    states: np.ndarray  # (steps + 1, m + 1)

    @property
    def unstable(self) -> bool:
        return self.params.unstable


def simulate_ftcs(fp: FtcsParams, initial, steps: int) -> Simulation:
    """Interior FTCS update, then ``phi_0 = 0`` and ``phi_m = phi_{m-1}`` each step."""
    u = np.asarray(initial, dtype=float).copy()
    if u.shape != (fp.m + 1,):
        raise ValueError(f"initial state must have {fp.m + 1} entries, got {u.shape}")
    if u[0] != 0.0:
        raise ValueError("initial state must satisfy phi_0 = 0")
    if steps < 1:
        raise ValueError("steps must be positive")
    out = np.empty((steps + 1, fp.m + 1))
    out[0] = u
    a = fp.a
    for j in range(1, steps + 1):
        nxt = u.copy()
        nxt[1:-1] = u[1:-1] + a * (u[2:] - 2.0 * u[1:-1] + u[:-2])
        nxt[0] = 0.0
        nxt[-1] = nxt[-2]
        out[j] = nxt
        u = nxt
    return Simulation(fp, out)


def mode_initial(fp: FtcsParams, k: int, hp: HeatParams = HeatParams()) -> np.ndarray:
    """Analytic mode ``sin((k + 1/2) pi x / d)`` sampled on the FTCS grid, boundary-consistent."""
    u = np.sin((k + 0.5) * math.pi * fp.x / hp.d)
    u[0] = 0.0
    u[-1] = u[-2]
    return u


# --- fold ------------------------------------------------------------------

@dataclass
class Folded:
    """``w`` on ``[-d, 0]`` (``left``) and ``[0, d]`` (``right``); both halves include x = 0."""

    x_left: np.ndarray
    left: np.ndarray
    x_right: np.ndarray
    right: np.ndarray

    def norm(self) -> float:
        return math.sqrt(_trapezoid_sq(self.x_left, self.left) + _trapezoid_sq(self.x_right, self.right))


def _trapezoid_sq(x, v) -> float:
    y = np.abs(v) ** 2
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1])) / 2.0)


def pair_norm(x, v1, v2) -> float:
    """Trapezoid ``L2`` norm of the pair ``(v1, v2)`` on ``[0, d]``."""
    return math.sqrt(_trapezoid_sq(x, v1) + _trapezoid_sq(x, v2))


def fold_isometry(x, v1, v2) -> Folded:
    """``w(x) = (-v1(-x) + v2(-x))/sqrt2`` on ``[-d, 0]``, ``(v1(x) + v2(x))/sqrt2`` on ``[0, d]``."""
    x = np.asarray(x, dtype=float)
    v1 = np.asarray(v1)
    v2 = np.asarray(v2)
    if v1.shape != x.shape or v2.shape != x.shape or x.ndim != 1 or x.size < 2:
        raise GridMismatch(f"sample shapes differ: x{x.shape}, v1{v1.shape}, v2{v2.shape}")
    steps = np.diff(x)
    if x[0] != 0.0 or np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps.mean():
        raise GridMismatch("samples must lie on a uniform grid starting at 0")
    r2 = math.sqrt(2.0)
    left = ((-v1 + v2) / r2)[::-1]
    right = (v1 + v2) / r2
    return Folded(-x[::-1], left, x.copy(), right)
