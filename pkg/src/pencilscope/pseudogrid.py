"""Sampling ``log10 r_n`` on a rectangular grid, contouring it, and seeding eigenvalues."""
from __future__ import annotations

import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ParseError
from .pencil import Pencil, log_resolvent_norms, refine_eigenvalue

log = logging.getLogger(__name__)

THREADS_ENV = "PENCILSCOPE_THREADS"
LN10 = math.log(10.0)


@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int
    n_im: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"empty grid rectangle: {self}")
        if self.n_re < 2 or self.n_im < 2:
            raise ValueError("a grid needs at least 2 samples per axis")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``reMin:reMax:imMin:imMax:nRe:nIm``."""
        parts = text.split(":")
        if len(parts) != 6:
            raise ParseError(f"grid must be reMin:reMax:imMin:imMax:nRe:nIm, got {text!r}")
        try:
            a, b, c, d = (float(x) for x in parts[:4])
            nr, ni = int(parts[4]), int(parts[5])
        except ValueError:
            raise ParseError(f"bad number in grid spec {text!r}") from None
        try:
            return cls(a, b, c, d, nr, ni)
        except ValueError as exc:
            raise ParseError(str(exc)) from None

    def format(self) -> str:
        return f"{self.re_min:.17g}:{self.re_max:.17g}:{self.im_min:.17g}:{self.im_max:.17g}:{self.n_re}:{self.n_im}"

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.n_re)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.n_im)

    @property
    def dx(self) -> float:
        return (self.re_max - self.re_min) / (self.n_re - 1)

    @property
    def dy(self) -> float:
        return (self.im_max - self.im_min) / (self.n_im - 1)

    def points(self) -> np.ndarray:
        """Complex sample points, shape ``(n_im, n_re)`` (row = fixed imaginary part)."""
        return self.re[None, :] + 1j * self.im[:, None]

    def contains(self, z: complex, slack: float = 1e-12) -> bool:
        sx = slack * (self.re_max - self.re_min)
        sy = slack * (self.im_max - self.im_min)
        return (self.re_min - sx <= z.real <= self.re_max + sx
                and self.im_min - sy <= z.imag <= self.im_max + sy)


@dataclass
class Field:
    """``log10 r_n`` on a grid; ``+inf`` marks spectral points."""

    grid: GridSpec
    n: int
    values: np.ndarray  # (n_im, n_re)

    def finite_max(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        return float(finite.max()) if finite.size else 0.0

    def clamped(self) -> np.ndarray:
        """Values with the spectrum sentinel replaced by ``max finite + 2``."""
        v = self.values.copy()
        v[np.isinf(v)] = self.finite_max() + 2.0
        return v


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, env)
    return max(1, os.cpu_count() or 1)


def _chunk_size(dim: int) -> int:
    # keep each chunk's inverse stack around 16 MB
    return max(16, (1 << 20) // max(1, dim * dim))


def evaluate_field(p: Pencil, g: GridSpec, n: int = 0, threads: Optional[int] = None) -> Field:
    """Sample ``log10 r_n`` at every grid corner.

    Points are split into fixed chunks evaluated in a thread pool; each chunk
    writes only its own slice, so the result does not depend on scheduling.
    """
    pts = g.points().ravel()
    out = np.empty(pts.shape[0])
    size = _chunk_size(p.dim)
    bounds = [(s, min(s + size, pts.shape[0])) for s in range(0, pts.shape[0], size)]

    def work(span):
        s, e = span
        out[s:e] = log_resolvent_norms(p, pts[s:e], n) / LN10

    width = min(_thread_count(threads), len(bounds))
    if width <= 1:
        for span in bounds:
            work(span)
    else:
        with ThreadPoolExecutor(max_workers=width) as pool:
            list(pool.map(work, bounds))
    return Field(g, n, out.reshape(g.n_im, g.n_re))


def center_sampler(p: Pencil, n: int) -> Callable[[complex], float]:
    """Callback for saddle disambiguation in :func:`extract_contours`."""

    def sample(z: complex) -> float:
        return float(log_resolvent_norms(p, [z], n)[0] / LN10)

    return sample


# --- contours -------------------------------------------------------------

@dataclass
class Polyline:
    vertices: np.ndarray  # (k, 2) columns re, im
    closed: bool


@dataclass
class ContourSet:
    grid: GridSpec
    epsilons: List[float]
    polylines: Dict[float, List[Polyline]]
    empty_levels: List[float] = field(default_factory=list)

    def all_closed(self) -> List[Polyline]:
        return [pl for eps in self.epsilons for pl in self.polylines[eps] if pl.closed]

    def to_json(self) -> str:
        levels = []
        for eps in self.epsilons:
            levels.append({
                "epsilon": eps,
                "log10_level": -math.log10(eps),
                "empty": eps in self.empty_levels,
                "polylines": [
                    {"closed": pl.closed,
                     "vertices": [[float("%.17g" % x), float("%.17g" % y)] for x, y in pl.vertices]}
                    for pl in self.polylines[eps]
                ],
            })
        payload = {"grid": self.grid.format(), "levels": levels}
        return json.dumps(payload, indent=1, sort_keys=True) + "\n"


# Edge ids: ("h", j, i) joins corner (j, i)-(j, i+1); ("v", j, i) joins (j, i)-(j+1, i).
# Corners of cell (j, i), counter-clockwise: 0=(j,i) 1=(j,i+1) 2=(j+1,i+1) 3=(j+1,i).
_CELL_EDGES = (("h", 0, 0), ("v", 0, 1), ("h", 1, 0), ("v", 0, 0))  # bottom right top left
_CORNER_EDGES = ((3, 0), (0, 1), (1, 2), (2, 3))  # edges adjacent to each corner


def _cell_segments(inside: Tuple[bool, bool, bool, bool], center_inside: Callable[[], bool]):
    """Pairs of cell-edge indices (0..3) crossed by the level set."""
    crossed = [e for e in range(4) if inside[e] != inside[(e + 1) % 4]]
    if not crossed:
        return []
    if len(crossed) == 2:
        return [tuple(crossed)]
    # saddle: cut off the corners on the opposite side from the center
    cut = [c for c in range(4) if inside[c] != center_inside()]
    return [_CORNER_EDGES[c] for c in cut]


def _walk(adj: Dict, start, visited_edges: set) -> List:
    chain = [start]
    cur = start
    while True:
        nxt = None
        for nb in adj[cur]:
            key = frozenset((cur, nb))
            if key in visited_edges:
                continue
            nxt = nb
            visited_edges.add(key)
            break
        if nxt is None:
            return chain
        chain.append(nxt)
        cur = nxt
        if cur == start:
            return chain


def extract_contours(
    f: Field,
    epsilons: Sequence[float],
    center: Optional[Callable[[complex], float]] = None,
) -> ContourSet:
    """Marching squares on ``log10 r_n = -log10 eps`` for each epsilon.

    Crossing points are linearly interpolated along cell edges. Ambiguous
    (saddle) cells are resolved by the value at the cell center, taken from
    ``center`` when given and from the corner mean otherwise. A level that
    does not cross the grid is recorded in ``empty_levels``.
    """
    g = f.grid
    V = f.clamped()
    re, im = g.re, g.im
    eps_list = [float(e) for e in epsilons]
    result = ContourSet(g, eps_list, {})
    for eps in eps_list:
        if not eps > 0:
            raise ValueError("epsilons must be positive")
        level = -math.log10(eps)
        inside = V >= level

        def point(edge):
            kind, j, i = edge
            if kind == "h":
                a, b = V[j, i], V[j, i + 1]
                t = 0.5 if a == b else (level - a) / (b - a)
                return (re[i] + t * (re[i + 1] - re[i]), im[j])
            a, b = V[j, i], V[j + 1, i]
            t = 0.5 if a == b else (level - a) / (b - a)
            return (re[i], im[j] + t * (im[j + 1] - im[j]))

        adj: Dict[tuple, List[tuple]] = {}
        for j in range(g.n_im - 1):
            for i in range(g.n_re - 1):
                corners = (inside[j, i], inside[j, i + 1], inside[j + 1, i + 1], inside[j + 1, i])
                if all(corners) or not any(corners):
                    continue

                def center_inside(j=j, i=i):
                    if center is not None:
                        zc = complex(0.5 * (re[i] + re[i + 1]), 0.5 * (im[j] + im[j + 1]))
                        vc = center(zc)
                        if math.isinf(vc):
                            return True
                    else:
                        vc = 0.25 * (V[j, i] + V[j, i + 1] + V[j + 1, i + 1] + V[j + 1, i])
                    return vc >= level

                for e1, e2 in _cell_segments(corners, center_inside):
                    k1, dj1, di1 = _CELL_EDGES[e1]
                    k2, dj2, di2 = _CELL_EDGES[e2]
                    a = (k1, j + dj1, i + di1)
                    b = (k2, j + dj2, i + di2)
                    adj.setdefault(a, []).append(b)
                    adj.setdefault(b, []).append(a)

        lines: List[Polyline] = []
        visited: set = set()
        for node in sorted(n for n, nb in adj.items() if len(nb) == 1):
            if any(frozenset((node, nb)) in visited for nb in adj[node]):
                continue
            chain = _walk(adj, node, visited)
            lines.append(Polyline(np.array([point(e) for e in chain]), False))
        for node in sorted(adj):
            if all(frozenset((node, nb)) in visited for nb in adj[node]):
                continue
            chain = _walk(adj, node, visited)
            closed = len(chain) > 2 and chain[-1] == chain[0]
            verts = np.array([point(e) for e in (chain[:-1] if closed else chain)])
            if closed and _signed_area(verts) < 0:
                verts = verts[::-1]
            lines.append(Polyline(verts, closed))
        if not lines:
            log.info("level eps=%g does not intersect the grid", eps)
            result.empty_levels.append(eps)
        result.polylines[eps] = lines
    return result


def _signed_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def point_in_polygon(z: complex, verts: np.ndarray) -> bool:
    """Even-odd ray casting test for a closed polygon."""
    x, y = z.real, z.imag
    xs, ys = verts[:, 0], verts[:, 1]
    inside = False
    k = len(xs)
    for a in range(k):
        b = (a + 1) % k
        if (ys[a] > y) != (ys[b] > y):
            xc = xs[a] + (y - ys[a]) * (xs[b] - xs[a]) / (ys[b] - ys[a])
            if x < xc:
                inside = not inside
    return inside


# --- minima ---------------------------------------------------------------

def locate_minima(f: Field) -> List[complex]:
    """Interior grid points where ``r_n`` is a strict maximum over all 8 neighbors.

    Sorted by descending ``r_n``; seeds within one cell of a stronger seed are
    dropped. Boundary points are never reported.
    """
    V = f.values
    g = f.grid
    pts = g.points()
    cands = []
    for j in range(1, g.n_im - 1):
        for i in range(1, g.n_re - 1):
            c = V[j, i]
            nb = V[j - 1:j + 2, i - 1:i + 2].ravel()
            nb = np.delete(nb, 4)
            if math.isinf(c):
                if not np.any(np.isinf(nb)) or _inf_tie_winner(V, j, i):
                    cands.append((c, j, i))
            elif np.all(c > nb):
                cands.append((c, j, i))
    cands.sort(key=lambda t: (-t[0], t[1], t[2]))
    seeds: List[Tuple[int, int]] = []
    for _, j, i in cands:
        if any(abs(j - sj) <= 1 and abs(i - si) <= 1 for sj, si in seeds):
            continue
        seeds.append((j, i))
    return [complex(pts[j, i]) for j, i in seeds]


def _inf_tie_winner(V, j, i) -> bool:
    # adjacent spectral points: keep the lexicographically first of the cluster
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            if (dj, di) < (0, 0) and math.isinf(V[j + dj, i + di]):
                return False
    return True


def eigenvalues_from_grid(p: Pencil, g: GridSpec, n: int = 0, threads: Optional[int] = None) -> List[complex]:
    """Grid seeds refined by shifted inverse iteration; for singular B."""
    f = evaluate_field(p, g, n, threads)
    found: List[complex] = []
    for seed in locate_minima(f):
        mu = refine_eigenvalue(p, seed)
        if not g.contains(mu, slack=0.05):
            continue
        if all(abs(mu - other) > 1e-8 * (1 + abs(mu)) for other in found):
            found.append(mu)
    return found


# --- file formats ----------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % x


def field_to_csv(f: Field) -> str:
    buf = io.StringIO()
    buf.write("re,im,log10r\n")
    pts = f.grid.points()
    for j in range(f.grid.n_im):
        for i in range(f.grid.n_re):
            z = pts[j, i]
            v = f.values[j, i]
            buf.write(f"{_fmt(z.real)},{_fmt(z.imag)},{'inf' if math.isinf(v) else _fmt(v)}\n")
    return buf.getvalue()


def field_from_csv(text: str, n: int = 0, path=None) -> Field:
    """Read a field dump; the grid is reconstructed from the distinct coordinates."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "re,im,log10r":
        raise ParseError("expected header 're,im,log10r'", 1, path)
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected 3 columns, got {len(parts)}", k, path)
        try:
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
        except ValueError:
            raise ParseError(f"bad number in {line!r}", k, path) from None
    if not rows:
        raise ParseError("field has no samples", 2, path)
    arr = np.array(rows)
    res = np.unique(arr[:, 0])
    ims = np.unique(arr[:, 1])
    if res.size * ims.size != arr.shape[0]:
        raise ParseError("samples do not form a rectangular grid", None, path)
    g = GridSpec(float(res[0]), float(res[-1]), float(ims[0]), float(ims[-1]), res.size, ims.size)
    return Field(g, n, arr[:, 2].reshape(ims.size, res.size))
