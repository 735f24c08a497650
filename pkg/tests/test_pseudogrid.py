import math

import numpy as np
import pytest

from pencilscope.errors import ParseError
from pencilscope.heat import FtcsParams, ftcs_matrix
from pencilscope.pencil import Pencil, eigenvalues, pseudo_resolvent_norm
from pencilscope.pseudogrid import (
    Field,
    GridSpec,
    center_sampler,
    eigenvalues_from_grid,
    evaluate_field,
    extract_contours,
    field_from_csv,
    field_to_csv,
    locate_minima,
    point_in_polygon,
)


def zero_pencil(dim=2):
    return Pencil(np.zeros((dim, dim)), np.eye(dim))


# --- GridSpec -------------------------------------------------------------

def test_grid_parse_roundtrip():
    g = GridSpec.parse("-1:2:-0.5:0.5:4:3")
    assert g == GridSpec(-1, 2, -0.5, 0.5, 4, 3)
    assert GridSpec.parse(g.format()) == g
    assert g.points().shape == (3, 4)
    assert g.points()[0, 0] == complex(-1, -0.5)
    assert g.points()[-1, -1] == complex(2, 0.5)


@pytest.mark.parametrize("text", ["1:2:3", "a:1:0:1:2:2", "1:0:0:1:2:2", "0:1:0:1:1:2"])
def test_grid_parse_errors(text):
    with pytest.raises(ParseError):
        GridSpec.parse(text)


# --- evaluate_field --------------------------------------------------------

def test_scalar_resolvent_field():
    g = GridSpec(0.5, 2.5, -1.0, 1.0, 9, 7)
    f = evaluate_field(zero_pencil(), g, 0)
    np.testing.assert_allclose(f.values, -np.log10(np.abs(g.points())), rtol=1e-13, atol=1e-15)


def test_field_sentinel_at_eigenvalue():
    g = GridSpec(0.0, 2.0, -1.0, 1.0, 3, 3)
    f = evaluate_field(Pencil.standard(np.diag([1.0, 5.0])), g, 0)
    assert math.isinf(f.values[1, 1])
    assert np.isfinite(np.delete(f.values.ravel(), 4)).all()


def test_real_pencil_conjugate_symmetry():
    rng = np.random.default_rng(1)
    p = Pencil(rng.standard_normal((5, 5)), rng.standard_normal((5, 5)))
    g = GridSpec(-2, 2, -1.5, 1.5, 11, 13)
    f = evaluate_field(p, g, 1)
    np.testing.assert_allclose(f.values, f.values[::-1, :], rtol=1e-12)


def test_field_matches_pointwise_evaluation():
    rng = np.random.default_rng(2)
    p = Pencil(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)), rng.standard_normal((6, 6)))
    g = GridSpec(-3, 3, -3, 3, 31, 29)
    for n in (0, 2):
        f = evaluate_field(p, g, n)
        pts = g.points()
        for _ in range(32):
            j, i = rng.integers(g.n_im), rng.integers(g.n_re)
            ref = math.log10(pseudo_resolvent_norm(p, pts[j, i], n))
            assert f.values[j, i] == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_field_independent_of_thread_count(monkeypatch):
    rng = np.random.default_rng(3)
    p = Pencil(rng.standard_normal((40, 40)), np.eye(40))
    g = GridSpec(-5, 5, -5, 5, 41, 41)
    serial = evaluate_field(p, g, 0, threads=1)
    parallel = evaluate_field(p, g, 0, threads=4)
    assert serial.values.tobytes() == parallel.values.tobytes()
    monkeypatch.setenv("PENCILSCOPE_THREADS", "3")
    assert evaluate_field(p, g, 0).values.tobytes() == serial.values.tobytes()


# --- contours --------------------------------------------------------------

def test_circle_contour():
    g = GridSpec(-1, 1, -1, 1, 41, 41)
    p = zero_pencil()
    cs = extract_contours(evaluate_field(p, g, 0), [0.5], center_sampler(p, 0))
    lines = cs.polylines[0.5]
    assert len(lines) == 1 and lines[0].closed
    radii = np.hypot(lines[0].vertices[:, 0], lines[0].vertices[:, 1])
    assert np.max(np.abs(radii - 0.5)) <= 2 * g.dx
    assert point_in_polygon(0j, lines[0].vertices)
    assert not point_in_polygon(0.9 + 0j, lines[0].vertices)


def test_empty_level():
    g = GridSpec(-1, 1, -1, 1, 11, 11)
    f = evaluate_field(Pencil.standard(np.array([[10.0]])), g, 0)
    # field spans roughly [-1.04, -0.95]; eps = 10 sits inside that range
    cs = extract_contours(f, [1e-3, 10.0])
    assert cs.empty_levels == [1e-3]
    assert cs.polylines[10.0]
    assert cs.polylines[1e-3] == []


def test_two_separated_eigenvalues_two_loops():
    p = Pencil.standard(np.diag([-2.0, 2.0]))
    g = GridSpec(-4, 4, -2, 2, 81, 41)
    cs = extract_contours(evaluate_field(p, g, 0), [0.3], center_sampler(p, 0))
    loops = cs.polylines[0.3]
    assert len(loops) == 2 and all(pl.closed for pl in loops)
    assert sum(point_in_polygon(-2 + 0j, pl.vertices) for pl in loops) == 1
    assert sum(point_in_polygon(2 + 0j, pl.vertices) for pl in loops) == 1


def test_contour_vertices_on_level():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    p = Pencil.standard(A)
    g = GridSpec(-4, 4, -4, 4, 61, 61)
    f = evaluate_field(p, g, 0)
    eps = 0.4
    cs = extract_contours(f, [eps], center_sampler(p, 0))
    V = f.clamped()
    level = -math.log10(eps)
    for pl in cs.polylines[eps]:
        for x, y in pl.vertices:
            assert g.re_min <= x <= g.re_max and g.im_min <= y <= g.im_max
            i = min(int((x - g.re_min) / g.dx), g.n_re - 2)
            j = min(int((y - g.im_min) / g.dy), g.n_im - 2)
            cell = V[j:j + 2, i:i + 2]
            spread = float(cell.max() - cell.min())
            val = math.log10(pseudo_resolvent_norm(p, complex(x, y), 0))
            assert abs(val - level) <= spread + 1e-12


def test_open_polylines_touch_boundary():
    p = zero_pencil()
    g = GridSpec(0.2, 2, -1, 1, 30, 30)
    cs = extract_contours(evaluate_field(p, g, 0), [0.5, 1.0], center_sampler(p, 0))
    for eps in cs.epsilons:
        for pl in cs.polylines[eps]:
            if pl.closed:
                continue
            for v in (pl.vertices[0], pl.vertices[-1]):
                on_edge = (np.isclose(v[0], [g.re_min, g.re_max]).any() or np.isclose(v[1], [g.im_min, g.im_max]).any())
                assert on_edge


def test_contours_nest():
    rng = np.random.default_rng(6)
    p = Pencil.standard(np.triu(rng.standard_normal((6, 6))))
    g = GridSpec(-4, 4, -4, 4, 81, 81)
    cs = extract_contours(evaluate_field(p, g, 0), [0.05, 0.2], center_sampler(p, 0))
    outer = [pl.vertices for pl in cs.polylines[0.2] if pl.closed]
    for pl in cs.polylines[0.05]:
        for x, y in pl.vertices[::3]:
            assert any(point_in_polygon(complex(x, y), o) for o in outer)


def test_contours_deterministic_json():
    p = zero_pencil()
    g = GridSpec(-1, 1, -1, 1, 21, 21)
    a = extract_contours(evaluate_field(p, g, 0), [0.5]).to_json()
    b = extract_contours(evaluate_field(p, g, 0), [0.5]).to_json()
    assert a == b


def test_saddle_resolution_uses_center():
    # corners alternate around the level; the center decides which diagonal connects
    g = GridSpec(0, 1, 0, 1, 2, 2)
    f = Field(g, 0, np.array([[1.0, -1.0], [-1.0, 1.0]]))
    high = extract_contours(f, [1.0], center=lambda z: 5.0).polylines[1.0]
    low = extract_contours(f, [1.0], center=lambda z: -5.0).polylines[1.0]
    assert len(high) == 2 and len(low) == 2

    def pairs(lines):
        return sorted(tuple(sorted(map(tuple, np.round(pl.vertices, 6)))) for pl in lines)

    assert pairs(high) != pairs(low)


# --- minima ----------------------------------------------------------------

def test_minima_diagonal():
    p = Pencil.standard(np.diag([1.0, 2.0]))
    g = GridSpec(0, 3, -1, 1, 31, 21)
    seeds = locate_minima(evaluate_field(p, g, 0))
    assert len(seeds) == 2
    for target in (1, 2):
        assert min(abs(s - target) for s in seeds) <= math.hypot(g.dx, g.dy)


def test_minima_monotone_field_empty():
    g = GridSpec(5, 6, -0.5, 0.5, 11, 11)
    assert locate_minima(evaluate_field(zero_pencil(), g, 0)) == []


def test_minima_ftcs_matrix():
    T = ftcs_matrix(FtcsParams.from_a(9, 5.0))
    p = Pencil.standard(T)
    g = GridSpec(-21, 4, -4, 4, 201, 201)
    seeds = locate_minima(evaluate_field(p, g, 0))
    cell = math.hypot(g.dx, g.dy)
    for mu in eigenvalues(p):
        assert min(abs(s - mu) for s in seeds) <= cell


def test_eigenvalues_from_grid_singular_b():
    A = np.diag([1.0, 2.0, 5.0])
    B = np.diag([1.0, 1.0, 0.0])
    got = sorted(eigenvalues_from_grid(Pencil(A, B), GridSpec(0, 3, -1, 1, 31, 21)), key=lambda z: z.real)
    assert len(got) == 2
    assert got[0] == pytest.approx(1.0, abs=1e-10) and got[1] == pytest.approx(2.0, abs=1e-10)


# --- CSV --------------------------------------------------------------------

def test_field_csv_roundtrip():
    g = GridSpec(0, 2, -1, 1, 3, 3)
    f = evaluate_field(Pencil.standard(np.diag([1.0, 5.0])), g, 0)
    text = field_to_csv(f)
    assert text.splitlines()[0] == "re,im,log10r"
    assert ",inf\n" in text
    back = field_from_csv(text)
    assert back.grid == g
    assert back.values.tobytes() == f.values.tobytes()
    assert field_to_csv(back) == text


def test_field_csv_errors():
    with pytest.raises(ParseError):
        field_from_csv("x,y,z\n")
    with pytest.raises(ParseError) as info:
        field_from_csv("re,im,log10r\n0,0\n")
    assert info.value.line == 2
