import json

import numpy as np
import pytest

from pencilscope.cli import main
from pencilscope.heat import heat_eigenvalues, HeatParams
from pencilscope.pencil import Pencil, eigenvalues, read_pencil, write_pencil
from pencilscope.pseudogrid import GridSpec, center_sampler, evaluate_field, extract_contours
from pencilscope.svg import render_svg, render_svg_text

from svgtools import inside, parse_svg


def write_diag_pencil(path, vals):
    write_pencil(path, Pencil.standard(np.diag(vals)))
    return str(path)


# --- exit codes ---------------------------------------------------------------

def test_malformed_matrix_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.pencil"
    bad.write_text("2 2\n1 0 0 0\n0 0 1\n")
    assert main(["eig", "--pencil", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "ParseError" in err and "line" in err


def test_missing_file_exit_2(tmp_path, capsys):
    assert main(["eig", "--pencil", str(tmp_path / "nope")]) == 2
    assert "IoError" in capsys.readouterr().err


def test_bad_grid_exit_2(tmp_path):
    p = write_diag_pencil(tmp_path / "p", [1.0])
    assert main(["grid", "--pencil", p, "--grid", "1:2:3", "--out", str(tmp_path)]) == 2


def test_verify_nesting_seed_7(capsys):
    assert main(["verify", "nesting", "--trials", "100", "--seed", "7"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["passed"]
    (prop,) = rep["properties"]
    assert prop["property"] == "nesting" and prop["trials"] == 100 and prop["failures"] == 0
    assert "wall_time_s" not in prop


def test_verify_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "scaling", "--trials", "10", "--seed", "3", "--out", str(a)]) == 0
    assert main(["verify", "scaling", "--trials", "10", "--seed", "3", "--out", str(b)]) == 0
    assert (a / "verify.json").read_bytes() == (b / "verify.json").read_bytes()


def test_verify_unknown_property(capsys):
    assert main(["verify", "no_such_law"]) == 2


def test_property_failure_exit_1(tmp_path):
    # level-2 enclosure with the printed inflation fails on this commuting family
    assert main(["verify", "block_enclosure_level", "--seed", "0", "--trials", "3", "--out", str(tmp_path)]) == 1
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert not rep["passed"]


# --- commands ---------------------------------------------------------------------

def test_heat_eig_prints_values(capsys):
    assert main(["heat", "eig", "--count", "3"]) == 0
    vals = [float(t) for t in capsys.readouterr().out.split()]
    assert vals == pytest.approx([-0.25, -2.25, -6.25], abs=1e-12)


def test_heat_eig_rejects_bad_params():
    assert main(["heat", "eig", "--c", "-1"]) == 2


def test_heat_fdm_needs_one_of_a_dt(tmp_path):
    assert main(["heat", "fdm", "--m", "5", "--out", str(tmp_path)]) == 2
    assert main(["heat", "fdm", "--m", "5", "--a", "1", "--dt", "1", "--out", str(tmp_path)]) == 2


def test_eig_command(tmp_path, capsys):
    p = write_diag_pencil(tmp_path / "p", [2.0, -1.0])
    assert main(["eig", "--pencil", p]) == 0
    rows = sorted(tuple(map(float, ln.split())) for ln in capsys.readouterr().out.splitlines())
    assert rows == [(-1.0, 0.0), (2.0, 0.0)]


def test_eig_singular_b_uses_grid(tmp_path, capsys):
    path = tmp_path / "p"
    write_pencil(path, Pencil(np.diag([1.0, 2.0]), np.diag([1.0, 0.0])))
    assert main(["eig", "--pencil", str(path), "--grid", "0:2:-1:1:21:21"]) == 0
    rows = [tuple(map(float, ln.split())) for ln in capsys.readouterr().out.splitlines()]
    assert len(rows) == 1 and rows[0][0] == pytest.approx(1.0, abs=1e-10)


def test_fdm_grid_contour_flow(tmp_path):
    out = str(tmp_path)
    assert main(["heat", "fdm", "--m", "10", "--a", "5", "--out", out]) == 0
    meta = json.loads((tmp_path / "T.json").read_text())
    assert meta["size"] == 11 and meta["unstable"]
    T = str(tmp_path / "T.pencil")
    assert main(["grid", "--pencil", T, "--grid", "-21:4:-4:4:121:61", "--out", out]) == 0
    assert main(["contour", "--pencil", T, "--field", str(tmp_path / "field.csv"),
                 "--eps", "0.25,0.5", "--out", out]) == 0
    doc = parse_svg((tmp_path / "contours.svg").read_text())
    eigs = eigenvalues(read_pencil(T))
    assert len(doc.eigs) == len(eigs)
    for eps in (0.25, 0.5):
        loops = [p.points for p in doc.paths if p.eps == eps]
        assert loops and all(p.closed for p in doc.paths if p.eps == eps)
        for cx, cy, _, _ in doc.eigs:
            assert any(inside((cx, cy), lp) for lp in loops)


def test_contour_from_pencil_matches_field_route(tmp_path):
    p = write_diag_pencil(tmp_path / "p", [0.0])
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["contour", "--pencil", p, "--grid", "-1:1:-1:1:21:21", "--eps", "0.5", "--out", str(a)]) == 0
    assert main(["grid", "--pencil", p, "--grid", "-1:1:-1:1:21:21", "--out", str(b)]) == 0
    assert main(["contour", "--pencil", p, "--field", str(b / "field.csv"), "--eps", "0.5", "--out", str(b)]) == 0
    assert (a / "contours.svg").read_bytes() == (b / "contours.svg").read_bytes()
    assert (a / "contours.json").read_bytes() == (b / "contours.json").read_bytes()


def test_contour_requires_input(tmp_path):
    assert main(["contour", "--eps", "0.5", "--out", str(tmp_path)]) == 2
    assert main(["contour", "--preset", "paper-fig", "--eps", "0,1", "--out", str(tmp_path)]) == 2


def test_heat_simulate(tmp_path):
    out = str(tmp_path)
    assert main(["heat", "simulate", "--m", "8", "--a", "0.25", "--steps", "5", "--out", out]) == 0
    rows = (tmp_path / "states.csv").read_text().splitlines()
    assert rows[0] == "x,step0,step1,step2,step3,step4,step5"
    assert len(rows) == 10
    init = tmp_path / "init.txt"
    init.write_text("0 1 2\n")
    assert main(["heat", "simulate", "--m", "8", "--a", "0.25", "--initial", str(init), "--out", out]) == 2


def test_heat_enclosure_cli(tmp_path):
    out = str(tmp_path)
    args = ["heat", "enclosure", "--m", "16", "--eps", "0.25", "--grid", "-6:1:-2:2:36:21", "--out", out]
    assert main(args) == 0
    rep = json.loads((tmp_path / "heat-enclosure.json").read_text())
    assert rep["include_zero"] and rep["violations"] == {"0.25": 0}
    assert main(args + ["--literal"]) == 1
    rep = json.loads((tmp_path / "heat-enclosure.json").read_text())
    assert rep["violations"]["0.25"] > 0


def test_block_enclosure_cli(tmp_path):
    from pencilscope.blockpencil import BlockPencil, write_block_pencil
    rng = np.random.default_rng(4)
    bp = BlockPencil(*(rng.standard_normal((2, 2)) for _ in range(8)))
    path = tmp_path / "bp.txt"
    write_block_pencil(path, bp)
    assert main(["block-enclosure", "--block", str(path), "--grid", "-3:3:-3:3:15:15",
                 "--eps", "0.2", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "block-enclosure.json").read_text())
    assert rep["violations"] == {"0.2": 0} and rep["checked"]["0.2"] > 0


# --- SVG ------------------------------------------------------------------------

def test_svg_empty_contours():
    g = GridSpec(-1, 1, -1, 1, 5, 5)
    doc = parse_svg(render_svg_text(None, [0.5 + 0.5j], g))
    assert doc.paths == []
    assert len(doc.eigs) == 1 and doc.eigs[0][2:] == (0.5, 0.5)


def test_svg_single_circle():
    p = Pencil(np.zeros((1, 1)), np.eye(1))
    g = GridSpec(-1, 1, -1, 1, 31, 31)
    cs = extract_contours(evaluate_field(p, g, 0), [0.5], center_sampler(p, 0))
    doc = parse_svg(render_svg_text(cs, [0j], g))
    assert len(doc.paths) == 1 and doc.paths[0].closed
    cx, cy = doc.eigs[0][:2]
    assert inside((cx, cy), doc.paths[0].points)


def test_svg_deterministic(tmp_path):
    p = Pencil.standard(np.array([[1.0, 3.0], [0.0, -1.0]]))
    g = GridSpec(-3, 3, -2, 2, 41, 31)
    outs = []
    for k in range(2):
        cs = extract_contours(evaluate_field(p, g, 0), [0.25, 0.5], center_sampler(p, 0))
        path = tmp_path / f"{k}.svg"
        render_svg(cs, eigenvalues(p), path, grid=g, title="t")
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_svg_markers_clipped_to_grid():
    g = GridSpec(-1, 1, -1, 1, 5, 5)
    doc = parse_svg(render_svg_text(None, [0j, 5 + 0j], g))
    assert [e[2] for e in doc.eigs] == [0.0]


def test_heat_eig_matches_module(capsys):
    main(["heat", "eig", "--c", "2", "--d", "1", "--count", "2"])
    got = [float(t) for t in capsys.readouterr().out.split()]
    assert got == heat_eigenvalues(HeatParams(2.0, 1.0), 2)
