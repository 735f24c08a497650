"""Seeded property checks for the pencil, block pencil and heat results.

Every randomized trial draws from ``numpy.random.default_rng([seed, index])``,
so a failure is reproducible from ``(seed, index)`` alone and trials can be
evaluated in any order.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import blockpencil as bpm
from . import heat
from .errors import AtPivotSpectrum, SchurSingular
from .linalg import extreme_singular_values, scaled_square_power, spectral_norm
from .pencil import (
    Pencil,
    eigenvalues,
    in_pseudospectrum,
    log_resolvent_norms,
    neumann_series_resolvent,
    perturbation_witness,
    pseudo_resolvent_norm,
    resolvent_matrix,
)
from .pseudogrid import GridSpec, evaluate_field

LEVELS = (0, 1, 2)
DIM = 6


# --- generators -----------------------------------------------------------

def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. standard complex normal entries (unit variance)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def random_pencil(rng: np.random.Generator, dim: int = DIM) -> Pencil:
    return Pencil(complex_normal(rng, (dim, dim)), complex_normal(rng, (dim, dim)))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(complex_normal(rng, (dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def hermitian_commuting_pencil(rng: np.random.Generator, dim: int = DIM):
    """``A = Q diag(a) Q^H``, ``B = Q diag(b) Q^H`` with real ``a`` and ``|b| >= 0.2``."""
    Q = random_unitary(rng, dim)
    a = rng.standard_normal(dim) * 2.0
    b = rng.uniform(0.2, 2.0, dim) * rng.choice([-1.0, 1.0], dim)
    A = (Q * a) @ Q.conj().T
    B = (Q * b) @ Q.conj().T
    A = 0.5 * (A + A.conj().T)
    B = 0.5 * (B + B.conj().T)
    return Pencil(A, B), a / b


def random_block_pencil(rng: np.random.Generator, m: int = 3) -> bpm.BlockPencil:
    blocks = [complex_normal(rng, (m, m)) for _ in range(8)]
    return bpm.BlockPencil(*blocks)


def commuting_block_pencil(rng: np.random.Generator, m: int = 4) -> bpm.BlockPencil:
    """A family meeting the level-n hypotheses for both complements.

    Diagonal blocks share one diagonal pair; ``A2, B2`` live on one half of the
    coordinates and ``A3, B3`` on the other, so ``G F = F G = 0`` and every
    factor commutes. A common unitary similarity hides the structure.
    """
    a = complex_normal(rng, m) * 2.0
    b = rng.uniform(0.5, 1.5, m) * np.exp(1j * rng.uniform(-0.3, 0.3, m))
    split = m // 2
    s2 = np.zeros(m)
    s2[:split] = 1.0
    s3 = 1.0 - s2
    Q = random_unitary(rng, m)

    def conj(d):
        return (Q * d) @ Q.conj().T

    A1 = conj(a)
    B1 = conj(b)
    A2 = conj(s2 * complex_normal(rng, m))
    B2 = conj(s2 * complex_normal(rng, m) * 0.5)
    A3 = conj(s3 * complex_normal(rng, m))
    B3 = conj(s3 * complex_normal(rng, m) * 0.5)
    return bpm.BlockPencil(A1, A2, A3, A1.copy(), B1, B2, B3, B1.copy())


def sample_lambda(rng: np.random.Generator, p: Pencil, eigs: Optional[np.ndarray] = None) -> complex:
    """Half the draws land near an eigenvalue, the rest in a box around the spectrum."""
    if eigs is None:
        eigs = _safe_eigs(p)
    if eigs.size and rng.random() < 0.5:
        mu = eigs[rng.integers(eigs.size)]
        return complex(mu + 0.3 * complex_normal(rng, ()))
    radius = 1.0 + (float(np.max(np.abs(eigs))) if eigs.size else 1.0)
    radius = min(radius, 10.0)
    return complex(radius * complex_normal(rng, ()))


def _safe_eigs(p: Pencil) -> np.ndarray:
    try:
        return eigenvalues(p)
    except Exception:
        return np.zeros(0, dtype=complex)


def block_grid(bp: bpm.BlockPencil, size: int = 41, margin: float = 1.0) -> GridSpec:
    """Box covering the spectrum of the assembled pencil plus ``margin``."""
    ev = _safe_eigs(bpm.assemble(bp))
    ev = ev[np.abs(ev) < 50.0] if ev.size else ev
    if not ev.size:
        ev = np.array([0j])
    lo_r, hi_r = float(ev.real.min()) - margin, float(ev.real.max()) + margin
    lo_i, hi_i = float(ev.imag.min()) - margin, float(ev.imag.max()) + margin
    return GridSpec(lo_r, hi_r, lo_i, hi_i, size, size)


# --- reports --------------------------------------------------------------

@dataclass
class Failure:
    index: int
    lam: Optional[complex]
    observed: float
    bound: float
    detail: str = ""

    def to_dict(self) -> dict:
        lam = None if self.lam is None else [_num(self.lam.real), _num(self.lam.imag)]
        return {"seed_offset": self.index, "lambda": lam, "observed": _num(self.observed),
                "bound": _num(self.bound), "detail": self.detail}


def _num(x: float):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float("%.17g" % x)


@dataclass
class VerifyReport:
    property: str
    trials: int
    seed: int
    failures: List[Failure] = field(default_factory=list)
    wall_time: float = 0.0
    notes: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "property": self.property,
            "trials": self.trials,
            "seed": self.seed,
            "failures": len(self.failures),
            "failure_records": [f.to_dict() for f in self.failures],
            "passed": self.passed,
            "notes": self.notes,
        }
        if timing:
            out["wall_time_s"] = round(self.wall_time, 3)
        return out


def reports_to_json(reports: Sequence[VerifyReport], timing: bool = False) -> str:
    payload = {
        "passed": all(r.passed for r in reports),
        "properties": [r.to_dict(timing) for r in reports],
    }
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


# --- registry -------------------------------------------------------------

TrialFn = Callable[[np.random.Generator, int], List[Failure]]


@dataclass(frozen=True)
class Property:
    name: str
    module: str
    description: str
    trial: Optional[TrialFn] = None  # randomized; called once per trial
    whole: Optional[Callable[[], "tuple[List[Failure], dict]"]] = None  # deterministic; run once
    default_trials: int = 100


REGISTRY: Dict[str, Property] = {}


def register(prop: Property) -> Property:
    REGISTRY[prop.name] = prop
    return prop


def run_property(name: str, seed: int = 0, trials: Optional[int] = None) -> VerifyReport:
    prop = REGISTRY[name]
    t0 = time.perf_counter()
    if prop.whole is not None:
        failures, notes = prop.whole()
        rep = VerifyReport(name, 1, seed, failures, notes=notes)
    else:
        count = prop.default_trials if trials is None else int(trials)
        failures: List[Failure] = []
        for idx in range(count):
            failures.extend(prop.trial(trial_rng(seed, idx), idx))
        rep = VerifyReport(name, count, seed, failures)
    rep.wall_time = time.perf_counter() - t0
    return rep


def run_all(seed: int = 0, trials: Optional[int] = None, names: Optional[Sequence[str]] = None) -> List[VerifyReport]:
    return [run_property(n, seed, trials) for n in (names or list(REGISTRY))]


def _rel_gap(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


# --- pencil laws ----------------------------------------------------------

def _nesting(rng, idx):
    p = random_pencil(rng)
    lam = sample_lambda(rng, p)
    logs = [float(log_resolvent_norms(p, [lam], n)[0]) for n in range(4)]
    out = []
    for n in range(3):
        if logs[n + 1] > logs[n] + math.log1p(1e-10):
            out.append(Failure(idx, lam, math.exp(logs[n + 1]), math.exp(logs[n]) * (1 + 1e-10), f"n={n}"))
    return out


def _eps_monotone(rng, idx):
    p = random_pencil(rng)
    lam = sample_lambda(rng, p)
    out = []
    for n in LEVELS:
        e1, e2 = sorted(rng.uniform(0.01, 2.0, 2))
        if in_pseudospectrum(p, lam, e1, n) and not in_pseudospectrum(p, lam, e2, n):
            out.append(Failure(idx, lam, e1, e2, f"n={n}"))
    return out


def _intersection(rng, idx):
    p = random_pencil(rng)
    lam = sample_lambda(rng, p)
    out = []
    ev = eigenvalues(p)
    if np.min(np.abs(ev - lam)) > 1e-6:
        for n in LEVELS:
            r = pseudo_resolvent_norm(p, lam, n)
            if not math.isfinite(r):
                out.append(Failure(idx, lam, r, math.inf, f"n={n}"))
    return out


def _disk_sum(rng, idx):
    p = random_pencil(rng)
    lam = sample_lambda(rng, p)
    r0 = pseudo_resolvent_norm(p, lam, 0)
    eps = 1.0 / r0
    nB = spectral_norm(p.B)
    out = []
    for _ in range(5):
        delta = float(rng.uniform(0.0, 1.0))
        mu = delta * complex(np.exp(2j * math.pi * rng.random())) * math.sqrt(rng.random())
        got = pseudo_resolvent_norm(p, lam + mu, 0)
        need = 1.0 / (eps + delta * nB)
        if got < need * (1 - 1e-8):
            out.append(Failure(idx, lam + mu, got, need, f"delta={delta:.6g}"))
    return out


def _scaling(rng, idx):
    p = random_pencil(rng)
    lam = sample_lambda(rng, p)
    alpha = complex(complex_normal(rng, ())) * 3.0 + 0.1
    q = Pencil(alpha * p.A, alpha * p.B)
    out = []
    for n in LEVELS:
        a = pseudo_resolvent_norm(q, lam, n)
        b = pseudo_resolvent_norm(p, lam, n) / abs(alpha)
        if _rel_gap(a, b) > 1e-10:
            out.append(Failure(idx, lam, a, b, f"n={n} alpha={alpha!r}"))
    return out


def _affine(rng, idx):
    p = random_pencil(rng)
    lam = sample_lambda(rng, p)
    alpha = complex(complex_normal(rng, ()))
    beta = complex(complex_normal(rng, ())) + 0.2
    q = Pencil(beta * p.A + alpha * p.B, p.B)
    out = []
    for n in LEVELS:
        a = pseudo_resolvent_norm(q, lam, n)
        b = pseudo_resolvent_norm(p, (lam - alpha) / beta, n) / abs(beta)
        if _rel_gap(a, b) > 1e-10:
            out.append(Failure(idx, lam, a, b, f"n={n}"))
    return out


def _adjoint(rng, idx):
    p = random_pencil(rng)
    lam = sample_lambda(rng, p)
    q = p.adjoint()
    out = []
    for n in LEVELS:
        a = pseudo_resolvent_norm(q, lam.conjugate(), n)
        b = pseudo_resolvent_norm(p, lam, n)
        if _rel_gap(a, b) > 1e-10:
            out.append(Failure(idx, lam, a, b, f"n={n}"))
    return out


def _equivalence(rng, idx):
    p = random_pencil(rng)
    lam = sample_lambda(rng, p)
    out = []
    r0 = pseudo_resolvent_norm(p, lam, 0)
    _, smin = extreme_singular_values(p.matrix(lam))
    if _rel_gap(r0, 1.0 / smin) > 1e-8:
        out.append(Failure(idx, lam, r0, 1.0 / smin, "r_0 vs 1/sigmaMin"))
    for n in LEVELS:
        r = pseudo_resolvent_norm(p, lam, n)
        w = perturbation_witness(p, lam, n)
        bound = (1.0 / r) ** (2 ** n)
        if _rel_gap(w.norm_E, bound) > 1e-8:
            out.append(Failure(idx, lam, w.norm_E, bound, f"n={n} witness norm"))
        if w.defect > 1e-10:
            out.append(Failure(idx, lam, w.defect, 1e-10, f"n={n} witness defect"))
    return out


def _witness(rng, idx):
    p = random_pencil(rng)
    lam = sample_lambda(rng, p)
    n = int(rng.integers(0, 3))
    r = pseudo_resolvent_norm(p, lam, n)
    w = perturbation_witness(p, lam, n)
    bound = (1.0 / r) ** (2 ** n)
    out = []
    if w.norm_E > bound * (1 + 1e-8):
        out.append(Failure(idx, lam, w.norm_E, bound, f"n={n} ||E||"))
    if w.defect > 1e-10:
        out.append(Failure(idx, lam, w.defect, 1e-10, f"n={n} defect"))
    rank = np.linalg.matrix_rank(w.E, tol=1e-12 * max(w.norm_E, 1e-300))
    if rank > 1:
        out.append(Failure(idx, lam, rank, 1, f"n={n} rank"))
    return out


def _perturbation_lemma(rng, idx, eps: float = 0.3):
    p = random_pencil(rng)
    C = complex_normal(rng, (DIM, DIM))
    C *= eps * float(rng.uniform(0.05, 1.0)) / spectral_norm(C)
    out = []
    for mu in eigenvalues(Pencil(p.A + C, p.B)):
        _, smin = extreme_singular_values(p.matrix(mu))
        if smin > eps * (1 + 1e-6):
            out.append(Failure(idx, complex(mu), smin, eps * (1 + 1e-6), "sigmaMin(mu B - A)"))
    return out


def _self_adjoint(rng, idx):
    p, spec = hermitian_commuting_pencil(rng)
    out = []
    Binv = np.linalg.inv(p.B)
    for n in LEVELS:
        lam = complex(spec[rng.integers(spec.size)]) + complex(complex_normal(rng, ())) * 0.7
        r = pseudo_resolvent_norm(p, lam, n)
        eps = 1.0 / r  # boundary of the smallest eps containing lam
        radius = eps * math.exp(float(scaled_square_power(Binv, n)) / 2 ** n)
        dist = float(np.min(np.abs(spec - lam)))
        if dist > radius * (1 + 1e-10):
            out.append(Failure(idx, lam, dist, radius, f"n={n}"))
    return out


def _neumann(rng, idx):
    p = random_pencil(rng)
    lam0 = sample_lambda(rng, p)
    R0 = resolvent_matrix(p, lam0)
    radius = 1.0 / spectral_norm(p.B @ R0)
    step = 0.9 * radius * math.sqrt(rng.random()) * complex(np.exp(2j * math.pi * rng.random()))
    lam = lam0 + step
    approx = neumann_series_resolvent(p, lam0, lam, tol=1e-14 * np.linalg.norm(R0))
    exact = resolvent_matrix(p, lam)
    err = float(np.linalg.norm(approx - exact) / np.linalg.norm(exact))
    if err > 1e-8:
        return [Failure(idx, lam, err, 1e-8, f"lam0={lam0!r}")]
    return []


# --- block pencil laws ------------------------------------------------------

def _block_lams(rng, bp, count=20):
    full = bpm.assemble(bp)
    ev = _safe_eigs(full)
    return [sample_lambda(rng, full, ev) for _ in range(count)], ev


def _factorization(rng, idx):
    bp = random_block_pencil(rng)
    lams, _ = _block_lams(rng, bp)
    full = bpm.assemble(bp)
    out = []
    for lam in lams:
        for comp in bpm.COMPLEMENTS:
            try:
                res = bpm.factorization_residual(bp, lam, comp)
            except AtPivotSpectrum:
                continue
            if res > 1e-9:
                out.append(Failure(idx, lam, res, 1e-9, f"{comp} residual"))
            try:
                R = bpm.resolvent_via_schur(bp, lam, comp)
            except SchurSingular:
                continue
            D = resolvent_matrix(full, lam)
            err = float(np.linalg.norm(R - D) / np.linalg.norm(D))
            if err > 1e-8:
                out.append(Failure(idx, lam, err, 1e-8, f"{comp} resolvent"))
    return out


def _schur_equivalence(rng, idx):
    bp = random_block_pencil(rng)
    lams, ev = _block_lams(rng, bp)
    full = bpm.assemble(bp)
    out = []
    for lam in list(lams) + [complex(mu) for mu in ev]:
        M = full.matrix(lam)
        _, smin = extreme_singular_values(M)
        assembled = smin <= bpm.SCHUR_RTOL * np.linalg.norm(M)
        for comp in bpm.COMPLEMENTS:
            try:
                sd = bpm.schur_complement(bp, lam, comp)
            except AtPivotSpectrum:
                continue
            schur = bpm.schur_is_singular(sd)
            if schur != assembled:
                out.append(Failure(idx, lam, float(schur), float(assembled), f"{comp}: SchurSingular vs sigmaMin"))
    return out


def _spectral_inclusion(rng, idx):
    bp = random_block_pencil(rng)
    out = []
    for mu in _safe_eigs(bpm.assemble(bp)):
        try:
            ind = bpm.spectral_indicator(bp, complex(mu))
        except AtPivotSpectrum:
            continue
        if ind < 1 - 1e-8:
            out.append(Failure(idx, complex(mu), ind, 1 - 1e-8, "indicator at eigenvalue"))
    return out


def _sweep_failures(idx, bp, epsilons, n, bound, grid_size=41):
    g = block_grid(bp, grid_size)
    lams = g.points().ravel()
    out = []
    notes = {}
    for comp in bpm.COMPLEMENTS:
        rep = bpm.enclosure_sweep(bp, lams, epsilons, comp, n, bound)
        notes[comp] = (sum(rep.checked.values()), rep.skipped_hypotheses)
        for r in rep.records:
            for key, ok in r.satisfied.items():
                if not ok:
                    need = 1.0 / (float(key) * r.inflation)
                    out.append(Failure(idx, r.lam, max(r.r_pivot, r.r_schur), need, f"{comp} eps={key} n={n}"))
    return out, notes


ENCLOSURE_EPS = (0.1, 0.3)


def _enclosure(rng, idx):
    return _sweep_failures(idx, random_block_pencil(rng), ENCLOSURE_EPS, 0, "paper")[0]


def _level_enclosure(bound):
    def trial(rng, idx):
        bp = commuting_block_pencil(rng)
        out = []
        for n in (1, 2):
            fails, notes = _sweep_failures(idx, bp, ENCLOSURE_EPS, n, bound)
            for comp, (checked, skipped) in notes.items():
                if skipped:
                    out.append(Failure(idx, None, skipped, 0, f"{comp} n={n}: hypotheses failed at {skipped} points"))
                if not checked:
                    out.append(Failure(idx, None, 0, 1, f"{comp} n={n}: no member points"))
            out.extend(fails)
        return out
    return trial


# --- heat -----------------------------------------------------------------

HEAT = heat.HeatParams(1.0, math.pi)
HEAT_ENCLOSURE_M = 64
HEAT_ENCLOSURE_GRID = GridSpec(-14.0, 2.0, -4.0, 4.0, 101, 101)
HEAT_ENCLOSURE_EPS = (0.1, 0.25)


def heat_discrete_eigenvalues(hp: heat.HeatParams, m: int) -> np.ndarray:
    """Nonzero eigenvalues of the assembled heat pencil, closest to zero first."""
    ev = eigenvalues(bpm.assemble(heat.heat_pencil_matrices(hp, m)))
    ev = ev[np.abs(ev) > 1e-6]
    return ev[np.argsort(np.abs(ev))]


def heat_convergence_table(hp: heat.HeatParams = HEAT, ms=(16, 32, 64, 128), count: int = 2):
    exact = heat.heat_eigenvalues(hp, count)
    errors = []
    for m in ms:
        ev = heat_discrete_eigenvalues(hp, m)
        errors.append([abs(ev[k] - exact[k]) for k in range(count)])
    errors = np.array(errors)
    ratios = errors[:-1] / errors[1:]
    return errors, ratios


def _heat_convergence():
    errors, ratios = heat_convergence_table()
    out = []
    for (i, k), r in np.ndenumerate(ratios):
        if not r >= 2.8:
            out.append(Failure(i, None, float(r), 2.8, f"lambda_{k} error ratio"))
    notes = {"errors": errors.tolist(), "ratios": ratios.tolist(),
             "orders": np.log2(ratios).tolist()}
    return out, notes


def ftcs_decay_rates(hp: heat.HeatParams = HEAT, ms=(16, 32, 64), a: float = 0.25, t_end: float = 1.0):
    """Late-time decay rate ``log(|phi^{j+1}| / |phi^j|) / dt`` for the first mode."""
    rates = []
    for m in ms:
        fp = heat.FtcsParams.from_a(m, a, hp)
        steps = max(2, int(round(t_end / fp.delta_t)))
        sim = heat.simulate_ftcs(fp, heat.mode_initial(fp, 0, hp), steps)
        s = sim.states
        rates.append(math.log(np.linalg.norm(s[-1]) / np.linalg.norm(s[-2])) / fp.delta_t)
    return rates


def _ftcs_decay():
    lam0 = heat.heat_eigenvalues(HEAT, 1)[0]
    rates = ftcs_decay_rates()
    errs = [abs(r - lam0) for r in rates]
    out = []
    for i in range(len(errs) - 1):
        if not errs[i + 1] < errs[i]:
            out.append(Failure(i, None, errs[i + 1], errs[i], "decay-rate error did not shrink"))
    if errs[-1] > 0.02:
        out.append(Failure(len(errs) - 1, None, errs[-1], 0.02, "decay-rate error at finest grid"))
    return out, {"rates": rates, "lambda0": float(lam0), "errors": [float(e) for e in errs]}


_FIELD_CACHE: Dict[tuple, object] = {}


def heat_enclosure_field(m: int = HEAT_ENCLOSURE_M, grid: GridSpec = HEAT_ENCLOSURE_GRID):
    """Level-0 field of the assembled heat pencil, memoized per ``(m, grid)``."""
    key = (m, grid)
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = evaluate_field(bpm.assemble(heat.heat_pencil_matrices(HEAT, m)), grid, 0)
    return _FIELD_CACHE[key]


def heat_enclosure_report(include_zero: bool, sup_radius: bool = False, m: int = HEAT_ENCLOSURE_M,
                          grid: GridSpec = HEAT_ENCLOSURE_GRID, epsilons=HEAT_ENCLOSURE_EPS):
    f = heat_enclosure_field(m, grid)
    return heat.heat_enclosure_check(HEAT, m, f, epsilons, sup_radius, include_zero)


def _heat_enclosure(include_zero):
    def whole():
        rep = heat_enclosure_report(include_zero)
        out = [Failure(0, None, float(v), 0.0, f"eps={k}: violating points (worst gap {rep.worst[k]:.3g})")
               for k, v in rep.violations.items() if v]
        return out, rep.to_dict()
    return whole


def green_discrete_agreement(hp=heat.HeatParams(1.0, 1.0), lam: complex = 1.0, ns=(16, 32, 64, 128)):
    """Max difference between the Green quadrature and the discrete right-end solve, f = 1."""
    diffs = []
    for N in ns:
        x = np.linspace(0.0, hp.d, N + 1)
        f = np.ones_like(x)
        g = heat.green_resolvent_apply(hp, lam, f)
        u = heat.right_end_discrete_resolvent(hp, lam, f)
        diffs.append(float(np.max(np.abs(g.u - u))))
    ratios = [diffs[i] / diffs[i + 1] for i in range(len(diffs) - 1)]
    return diffs, ratios


def _green():
    diffs, ratios = green_discrete_agreement()
    out = [Failure(i, None, r, 4.0, "ratio outside [3, 5]") for i, r in enumerate(ratios) if not 3.0 <= r <= 5.0]
    return out, {"max_differences": diffs, "ratios": ratios}


# --- registration ---------------------------------------------------------

for _name, _fn, _desc in (
    ("nesting", _nesting, "r_{n+1} <= r_n"),
    ("eps_monotone", _eps_monotone, "membership is monotone in eps"),
    ("intersection", _intersection, "r_n finite off the spectrum"),
    ("disk_sum", _disk_sum, "Lambda_eps + disk(delta) inside Lambda_{eps + delta ||B||}"),
    ("scaling", _scaling, "r_n(alpha A, alpha B) = r_n / |alpha|"),
    ("affine", _affine, "r_n(beta A + alpha B, B; lam) = r_n((lam - alpha)/beta) / |beta|"),
    ("adjoint", _adjoint, "r_n(conj lam; A^H, B^H) = r_n(lam; A, B)"),
    ("equivalence", _equivalence, "r_0 = 1/sigmaMin and the rank-one witness"),
    ("witness", _witness, "||E|| <= r_n^-2^n, defect <= 1e-10"),
    ("self_adjoint", _self_adjoint, "Hermitian commuting pencils stay near the real spectrum"),
    ("neumann", _neumann, "alternating Neumann series equals the resolvent"),
):
    register(Property(_name, "pencil", _desc, trial=_fn))

register(Property("perturbation_lemma", "pencil", "sigma(A + C, B) inside Lambda_eps(A, B)",
                  trial=_perturbation_lemma, default_trials=200))
register(Property("factorization", "blockpencil", "Frobenius-Schur residual and inverse", trial=_factorization))
register(Property("schur_equivalence", "blockpencil", "SchurSingular iff the assembled pencil is singular",
                  trial=_schur_equivalence, default_trials=50))
register(Property("spectral_inclusion", "blockpencil", "indicator >= 1 at eigenvalues",
                  trial=_spectral_inclusion))
register(Property("block_enclosure", "blockpencil", "pointwise level-0 enclosure, both complements",
                  trial=_enclosure, default_trials=50))
register(Property("block_enclosure_level", "blockpencil",
                  "level-n enclosure with inflation ((1+d1^k)(1+d2^k))^(1/k) on commuting families",
                  trial=_level_enclosure("paper"), default_trials=10))
register(Property("block_enclosure_level_commuting", "blockpencil",
                  "level-n enclosure with inflation ((1+k d1)(1+k d2))^(1/k) on commuting families",
                  trial=_level_enclosure("commuting"), default_trials=10))
register(Property("heat_convergence", "heat", "discrete eigenvalues converge with order >= 1.5",
                  whole=_heat_convergence))
register(Property("ftcs_decay", "heat", "FTCS mode decay rate tends to lambda_0", whole=_ftcs_decay))
register(Property("heat_enclosure", "heat", "r_0 >= 1/eps within eps(1 + delta1) of c^2 sigma(D2)",
                  whole=_heat_enclosure(False)))
register(Property("heat_enclosure_with_zero", "heat",
                  "r_0 >= 1/eps within eps(1 + delta1) of c^2 sigma(D2) together with 0",
                  whole=_heat_enclosure(True)))
register(Property("green_resolvent", "heat", "Green quadrature vs discrete solve, O(h^2)", whole=_green))
