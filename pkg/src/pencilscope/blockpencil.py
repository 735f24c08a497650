"""2x2 block pencils and their Frobenius-Schur factorizations.

With ``P_k(lambda) = lambda*B_k - A_k`` the assembled pencil is
``[[P1, P2], [P3, P4]]``. The two factorizations are

* first complement (pivot ``P4``)::

      S1 = P2 P4^-1 P3 + A1,  F1 = P2 P4^-1,  G1 = P4^-1 P3
      M  = [[I, F1], [0, I]] diag(lambda B1 - S1, P4) [[I, 0], [G1, I]]

* second complement (pivot ``P1``)::

      S2 = P3 P1^-1 P2 + A4,  F2 = P3 P1^-1,  G2 = P1^-1 P2
      M  = [[I, 0], [F2, I]] diag(P1, lambda B4 - S2) [[I, G2], [0, I]]
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import AtPivotSpectrum, ParseError, SchurSingular
from .linalg import (
    as_cmatrix,
    format_matrix,
    lu_factor,
    lu_solve,
    read_matrix_block,
    scaled_square_power,
    significant_lines,
    spectral_norm,
)
from .pencil import Pencil, log_resolvent_norms

FIRST = "first"
SECOND = "second"
COMPLEMENTS = (FIRST, SECOND)

# relative sigma_min threshold below which a Schur complement counts as singular
SCHUR_RTOL = 1e-8
HYPOTHESIS_RTOL = 1e-10


@dataclass(frozen=True)
class BlockPencil:
    A1: np.ndarray
    A2: np.ndarray
    A3: np.ndarray
    A4: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    B3: np.ndarray
    B4: np.ndarray

    def __post_init__(self):
        names = ("A1", "A2", "A3", "A4", "B1", "B2", "B3", "B4")
        shape = None
        for name in names:
            M = as_cmatrix(getattr(self, name), name)
            if M.shape[0] != M.shape[1]:
                raise ValueError(f"block {name} is not square: {M.shape}")
            if shape is None:
                shape = M.shape
            elif M.shape != shape:
                raise ValueError(f"block {name} has shape {M.shape}, expected {shape}")
            object.__setattr__(self, name, M)

    @property
    def m(self) -> int:
        return self.A1.shape[0]

    def blocks(self):
        return (self.A1, self.A2, self.A3, self.A4, self.B1, self.B2, self.B3, self.B4)

    def P(self, k: int, lam: complex) -> np.ndarray:
        A = (self.A1, self.A2, self.A3, self.A4)[k - 1]
        B = (self.B1, self.B2, self.B3, self.B4)[k - 1]
        return lam * B - A


def assemble(bp: BlockPencil) -> Pencil:
    A = np.block([[bp.A1, bp.A2], [bp.A3, bp.A4]])
    B = np.block([[bp.B1, bp.B2], [bp.B3, bp.B4]])
    return Pencil(A, B)


@dataclass(frozen=True)
class SchurData:
    complement: str
    S: np.ndarray
    F: np.ndarray
    G: np.ndarray
    lam: complex
    pivot_B: np.ndarray  # B1 for the first complement, B4 for the second
    pivot_inverse: np.ndarray  # (lambda B4 - A4)^-1 or (lambda B1 - A1)^-1

    @property
    def schur_matrix(self) -> np.ndarray:
        """``lambda*B1 - S1`` (first) or ``lambda*B4 - S2`` (second)."""
        return self.lam * self.pivot_B - self.S


def _check_complement(complement: str) -> None:
    if complement not in COMPLEMENTS:
        raise ValueError(f"complement must be one of {COMPLEMENTS}, got {complement!r}")


def _pivot_inverse(P: np.ndarray, lam: complex, which: str) -> np.ndarray:
    f = lu_factor(P)
    if f.singular:
        raise AtPivotSpectrum(f"pivot block {which} is singular at lambda={lam!r}")
    return lu_solve(P, np.eye(P.shape[0], dtype=np.complex128), factors=f)


def schur_complement(bp: BlockPencil, lam: complex, complement: str = SECOND) -> SchurData:
    _check_complement(complement)
    P1, P2, P3, P4 = (bp.P(k, lam) for k in (1, 2, 3, 4))
    if complement == FIRST:
        R4 = _pivot_inverse(P4, lam, "lambda*B4 - A4")
        F = P2 @ R4
        G = R4 @ P3
        S = F @ P3 + bp.A1
        return SchurData(FIRST, S, F, G, lam, bp.B1, R4)
    R1 = _pivot_inverse(P1, lam, "lambda*B1 - A1")
    F = P3 @ R1
    G = R1 @ P2
    S = F @ P2 + bp.A4
    return SchurData(SECOND, S, F, G, lam, bp.B4, R1)


def _factors(bp: BlockPencil, lam: complex, complement: str):
    sd = schur_complement(bp, lam, complement)
    m = bp.m
    I = np.eye(m)
    Z = np.zeros((m, m))
    if complement == FIRST:
        left = np.block([[I, sd.F], [Z, I]])
        mid = np.block([[sd.schur_matrix, Z], [Z, bp.P(4, lam)]])
        right = np.block([[I, Z], [sd.G, I]])
    else:
        left = np.block([[I, Z], [sd.F, I]])
        mid = np.block([[bp.P(1, lam), Z], [Z, sd.schur_matrix]])
        right = np.block([[I, sd.G], [Z, I]])
    return sd, left, mid, right


def factorization_residual(bp: BlockPencil, lam: complex, complement: str = SECOND) -> float:
    """``||L D U - (lambda B - A)||_F / ||lambda B - A||_F``."""
    _, left, mid, right = _factors(bp, lam, complement)
    M = assemble(bp).matrix(lam)
    denom = np.linalg.norm(M)
    diff = np.linalg.norm(left @ mid @ right - M)
    if denom == 0:
        return float(diff)
    return float(diff / denom)


def schur_is_singular(sd: SchurData) -> bool:
    T = sd.schur_matrix
    s = np.linalg.svd(T, compute_uv=False)
    scale = np.linalg.norm(T)
    return bool(scale == 0 or s[-1] <= SCHUR_RTOL * scale)


def resolvent_via_schur(bp: BlockPencil, lam: complex, complement: str = SECOND) -> np.ndarray:
    """Inverse of the assembled pencil from the block triangular factors.

    Raises :class:`SchurSingular` when the Schur complement pencil is singular
    at ``lam`` (equivalently, ``lam`` is in the spectrum of the whole pencil).
    """
    sd = schur_complement(bp, lam, complement)
    if schur_is_singular(sd):
        raise SchurSingular(f"Schur complement ({complement}) is singular at lambda={lam!r}")
    T = sd.schur_matrix
    RS = lu_solve(T, np.eye(bp.m, dtype=np.complex128))
    m = bp.m
    I = np.eye(m)
    Z = np.zeros((m, m))
    if complement == FIRST:
        left = np.block([[I, Z], [-sd.G, I]])
        mid = np.block([[RS, Z], [Z, sd.pivot_inverse]])
        right = np.block([[I, -sd.F], [Z, I]])
    else:
        left = np.block([[I, -sd.G], [Z, I]])
        mid = np.block([[sd.pivot_inverse, Z], [Z, RS]])
        right = np.block([[I, Z], [-sd.F, I]])
    return left @ mid @ right


def spectral_indicator(bp: BlockPencil, lam: complex) -> float:
    """``min ||M_S1||, ||N_S1||, ||M_S2||, ||N_S2||``; a value below 1 certifies a resolvent point."""
    P1, P2, P3, P4 = (bp.P(k, lam) for k in (1, 2, 3, 4))
    R1 = _pivot_inverse(P1, lam, "lambda*B1 - A1")
    R4 = _pivot_inverse(P4, lam, "lambda*B4 - A4")
    M_S1 = P2 @ R4 @ P3 @ R1
    N_S1 = R1 @ P2 @ R4 @ P3
    M_S2 = P3 @ R1 @ P2 @ R4
    N_S2 = R4 @ P3 @ R1 @ P2
    return min(spectral_norm(X) for X in (M_S1, N_S1, M_S2, N_S2))


@dataclass(frozen=True)
class EnclosureFactors:
    """Off-diagonal factor norms and the resulting eps inflation at one lambda.

    For the second complement ``delta1 = ||G2||`` and ``delta2 = ||F2||``;
    for the first complement they hold ``eta1 = ||G1||`` and ``eta2 = ||F1||``.
    ``inflation`` is ``((1 + d1^k)(1 + d2^k))^(1/k)`` with ``k = 2^n``.
    ``commuting_inflation`` is ``((1 + k d1)(1 + k d2))^(1/k)``, the factor that
    follows from the commuting factorization ``[[I, -G], [0, I]]^k = [[I, -kG], [0, I]]``.
    """

    complement: str
    delta1: float
    delta2: float
    n: int
    inflation: float
    commuting_inflation: float


def _level_inflation(d1: float, d2: float, n: int) -> float:
    k = 2.0 ** n
    # log(1 + d^k) without overflow
    def l(d):
        if d == 0:
            return 0.0
        t = k * math.log(d)
        return t + math.log1p(math.exp(-t)) if t > 0 else math.log1p(math.exp(t))
    return math.exp((l(d1) + l(d2)) / k)


def enclosure_factors(bp: BlockPencil, lam: complex, complement: str = SECOND, n: int = 0) -> EnclosureFactors:
    return _factors_from(schur_complement(bp, lam, complement), n)


def _factors_from(sd: SchurData, n: int) -> EnclosureFactors:
    complement = sd.complement
    d1 = spectral_norm(sd.G)
    d2 = spectral_norm(sd.F)
    k = 2.0 ** n
    comm = math.exp((math.log1p(k * d1) + math.log1p(k * d2)) / k)
    return EnclosureFactors(complement, d1, d2, n, _level_inflation(d1, d2, n), comm)


@dataclass(frozen=True)
class HypothesisReport:
    GF_zero: bool
    FG_zero: bool
    G_intertwines: bool
    F_intertwines: bool
    residuals: Dict[str, float]

    @property
    def all_hold(self) -> bool:
        return self.GF_zero and self.FG_zero and self.G_intertwines and self.F_intertwines


def verify_hypotheses(bp: BlockPencil, lam: complex, complement: str = SECOND) -> HypothesisReport:
    """Check the commutation conditions needed for the level-n enclosure.

    second: ``G2 F2 = F2 G2 = 0``, ``G2 (lB4-S2)^-1 = (lB1-A1)^-1 G2``,
    ``F2 (lB1-A1)^-1 = (lB4-S2)^-1 F2``.
    first: ``G1 F1 = F1 G1 = 0``, ``(lB4-A4)^-1 G1 = G1 (lB1-S1)^-1``,
    ``(lB1-S1)^-1 F1 = F1 (lB4-A4)^-1``.
    """
    return _hypotheses_from(schur_complement(bp, lam, complement))


def _hypotheses_from(sd: SchurData) -> HypothesisReport:
    rep = _hypotheses_batch([sd])[0]
    if rep is None:
        raise SchurSingular(f"Schur complement ({sd.complement}) is singular at lambda={sd.lam!r}")
    return rep


def _norms(stack: np.ndarray) -> np.ndarray:
    """Spectral norms of a stack of square matrices."""
    return np.linalg.svd(stack, compute_uv=False)[:, 0]


def _hypotheses_batch(sds: Sequence[SchurData]) -> List[Optional[HypothesisReport]]:
    """Hypothesis reports for many points at once; ``None`` where the Schur pencil is singular."""
    out: List[Optional[HypothesisReport]] = [None] * len(sds)
    if not sds:
        return out
    complement = sds[0].complement
    T = np.stack([sd.schur_matrix for sd in sds])
    sv = np.linalg.svd(T, compute_uv=False)
    scale = np.linalg.norm(T, axis=(1, 2))
    idx = [i for i in range(len(sds)) if not (scale[i] == 0 or sv[i, -1] <= SCHUR_RTOL * scale[i])]
    if not idx:
        return out
    I = np.eye(T.shape[1], dtype=np.complex128)
    RS = np.stack([lu_solve(T[i], I) for i in idx])
    RP = np.stack([sds[i].pivot_inverse for i in idx])
    F = np.stack([sds[i].F for i in idx])
    G = np.stack([sds[i].G for i in idx])
    nF, nG, nRS, nRP = _norms(F), _norms(G), _norms(RS), _norms(RP)
    gf, fg = _norms(G @ F), _norms(F @ G)
    if complement == SECOND:
        gi, fi = _norms(G @ RS - RP @ G), _norms(F @ RP - RS @ F)
    else:
        gi, fi = _norms(RP @ G - G @ RS), _norms(RS @ F - F @ RP)
    tiny = 1e-300
    for j, i in enumerate(idx):
        big = max(nRS[j], nRP[j])
        res = {
            "GF": float(gf[j] / max(nG[j] * nF[j], tiny)),
            "FG": float(fg[j] / max(nF[j] * nG[j], tiny)),
            "G_intertwine": float(gi[j] / max(nG[j] * big, tiny)),
            "F_intertwine": float(fi[j] / max(nF[j] * big, tiny)),
        }
        ok = {k: (v <= HYPOTHESIS_RTOL) for k, v in res.items()}
        # a zero factor satisfies every condition it appears in
        if nG[j] == 0:
            ok.update(GF=True, FG=True, G_intertwine=True)
        if nF[j] == 0:
            ok.update(GF=True, FG=True, F_intertwine=True)
        out[i] = HypothesisReport(ok["GF"], ok["FG"], ok["G_intertwine"], ok["F_intertwine"], res)
    return out


# --- enclosure sweeps -----------------------------------------------------

def pivot_pencil(bp: BlockPencil, complement: str) -> Pencil:
    return Pencil(bp.A4, bp.B4) if complement == FIRST else Pencil(bp.A1, bp.B1)


def _log_norm_power_inverses(Ts: Sequence[np.ndarray], n: int) -> np.ndarray:
    """``log ||T^-2^n||^(1/2^n)`` for each matrix; ``inf`` where T is singular."""
    out = np.full(len(Ts), math.inf)
    good, inverses = [], []
    for i, T in enumerate(Ts):
        f = lu_factor(T)
        if not f.singular:
            good.append(i)
            inverses.append(lu_solve(T, np.eye(T.shape[0], dtype=np.complex128), factors=f))
    if good:
        out[good] = np.asarray(scaled_square_power(np.stack(inverses), n)) / 2.0 ** n
    return out


@dataclass
class PointRecord:
    lam: complex
    r_full: float
    r_pivot: float
    r_schur: float
    delta1: float
    delta2: float
    inflation: float
    hypotheses: Optional[bool]
    members: Dict[str, bool]
    satisfied: Dict[str, bool]


@dataclass
class EnclosureReport:
    complement: str
    n: int
    epsilons: List[float]
    bound: str
    sup_radius: bool
    checked: Dict[str, int] = field(default_factory=dict)
    violations: Dict[str, int] = field(default_factory=dict)
    skipped_pivot: int = 0
    skipped_hypotheses: int = 0
    records: List[PointRecord] = field(default_factory=list)

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())

    def to_json(self, include_points: bool = True) -> str:
        def num(x):
            if isinstance(x, complex):
                return [num(x.real), num(x.imag)]
            if math.isinf(x):
                return "inf"
            return float("%.17g" % x)

        payload = {
            "complement": self.complement,
            "n": self.n,
            "epsilons": self.epsilons,
            "bound": self.bound,
            "sup_radius": self.sup_radius,
            "checked": self.checked,
            "violations": self.violations,
            "skipped_pivot_singular": self.skipped_pivot,
            "skipped_hypotheses": self.skipped_hypotheses,
        }
        if include_points:
            payload["points"] = [
                {
                    "lambda": num(r.lam),
                    "r_full": num(r.r_full),
                    "r_pivot": num(r.r_pivot),
                    "r_schur": num(r.r_schur),
                    "delta1": num(r.delta1),
                    "delta2": num(r.delta2),
                    "inflation": num(r.inflation),
                    "hypotheses": r.hypotheses,
                    "member": r.members,
                    "satisfied": r.satisfied,
                }
                for r in self.records
            ]
        return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def enclosure_sweep(
    bp: BlockPencil,
    lams: Sequence[complex],
    epsilons: Sequence[float],
    complement: str = SECOND,
    n: int = 0,
    bound: str = "paper",
    sup_radius: bool = False,
) -> EnclosureReport:
    """Check the pointwise block enclosure at every ``lambda`` in ``lams``.

    A point with ``r_n(full) >= 1/eps`` satisfies the enclosure when the pivot
    pencil or the Schur pencil ``(S(lambda), pivot B)``, evaluated at the same
    lambda, has ``r_n >= 1/(eps * inflation)``. Points with a singular pivot
    are skipped. For ``n >= 1`` points where :func:`verify_hypotheses` fails
    are skipped too. ``bound`` selects ``"paper"`` (``1 + d^k``) or
    ``"commuting"`` (``1 + k d``). ``sup_radius`` replaces the pointwise
    inflation by its maximum over all non-skipped points.
    """
    _check_complement(complement)
    if bound not in ("paper", "commuting"):
        raise ValueError(f"bound must be 'paper' or 'commuting', got {bound!r}")
    eps_list = [float(e) for e in epsilons]
    rep = EnclosureReport(complement, n, eps_list, bound, sup_radius)
    rep.checked = {str(e): 0 for e in eps_list}
    rep.violations = {str(e): 0 for e in eps_list}
    lams = list(np.atleast_1d(np.asarray(lams, dtype=np.complex128)))
    full_logs = log_resolvent_norms(assemble(bp), lams, n)
    kept = []
    for lam, log_full in zip(lams, full_logs):
        try:
            kept.append((complex(lam), float(log_full), schur_complement(bp, complex(lam), complement)))
        except AtPivotSpectrum:
            rep.skipped_pivot += 1
    hyps = [None] * len(kept)
    if n >= 1 and kept:
        reports = _hypotheses_batch([k[2] for k in kept])
        # a singular Schur pencil means lambda is an eigenvalue; the hypotheses are vacuous there
        hyps = [True if r is None else r.all_hold for r in reports]
        rep.skipped_hypotheses = hyps.count(False)
        kept = [k for k, h in zip(kept, hyps) if h]
        hyps = [True] * len(kept)
    pending = []
    if kept:
        sds = [k[2] for k in kept]
        d1s = _norms(np.stack([sd.G for sd in sds]))
        d2s = _norms(np.stack([sd.F for sd in sds]))
        log_pivs = np.asarray(scaled_square_power(np.stack([sd.pivot_inverse for sd in sds]), n)) / 2.0 ** n
        log_schurs = _log_norm_power_inverses([sd.schur_matrix for sd in sds], n)
        k = 2.0 ** n
        for (lam, log_full, _), d1, d2, lp, ls, hyp in zip(kept, d1s, d2s, log_pivs, log_schurs, hyps):
            d1, d2 = float(d1), float(d2)
            if bound == "paper":
                infl = _level_inflation(d1, d2, n)
            else:
                infl = math.exp((math.log1p(k * d1) + math.log1p(k * d2)) / k)
            pending.append((lam, log_full, float(lp), float(ls), (d1, d2), infl, hyp if n >= 1 else None))
    if sup_radius and pending:
        top = max(p[5] for p in pending)
        pending = [p[:5] + (top,) + p[6:] for p in pending]
    for lam, log_full, log_piv, log_schur, (d1, d2), infl, hyp in pending:
        members, sat = {}, {}
        for eps in eps_list:
            key = str(eps)
            member = log_full >= -math.log(eps)
            members[key] = bool(member)
            if not member:
                continue
            rep.checked[key] += 1
            target = -math.log(eps * infl)
            # small relative slack for rounding in the norm evaluations
            ok = max(log_piv, log_schur) >= target - 1e-12
            sat[key] = bool(ok)
            if not ok:
                rep.violations[key] += 1
        rep.records.append(PointRecord(
            lam, math.exp(min(log_full, 709)), math.exp(min(log_piv, 709)),
            math.exp(min(log_schur, 709)), d1, d2, infl, hyp, members, sat))
    return rep


# --- CPENCIL-BLOCK v1 -----------------------------------------------------

def format_block_pencil(bp: BlockPencil) -> str:
    return f"block {bp.m}\n" + "".join(format_matrix(M) for M in bp.blocks())


def parse_block_pencil(text: str, path=None) -> BlockPencil:
    lines = significant_lines(text)
    try:
        if not lines:
            raise ParseError("empty block pencil file", 1)
        head = lines[0].split()
        if len(head) != 2 or head[0] != "block":
            raise ParseError(f"expected header 'block m', got {lines[0]!r}", 1)
        try:
            m = int(head[1])
        except ValueError:
            raise ParseError(f"bad block size {head[1]!r}", 1) from None
        mats = []
        nxt = 1
        for _ in range(8):
            start = nxt
            M, nxt = read_matrix_block(lines, nxt)
            if M.shape != (m, m):
                raise ParseError(f"block has shape {M.shape}, header says {m}", start + 1)
            mats.append(M)
        if nxt != len(lines):
            raise ParseError("trailing content after block pencil", nxt + 1)
    except ParseError as exc:
        raise ParseError(exc.message, exc.line, path) from None
    return BlockPencil(*mats)


def write_block_pencil(path, bp: BlockPencil) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_block_pencil(bp))


def read_block_pencil(path) -> BlockPencil:
    with open(path, encoding="utf-8") as fh:
        return parse_block_pencil(fh.read(), path=path)
