"""Named verification suites shared by the CLI and the test-suite.

Each suite yields CheckRecord items; a suite passes when every record does.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .orthopoly import reduction_identity_residual

SUITES = ("oracle", "pairing", "identity", "zero-modes", "geometry")

__all__ = ["CheckRecord", "SUITES", "run_suite", "oracle_families"]


@dataclass(frozen=True)
class CheckRecord:
    suite: str
    check: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        out = asdict(self)
        if not math.isfinite(out["value"]):
            out["value"] = None  # keep JSON lines strict
        return out


def _rec(suite, check, value, tol, passed=None, detail=""):
    value = float(value)
    ok = (value <= tol) if passed is None else bool(passed)
    return CheckRecord(suite, check, value, float(tol), ok, detail)


def oracle_families():
    fams = [(2, F, (m, s)) for F in (0, 2) for m in range(-3, 4) for s in range(3)]
    fams += [(3, F, (p, q)) for F in (0, 3) for p in range(4) for q in range(4)]
    return fams


def _oracle(tol: Tolerances, override):
    from .radial_spectra import ConvergenceError, ModeKey, classify, closed_form, collocation_eigenvalues

    eps = tol.eigen_rel if override is None else override
    n_max = 5
    for fam in oracle_families():
        d, F, labels = fam
        admitted = []
        for n in range(n_max + 1):
            for branch in ("plus", "minus"):
                key = ModeKey(d, F, labels, n, branch)
                if classify(key).admitted:
                    admitted.append(key)
        try:
            ev = collocation_eigenvalues(fam, 4 * (n_max + 1), n_max + 1, rtol=eps)
        except ConvergenceError as exc:
            yield _rec("oracle", f"d={d} F={F} labels={labels}", math.inf, eps, False, str(exc))
            continue
        worst = 0.0
        for key in admitted:
            lam = closed_form(key).lam
            # admitted modes are plus-branch, ordered by n
            worst = max(worst, abs(ev[key.n] - lam) / max(abs(lam), 1.0))
        yield _rec("oracle", f"d={d} F={F} labels={labels}", worst, eps)


def _pairing(tol: Tolerances, override):
    from .susy_index import lowest_admitted_modes, pairing_ratio
    from .radial_spectra import closed_form

    eps = tol.pairing if override is None else override
    for d, count in ((2, 20), (3, 10)):
        worst = 0.0
        for key in lowest_admitted_modes(d, count):
            lam = closed_form(key).lam
            worst = max(worst, abs(pairing_ratio(key) - lam) / lam)
        yield _rec("pairing", f"d={d} lowest {count} F=0 modes", worst, eps)


def _identity(tol: Tolerances, override):
    from .radial_spectra import ModeKey, eigenfunction_eval, reduced_partner

    eps = tol.identity if override is None else override
    z = np.linspace(-1.0, 1.0, 101)[1:]
    worst = 0.0
    for alpha in range(7):
        for beta in range(5):
            for n in range(7):
                worst = max(worst, reduction_identity_residual(n, alpha, beta, z))
    yield _rec("identity", "reduction identity alpha<=6 beta<=4 n<=6", worst, eps)
    worst = 0.0
    for n in range(7):
        key = ModeKey(2, 0, (-1, 0), n, "minus")
        partner = reduced_partner(key)
        target = eigenfunction_eval(key.with_(branch="plus"), z) if partner is None else (
            partner[1] * eigenfunction_eval(partner[0], z)
        )
        worst = max(worst, float(np.max(np.abs(eigenfunction_eval(key, z) - target))))
    yield _rec("identity", "minus branch (m,s)=(-1,0) equals plus branch", worst, eps)


def _zero_modes(tol: Tolerances, override):
    from .susy_index import zero_modes_pure, zero_modes_twisted

    eps = tol.annihilation if override is None else override
    for d, expect in ((2, 3), (3, 10), (4, 35), (5, 126)):
        basis = zero_modes_pure(d)
        ok = basis.count == expect == math.comb(2 * d - 1, d - 1)
        yield _rec("zero-modes", f"pure d={d} count", basis.count, expect, ok)
        if d <= 3:
            chk = basis.verify(eps)
            yield _rec("zero-modes", f"pure d={d} annihilation", chk["max_residual"], eps,
                       chk["annihilated"] and chk["normalizable"])
    for q in range(-3, 4):
        basis = zero_modes_twisted(q)
        expect = 2 * q * q + abs(q) if q else 0
        counting = basis.count  # F = 0 for q > 0, F = 2 for q < 0: both even
        yield _rec("zero-modes", f"twisted q={q} count", counting, expect, counting == expect)
        if basis.count:
            chk = basis.verify(eps)
            yield _rec("zero-modes", f"twisted q={q} annihilation", chk["max_residual"], eps,
                       chk["annihilated"] and chk["normalizable"])


def _geometry(tol: Tolerances, override):
    from . import index_quadrature as iq
    from . import sphere_geometry as sg

    for q in (1, 2, 3):
        v = iq.chern2(q)
        yield _rec("geometry", f"chern2 q={q}", abs(v - 2 * q * q), tol.chern2 if override is None else override)
    yield _rec("geometry", "chern3", abs(iq.chern3() - 4.5), tol.chern3 if override is None else override)

    cut = np.geomspace(10.0, 1e4, 7)
    scan = sg.gauge_action_scan(sg.TwistModel(1), cut)
    x = np.log([s[0] for s in scan])
    y = np.array([s[1] for s in scan])
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    r2 = 1.0 - resid @ resid / ((y - y.mean()) @ (y - y.mean()))
    yield _rec("geometry", "gauge action R^2 against ln cutoff", r2, tol.r2, r2 >= tol.r2)

    rs = np.geomspace(1e2, 1e4, 5)
    u = np.array([0.3, -0.5, 0.7, 0.2])
    u /= np.linalg.norm(u)
    decay = sg.loglog_slope(rs, [np.max(np.abs(sg.real_torsion(r * u))) for r in rs])
    yield _rec("geometry", "torsion decay exponent", abs(decay + 5.0), tol.exponent)
    growth = sg.loglog_slope(rs, [sg.torsion_contraction(r * u) for r in rs])
    yield _rec("geometry", "torsion contraction growth", abs(growth - 2.0), tol.exponent)

    rng = np.random.default_rng(7)
    pts = rng.uniform(-10, 10, size=(100, 4))
    pts = pts[np.linalg.norm(pts, axis=1) <= 10.0]
    yield _rec("geometry", "B_MN max", iq.b_field_strength_max(pts), tol.b_field if override is None else override)
    worst = max(abs(v) / max(s, 1.0) for v, s in iq.signature_density(pts[:30]))
    yield _rec("geometry", "signature density", worst, tol.signature if override is None else override)
    rows = iq.k_term_cancellation((10.0, 1e2, 1e3))
    row = rows[-1]
    yield _rec("geometry", "K flux cancellation at R=1e3", abs(row.total) / row.piece_scale,
               tol.k_cancel if override is None else override)


_RUNNERS = {
    "oracle": _oracle,
    "pairing": _pairing,
    "identity": _identity,
    "zero-modes": _zero_modes,
    "geometry": _geometry,
}


def run_suite(name: str, tol: Tolerances | None = None, override: float | None = None):
    tol = tol or DEFAULT_TOLERANCES
    names = SUITES if name == "all" else (name,)
    for nm in names:
        if nm not in _RUNNERS:
            raise ValueError(f"unknown suite {nm!r}")
        yield from _RUNNERS[nm](tol, override)
