"""Command-line interface: spectrum tables, index reports and verification suites.

Usage:
    dolbeault-spectra spectrum --sphere s4 --sector 0 --m=-2:2 --s 0:1 --n-max 3
    dolbeault-spectra spectrum --sphere s6 --sector 3 --p 0 --q 0:2 --format csv
    dolbeault-spectra index --sphere s4 --twist 2
    dolbeault-spectra verify pairing

Exit codes: 0 success, 1 failed verification check, 2 invalid configuration
or unsupported sector, 3 oracle mismatch under `spectrum --verify`.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .config import DEFAULT_TOLERANCES, Tolerances
from .harmonic_tensors import InvalidLabels
from .radial_spectra import (
    MINUS,
    PLUS,
    ConvergenceError,
    ModeKey,
    UnsupportedSectorError,
    classify,
    closed_form,
    collocation_eigenvalues,
    supported_sectors,
)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_ORACLE = 0, 1, 2, 3

SPHERES = {"s4": 2, "s6": 3}
LABEL_NAMES = {2: ("m", "s"), 3: ("p", "q")}
FLAG_NAMES = ("square_integrable", "regular_on_sphere", "independent_branch", "q_image_class", "admitted")
CSV_FIELDS = ("l1", "l2", "n", "branch", "gamma", "delta", "alpha", "beta", "lambda", "degeneracy") + FLAG_NAMES


class ConfigError(ValueError):
    def __init__(self, message: str, kind: str = "invalid_config"):
        super().__init__(message)
        self.kind = kind


@dataclass
class RunConfig:
    sphere: str
    sector: int = 0
    label_ranges: tuple = ((0, 0), (0, 0))
    n_max: int = 0
    twist: int = 1
    grid: int | None = None
    tolerances: Tolerances = field(default_factory=lambda: DEFAULT_TOLERANCES)
    fmt: str = "json"
    out: str | None = None
    all_branches: bool = False

    @property
    def d(self) -> int:
        return SPHERES[self.sphere]

    def families(self):
        (a0, a1), (b0, b1) = self.label_ranges
        return [(self.d, self.sector, (x, y)) for x in range(a0, a1 + 1) for y in range(b0, b1 + 1)]


def parse_range(text: str) -> tuple:
    """'3' -> (3, 3); '-2:2' -> (-2, 2), inclusive."""
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"cannot parse range {text!r}; expected N or A:B") from None
    if lo > hi:
        raise ConfigError(f"empty range {text!r}", "empty_range")
    return lo, hi


def _worker_count() -> int:
    raw = os.environ.get("DOLBEAULT_SPECTRA_THREADS")
    cap = os.cpu_count() or 1
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            raise ConfigError(f"DOLBEAULT_SPECTRA_THREADS must be an integer, got {raw!r}") from None
    return cap


def _tolerances(value) -> Tolerances:
    if value is None:
        return DEFAULT_TOLERANCES
    if not value > 0:
        raise ConfigError(f"tolerance must be positive, got {value}")
    return DEFAULT_TOLERANCES.scaled(eigen_rel=value)


def config_from_args(args) -> RunConfig:
    d = SPHERES[args.sphere]
    if args.sector not in supported_sectors(d):
        if 0 <= args.sector <= d:
            raise ConfigError(
                f"unsupported: sector F={args.sector} on S^{2 * d} is an open problem with no "
                f"closed-form radial reduction; supported sectors are {list(supported_sectors(d))}",
                "unsupported_sector",
            )
        raise ConfigError(f"sector must lie in 0..{d} for {args.sphere}, got {args.sector}")
    if args.twist != 1:
        raise ConfigError("spectrum tables cover the untwisted complex only (--twist 1)")
    names = LABEL_NAMES[d]
    other = LABEL_NAMES[5 - d]
    for nm in other:
        if getattr(args, nm) is not None and nm not in names:
            raise ConfigError(f"--{nm} does not apply to {args.sphere}; use --{names[0]}/--{names[1]}")
    ranges = tuple(parse_range(getattr(args, nm) or "0") for nm in names)
    if args.n_max < 0:
        raise ConfigError(f"--n-max must be nonnegative, got {args.n_max}", "empty_range")
    if args.grid is not None and args.grid < 4 * (args.n_max + 1):
        raise ConfigError(f"--grid must be at least 4*(n_max+1) = {4 * (args.n_max + 1)}")
    cfg = RunConfig(
        sphere=args.sphere,
        sector=args.sector,
        label_ranges=ranges,
        n_max=args.n_max,
        twist=args.twist,
        grid=args.grid,
        tolerances=_tolerances(args.tolerance),
        fmt=args.format,
        out=args.out,
        all_branches=args.all_branches,
    )
    for fam in cfg.families():
        try:
            ModeKey(*fam)
        except (InvalidLabels, ValueError) as exc:
            raise ConfigError(f"invalid labels {fam[2]}: {exc}") from None
    return cfg


# spectrum -------------------------------------------------------------------


def _family_rows(cfg: RunConfig, family):
    d, F, labels = family
    names = LABEL_NAMES[d]
    rows = []
    for n in range(cfg.n_max + 1):
        for branch in (PLUS, MINUS):
            key = ModeKey(d, F, labels, n, branch)
            rep = classify(key)
            if not (rep.admitted or cfg.all_branches):
                continue
            sol = closed_form(key)
            row = {
                "labels": {names[0]: labels[0], names[1]: labels[1]},
                "n": n,
                "branch": branch,
                "gamma": float(sol.gamma),
                "delta": float(sol.delta),
                "alpha": int(sol.jacobi_alpha),
                "beta": float(sol.jacobi_beta),
                "lambda": float(sol.lam),
                "degeneracy": int(sol.degeneracy),
            }
            row.update(rep.as_dict())
            rows.append(row)
    return rows


def _family_oracle(cfg: RunConfig, family, rows):
    """Largest relative mismatch between admitted closed-form rows and the oracle."""
    admitted = [r for r in rows if r["admitted"]]
    if not admitted:
        return 0.0
    k = cfg.n_max + 1
    N = cfg.grid or 4 * k
    ev = collocation_eigenvalues(family, N, k, rtol=cfg.tolerances.eigen_rel)
    worst = 0.0
    for r in admitted:
        lam = r["lambda"]
        ref = ev[r["n"]] if r["branch"] == PLUS else min(ev, key=lambda e: abs(e - lam))
        worst = max(worst, abs(ref - lam) / max(abs(lam), 1.0))
    return worst


def _sort_key(row):
    return (row["lambda"], tuple(row["labels"].values()), row["n"], row["branch"])


def build_spectrum(cfg: RunConfig, verify: bool = False):
    """Rows sorted by eigenvalue, plus per-family oracle mismatches when verify is set."""
    fams = cfg.families()

    def job(fam):
        rows = _family_rows(cfg, fam)
        if not verify:
            return rows, None
        try:
            return rows, _family_oracle(cfg, fam, rows)
        except ConvergenceError as exc:
            return rows, exc

    with ThreadPoolExecutor(max_workers=min(_worker_count(), len(fams))) as pool:
        results = list(pool.map(job, fams))
    rows = sorted((r for rs, _ in results for r in rs), key=_sort_key)
    checks = [(fam, res) for fam, (_, res) in zip(fams, results)] if verify else []
    return rows, checks


def _meta(cfg_sphere, sector, twist, tol: Tolerances) -> dict:
    return {
        "sphere": cfg_sphere,
        "sector": sector,
        "twist": twist,
        "tool_version": __version__,
        "tolerances": tol.as_dict(),
    }


def render_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        (n1, v1), (n2, v2) = r["labels"].items()
        flat = {k: r[k] for k in CSV_FIELDS[2:]}
        flat.update(l1=f"{n1}={v1}", l2=f"{n2}={v2}")
        for k in ("gamma", "delta", "beta", "lambda"):
            flat[k] = repr(flat[k])
        writer.writerow(flat)
    return buf.getvalue()


def parse_csv_rows(text: str):
    """Inverse of rows_to_csv: rows equal to the JSON encoding."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        labels = {}
        for col in ("l1", "l2"):
            name, val = rec[col].split("=")
            labels[name] = int(val)
        row = {"labels": labels, "n": int(rec["n"]), "branch": rec["branch"]}
        for k in ("gamma", "delta"):
            row[k] = float(rec[k])
        row["alpha"] = int(rec["alpha"])
        row["beta"] = float(rec["beta"])
        row["lambda"] = float(rec["lambda"])
        row["degeneracy"] = int(rec["degeneracy"])
        for k in ("square_integrable", "regular_on_sphere", "independent_branch", "admitted"):
            row[k] = rec[k] == "True"
        row["q_image_class"] = rec["q_image_class"]
        rows.append({k: row[k] for k in ("labels",) + CSV_FIELDS[2:]})
    return rows


def rows_to_text(rows) -> str:
    head = f"{'labels':>10} {'n':>3} {'branch':>6} {'gamma':>8} {'Delta':>8} {'alpha':>5} " \
           f"{'beta':>8} {'lambda':>12} {'deg':>5}  q-image"
    lines = [head]
    for r in rows:
        lab = ",".join(f"{k}={v}" for k, v in r["labels"].items())
        lines.append(
            f"{lab:>10} {r['n']:>3} {r['branch']:>6} {r['gamma']:>8.4g} {r['delta']:>8.4g} "
            f"{r['alpha']:>5} {r['beta']:>8.4g} {r['lambda']:>12.8g} {r['degeneracy']:>5}  "
            f"{r['q_image_class']}{'' if r['admitted'] else ' (rejected)'}"
        )
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_spectrum(args) -> int:
    cfg = config_from_args(args)
    rows, checks = build_spectrum(cfg, verify=args.verify)
    if cfg.fmt == "json":
        text = render_json({"meta": _meta(cfg.sphere, cfg.sector, cfg.twist, cfg.tolerances), "rows": rows})
    elif cfg.fmt == "csv":
        text = rows_to_csv(rows)
    else:
        text = rows_to_text(rows)
    _emit(text, cfg.out)
    status = EXIT_OK
    for fam, res in checks:
        if isinstance(res, Exception) or res > cfg.tolerances.eigen_rel:
            rec = {"check": "oracle", "family": list(fam[:2]) + [list(fam[2])], "passed": False,
                   "value": None if isinstance(res, Exception) else res,
                   "tolerance": cfg.tolerances.eigen_rel}
            if isinstance(res, Exception):
                rec["detail"] = str(res)
            sys.stderr.write(json.dumps(rec) + "\n")
            status = EXIT_ORACLE
    return status


# index ----------------------------------------------------------------------


def build_index(sphere: str, twist: int) -> dict:
    from .susy_index import witten_index

    d = SPHERES[sphere]
    if d == 3 and twist != 1:
        raise ConfigError("the twisted family is available on s4 only; use --twist 1 on s6",
                          "unsupported_twist")
    rep = witten_index(d, twist)
    doc = {"meta": _meta(sphere, None, twist, DEFAULT_TOLERANCES)}
    body = rep.as_dict()
    body.pop("twist")
    body.pop("d")
    doc.update(body)
    doc["geometry_numeric"] = rep.geometry_numeric
    return doc


def cmd_index(args) -> int:
    doc = build_index(args.sphere, args.twist)
    if args.format == "json":
        text = render_json(doc)
    elif args.format == "csv":
        buf = io.StringIO()
        fields = ("sphere", "twist", "counting", "geometry", "geometry_exact", "discrepancy", "formula")
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerow({"sphere": args.sphere, "twist": args.twist, **{k: doc[k] for k in fields[2:]}})
        text = buf.getvalue()
    else:
        text = (
            f"sphere {args.sphere}, twist {args.twist}\n"
            f"  index by counting : {doc['counting']}\n"
            f"  index by geometry : {doc['geometry_exact']}\n"
            f"  discrepancy       : {doc['discrepancy']}\n"
            f"  zero modes        : {doc['zero_modes_by_sector']}\n"
        )
    _emit(text, args.out)
    return EXIT_OK


# verify ---------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .suites import run_suite

    if args.tolerance is not None and not args.tolerance > 0:
        raise ConfigError(f"tolerance must be positive, got {args.tolerance}")
    status = EXIT_OK
    lines = []
    for rec in run_suite(args.suite, override=args.tolerance):
        line = json.dumps(rec.as_dict(), allow_nan=False)
        lines.append(line + "\n")
        if not rec.passed:
            sys.stderr.write("FAILED " + line + "\n")
            status = EXIT_CHECK
    _emit("".join(lines), args.out)
    return status


# entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .suites import SUITES

    parser = argparse.ArgumentParser(
        prog="dolbeault-spectra",
        description="Spectra, zero modes and Witten indices of the Dolbeault Laplacian on punctured S^4 and S^6.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="closed-form spectrum table")
    sp.add_argument("--sphere", choices=sorted(SPHERES), default="s4")
    sp.add_argument("--sector", type=int, default=0, help="fermion number F")
    sp.add_argument("--m", help="s4 label m, N or A:B (write --m=-2:2 for negative starts)")
    sp.add_argument("--s", help="s4 label s, N or A:B")
    sp.add_argument("--p", help="s6 holomorphic degree, N or A:B")
    sp.add_argument("--q", help="s6 antiholomorphic degree, N or A:B")
    sp.add_argument("--n-max", type=int, default=3)
    sp.add_argument("--twist", type=int, default=1)
    sp.add_argument("--grid", type=int, default=None, help="oracle basis size (default 4*(n_max+1))")
    sp.add_argument("--tolerance", type=float, default=None, help="oracle relative tolerance")
    sp.add_argument("--verify", action="store_true", help="cross-check against the spectral oracle")
    sp.add_argument("--all-branches", action="store_true", help="include rejected formal solutions")
    sp.add_argument("--format", choices=("json", "csv", "text"), default="json")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_spectrum)

    ip = sub.add_parser("index", help="zero-mode count against the Chern integral")
    ip.add_argument("--sphere", choices=sorted(SPHERES), default="s4")
    ip.add_argument("--twist", type=int, default=1)
    ip.add_argument("--format", choices=("json", "csv", "text"), default="json")
    ip.add_argument("--out", default=None)
    ip.set_defaults(func=cmd_index)

    vp = sub.add_parser("verify", help="run a verification suite")
    vp.add_argument("suite", choices=SUITES + ("all",))
    vp.add_argument("--tolerance", type=float, default=None, help="override every suite tolerance")
    vp.add_argument("--out", default=None)
    vp.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnsupportedSectorError) as exc:
        kind = getattr(exc, "kind", "unsupported_sector")
        sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
