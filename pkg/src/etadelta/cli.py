"""Command-line front end: expansion, representative construction, the
delta pipeline, verification suites, and combined reports.

Reports are structured documents (json by default) with every rational as
an exact "num/den" string and every p-adic value as a (valuation, unit,
precision) triple, so nothing is lost in serialization.  Expansions are
cached as checksummed plain-text files keyed by (name, domain, prec);
writes are atomic (write-temp-then-rename).

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 resource exhaustion.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .qseries import RATIONAL, LaurentSeries, OperatorContext, serialize
from .etaforms import (build_basis, euler_product_expansion, gamma0_index,
                       level9_catalog, valence_degree)
from .cohomology import (Certificate, construct_representative,
                         hecke_class_check, pairing)
from .padiclimit import (DEFAULT_M_MAX, check_inert, delta_approximants,
                         even_power_vanishing_check)

VERSION = "0.1.0"
CACHE_ENV = "ETADELTA_CACHE_DIR"

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3


@dataclass
class RunConfig:
    level: int = 9
    weight: int = 4
    primes: tuple = (5, 11)
    m_max: dict = field(default_factory=dict)  # per-prime override
    M: int = 6
    pole_orders: tuple = (1,)
    cache_dir: str = ""
    fmt: str = "json"
    jobs: int = 1

    def m_max_for(self, p):
        return self.m_max.get(p, DEFAULT_M_MAX.get(p, 2))

    def validate(self):
        """Every violation listed before any computation starts."""
        problems = []
        if self.level != 9:
            problems.append("level %d: only N = 9 runs the delta pipeline"
                            % self.level)
        for p in self.primes:
            if p < 5:
                problems.append("p = %d < 5 (standing assumption)" % p)
            elif (6 * self.level) % p == 0:
                problems.append("p = %d divides 6N" % p)
            elif not check_inert(p):
                problems.append("p = %d splits in Q(sqrt(-3)) "
                                "(need p = 2 mod 3)" % p)
        if self.fmt not in ("json", "csv", "text"):
            problems.append("unknown format %r" % self.fmt)
        for m in self.pole_orders:
            if m < 1:
                problems.append("pole order %d < 1" % m)
        if self.M < 1:
            problems.append("M must be >= 1")
        return problems

    def echo(self):
        return {"level": self.level, "weight": self.weight,
                "primes": list(self.primes),
                "m_max": {str(p): self.m_max_for(p) for p in self.primes},
                "M": self.M, "pole_orders": list(self.pole_orders),
                "format": self.fmt, "jobs": self.jobs}


def load_config(path: str) -> dict:
    """Flat key=value text file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError("bad config line: %r" % line)
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def build_run_config(args) -> RunConfig:
    cfg = RunConfig()
    file_vals = load_config(args.config) if getattr(args, "config", None) else {}

    def pick(flag, key, conv, default):
        if getattr(args, flag, None) is not None:
            return conv(getattr(args, flag))
        if key in file_vals:
            return conv(file_vals[key])
        return default

    primes = pick("p", "primes",
                  lambda s: tuple(int(x) for x in str(s).split(",")),
                  cfg.primes)
    m_max = {}
    for key, val in file_vals.items():
        if key.startswith("m_max."):
            m_max[int(key.split(".")[1])] = int(val)
    if getattr(args, "mmax", None) is not None:
        for p in primes:
            m_max[p] = args.mmax
    return RunConfig(
        level=int(file_vals.get("level", cfg.level)),
        weight=int(file_vals.get("weight", cfg.weight)),
        primes=primes,
        m_max=m_max,
        M=pick("M", "M", int, cfg.M),
        pole_orders=pick("pole", "pole_orders",
                         lambda s: tuple(int(x) for x in str(s).split(",")),
                         cfg.pole_orders),
        cache_dir=pick("cache_dir", "cache_dir", str, cfg.cache_dir),
        fmt=pick("format", "format", str, cfg.fmt),
        jobs=pick("jobs", "jobs", int, cfg.jobs),
    )


@dataclass
class ReportEnvelope:
    version: str
    config: dict
    delta_reports: list = field(default_factory=list)
    verification: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        return {"version": self.version, "config": self.config,
                "delta_reports": self.delta_reports,
                "verification": self.verification,
                "timings": self.timings}


# -- cache -----------------------------------------------------------------

def cache_dir_for(config_dir: str) -> str:
    return (config_dir or os.environ.get(CACHE_ENV)
            or os.path.join(os.path.expanduser("~"), ".cache", "etadelta"))


def _cache_path(directory, key):
    return os.path.join(directory, key + ".txt")


def cache_store(directory: str, key: str, body: str):
    os.makedirs(directory, exist_ok=True)
    digest = hashlib.sha256(body.encode()).hexdigest()
    tmp = _cache_path(directory, key) + ".tmp.%d" % os.getpid()
    with open(tmp, "w") as fh:
        fh.write("sha256=%s\n" % digest)
        fh.write(body)
    os.replace(tmp, _cache_path(directory, key))


def cache_load(directory: str, key: str):
    path = _cache_path(directory, key)
    try:
        with open(path) as fh:
            header = fh.readline().strip()
            body = fh.read()
    except OSError:
        return None
    if header != "sha256=%s" % hashlib.sha256(body.encode()).hexdigest():
        return None  # corrupted entry: treat as a miss
    return body


# -- subcommands -----------------------------------------------------------

def cmd_expand(args) -> int:
    catalog = level9_catalog()
    if args.name not in catalog:
        print("unknown form %r; catalog: %s"
              % (args.name, ", ".join(sorted(catalog))), file=sys.stderr)
        return EXIT_CONFIG
    directory = cache_dir_for(args.cache_dir or "")
    key = "expand_%s_rational_%d" % (args.name, args.prec)
    body = cache_load(directory, key)
    if body is None:
        body = serialize(catalog[args.name].expansion(args.prec))
        cache_store(directory, key, body)
    if args.format == "json":
        series_lines = body.strip().splitlines()
        terms = [ln.split() for ln in series_lines[1:]]
        print(json.dumps({"name": args.name, "prec": args.prec,
                          "terms": [[int(n), c] for n, c in terms]}))
    else:
        sys.stdout.write(body)
    return EXIT_OK


def cmd_represent(args) -> int:
    prec = args.prec if args.prec is not None else max(60, 30)
    try:
        phi = construct_representative(args.pole, prec)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    directory = cache_dir_for(args.cache_dir or "")
    key = "represent_pole%d_prec%d" % (args.pole, prec)
    body = phi.to_text() + serialize(phi.representative)
    cache_store(directory, key, body)
    sys.stdout.write(body)
    return EXIT_OK


@dataclass(frozen=True)
class RepHandle:
    """Picklable stand-in carrying exactly what the delta pipeline reads."""

    provenance: tuple
    rep_id: str


def _delta_job(handle, p, m_max, M):
    evens = even_power_vanishing_check(handle, p, m_max)
    report = delta_approximants(handle, p, m_max=m_max, M=M)
    d = report.to_dict()
    d["even_power_check"] = ["inf" if e is None else e for e in evens]
    return d


def _run_delta(config: RunConfig):
    reports = []
    rep_cache = {}
    for m in config.pole_orders:
        phi = construct_representative(m, 60)
        rep_cache[m] = RepHandle(phi.provenance, phi.rep_id)
    jobs = [(rep_cache[m], p, config.m_max_for(p), config.M)
            for p in config.primes for m in config.pole_orders]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(_delta_job, *job) for job in jobs]
            reports = [f.result() for f in futures]
    else:
        reports = [_delta_job(*job) for job in jobs]
    return reports


def cmd_delta(args) -> int:
    config = build_run_config(args)
    problems = config.validate()
    if problems:
        for problem in problems:
            print("config error: %s" % problem, file=sys.stderr)
        return EXIT_CONFIG
    start = time.time()
    try:
        reports = _run_delta(config)
    except MemoryError:
        print("resource exhaustion during expansion", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        # hard failures from the even-power check are verification failures
        print("verification failure: %s" % exc, file=sys.stderr)
        return EXIT_VERIFY
    envelope = ReportEnvelope(VERSION, config.echo(), reports,
                              timings={"total_seconds":
                                       round(time.time() - start, 3)})
    _emit(envelope, config.fmt)
    bad = [r for r in reports if not r["verdict_delta_nonzero"]]
    return EXIT_VERIFY if bad else EXIT_OK


def _emit(envelope: ReportEnvelope, fmt: str):
    if fmt == "json":
        print(json.dumps(envelope.to_dict(), indent=2))
    elif fmt == "csv":
        print("p,representative,m,valuation,unit,precision,exact")
        for rep in envelope.delta_reports:
            for row in rep["approximants"]:
                print("%d,%s,%d,%s,%s,%s,%s"
                      % (rep["p"], rep["representative"], row["m"],
                         row["valuation"], row["unit"], row["precision"],
                         row["exact"] or ""))
    else:
        for rep in envelope.delta_reports:
            print("p=%d rep=%s verdict=%s v_p(delta)=%s residue=%s"
                  % (rep["p"], rep["representative"],
                     rep["verdict_delta_nonzero"], rep["vp_delta"],
                     rep["stabilized_residue"]))
        for name, result in envelope.verification.items():
            print("%s: %s" % (name, "pass" if result["ok"] else
                              "FAIL %s" % result.get("detail")))


# -- verification suites ---------------------------------------------------

def _suite_pairing():
    """Pairing well-definedness: <D^3 phi, psi> = 0 for certified
    weight-(-2) forms phi and weight-4 basis elements psi."""
    catalog = level9_catalog()
    basis_m2 = build_basis(9, -2, 6, catalog, 70, vanish_at_other_cusps=False)
    basis_4 = build_basis(9, 4, 1, catalog, 50)
    # only the cusp elements (zero constant term) lie in S_4^!
    cusp_elems = [(j, psi) for j, psi in enumerate(basis_4.basis)
                  if psi.coefficient(0) == 0]
    failures = []
    for i, phi in enumerate(basis_m2.basis):
        cert_phi = Certificate(9, -2, -phi.n0, Fraction(0), Fraction(0))
        d3 = phi.apply_D(3)
        cert_d3 = Certificate(9, 4, -phi.n0, Fraction(0), Fraction(0))
        for j, psi in cusp_elems:
            cert_psi = Certificate(9, 4, -min(psi.n0, 0), Fraction(1),
                                   Fraction(0))
            val = pairing(d3.truncate(psi.prec), psi, 4, cert_d3, cert_psi)
            if val.value != 0:
                failures.append({"phi_index": i, "psi_index": j,
                                 "value": str(val.value)})
    return {"ok": not failures, "cases": len(basis_m2.basis) * len(cusp_elems),
            "detail": failures}


def _suite_hecke(ls=(2, 5, 7, 13)):
    catalog = level9_catalog()
    ctx = OperatorContext(4, 9)
    failures = []
    checked = 0
    for pole in (1, 2):
        depth = max(ls) * pole + 4
        basis = build_basis(9, -2, depth, catalog, 5 * depth + 40,
                            vanish_at_other_cusps=False)
        phi = construct_representative(pole, (max(ls) * pole + 24) * max(ls))
        for l in ls:
            ok, witness = hecke_class_check(phi, l, ctx, basis)
            checked += 1
            if not ok:
                failures.append({"pole": pole, "l": l,
                                 "witness": str(witness)})
    return {"ok": not failures, "cases": checked, "detail": failures}


def _suite_valence():
    catalog = level9_catalog()
    failures = []
    cases = 0
    for name, form in catalog.items():
        if form.eta is None:
            continue
        cases += 1
        expected = form.eta.weight * Fraction(gamma0_index(form.eta.level), 12)
        if valence_degree(form.eta) != expected:
            failures.append(name)
    return {"ok": not failures, "cases": cases, "detail": failures}


def _suite_oracle():
    """Pentagonal-number expansion against a short direct product."""
    prec = 300
    direct = [Fraction(0)] * prec
    direct[0] = Fraction(1)
    for n in range(1, prec):
        for i in range(prec - 1, n - 1, -1):
            direct[i] -= direct[i - n]
    fast = euler_product_expansion(1, 1, prec)
    bad = [n for n in range(prec) if fast.coefficient(n) != direct[n]]
    return {"ok": not bad, "cases": prec, "detail": bad[:5]}


SUITES = {"pairing": _suite_pairing, "hecke": _suite_hecke,
          "valence": _suite_valence, "oracle": _suite_oracle}


def cmd_verify(args) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    for name in names:
        if name not in SUITES:
            print("unknown suite %r; suites: %s, all"
                  % (name, ", ".join(sorted(SUITES))), file=sys.stderr)
            return EXIT_CONFIG
    config = build_run_config(args)
    results = {}
    ok = True
    for name in names:
        start = time.time()
        results[name] = SUITES[name]()
        results[name]["seconds"] = round(time.time() - start, 3)
        ok = ok and results[name]["ok"]
    envelope = ReportEnvelope(VERSION, config.echo(), [], results)
    _emit(envelope, config.fmt)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_report(args) -> int:
    """Delta pipeline plus the full verification suite in one envelope;
    verdicts are emitted only when every prerequisite suite passed."""
    config = build_run_config(args)
    problems = config.validate()
    if problems:
        for problem in problems:
            print("config error: %s" % problem, file=sys.stderr)
        return EXIT_CONFIG
    start = time.time()
    results = {}
    ok = True
    for name in sorted(SUITES):
        results[name] = SUITES[name]()
        ok = ok and results[name]["ok"]
    reports = _run_delta(config) if ok else []
    envelope = ReportEnvelope(VERSION, config.echo(), reports, results,
                              {"total_seconds": round(time.time() - start, 3)})
    _emit(envelope, config.fmt)
    if not ok:
        return EXIT_VERIFY
    bad = [r for r in reports if not r["verdict_delta_nonzero"]]
    return EXIT_VERIFY if bad else EXIT_OK


# -- argument parsing ------------------------------------------------------

def make_parser():
    parser = argparse.ArgumentParser(
        prog="etadelta",
        description="exact q-series pipeline for the p-adic constants of "
                    "the weight-4 CM form on Gamma_0(9)")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None)
        sp.add_argument("--cache-dir", dest="cache_dir", default=None)
        sp.add_argument("--format", default=None,
                        choices=("json", "csv", "text"))
        sp.add_argument("--jobs", type=int, default=None)

    sp = sub.add_parser("expand", help="q-expansion of a catalog form")
    sp.add_argument("name")
    sp.add_argument("--prec", type=int, default=20)
    common(sp)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("represent", help="build a class representative")
    sp.add_argument("--pole", type=int, default=1)
    sp.add_argument("--prec", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_represent)

    sp = sub.add_parser("delta", help="p-adic limit reports")
    sp.add_argument("--p", default=None, help="comma-separated primes")
    sp.add_argument("--mmax", type=int, default=None)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--pole", default=None, help="comma-separated pole orders")
    common(sp)
    sp.set_defaults(func=cmd_delta)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite", nargs="?", default="all")
    sp.add_argument("--p", default=None)
    sp.add_argument("--mmax", type=int, default=None)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--pole", default=None)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("report", help="verification plus delta, combined")
    sp.add_argument("--p", default=None)
    sp.add_argument("--mmax", type=int, default=None)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--pole", default=None)
    common(sp)
    sp.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    # flags shared with RunConfig must exist even for subcommands
    for attr in ("p", "mmax", "M", "pole"):
        if not hasattr(args, attr):
            setattr(args, attr, None)
    try:
        return args.func(args)
    except MemoryError:
        print("resource exhaustion", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
