"""Command-line front end.

Full mode runs search (fast tier) -> transform -> optional adaptive
annotation -> rigorous check and reports both the total and the
checker-only wall time.  Certificates can be saved and replayed later;
check-only mode never imports the search machinery.

Exit codes: 0 verified, 1 refuted or checker rejection, 2 parse/usage
error, 3 inconclusive search.

Input is a problem file in the grammar of :mod:`boxcert.expr`, or
``corpus:NAME`` for a shipped benchmark.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from . import certificates, checker, numeric
from .corpus import corpus, corpus_entry
from .expr import ParseError, Problem, parse_problem
from .numeric import Precision

EXIT_VERIFIED = 0
EXIT_REJECTED = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


@dataclass
class RunConfig:
    input: str = ""
    digits: int = 5
    base: int = 200
    max_depth: int = 50
    mode: str = "full"  # full | search-only | check-only | annotate
    cert: str | None = None
    cert_out: str | None = None
    report: str = "text"  # text | machine
    workers: int = 1
    cache: bool = True
    adaptive: bool = False
    audit: str | None = None

    def __post_init__(self):
        if self.digits < 1:
            raise ValueError("digits must be >= 1")
        if self.mode not in ("full", "search-only", "check-only", "annotate"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode in ("check-only", "annotate") and not self.cert:
            raise ValueError(f"mode {self.mode} requires a certificate path")


def _load_problem(cfg: RunConfig) -> Problem:
    if cfg.input.startswith("corpus:"):
        return corpus_entry(cfg.input.split(":", 1)[1]).problem
    with open(cfg.input, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read())


def _report_skeleton(cfg: RunConfig, problem: Problem | None) -> dict:
    return {
        "status": "error",
        "problem": cfg.input,
        "dimension": problem.n if problem else None,
        "mode": cfg.mode,
        "digits": cfg.digits,
        "base": cfg.base,
        "max_depth": cfg.max_depth,
        "times": {},
        "certificate": None,
        "checker": None,
        "exit_code": EXIT_USAGE,
    }


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one verification run; returns (exit code, report dict)."""
    numeric.set_cache_enabled(cfg.cache)
    prec = Precision(cfg.base, cfg.digits)
    t0 = time.perf_counter()
    try:
        problem = _load_problem(cfg)
    except (ParseError, OSError, KeyError) as exc:
        report = _report_skeleton(cfg, None)
        report["status"] = f"parse error: {exc}"
        return EXIT_USAGE, report
    report = _report_skeleton(cfg, problem)
    times = report["times"]

    certs = None
    if cfg.mode in ("full", "search-only"):
        # imported lazily so check-only works with the search disabled
        from . import search as search_mod
        from .taylor import problem_domain

        params = search_mod.SearchParams(max_depth=cfg.max_depth,
                                         workers=cfg.workers)
        stats = search_mod.SearchStats()
        t = time.perf_counter()
        tree = search_mod.certificate_search(problem, params=params,
                                             stats=stats)
        times["search"] = time.perf_counter() - t
        outcome = search_mod.classify_tree(tree)
        report["search"] = {"outcome": outcome, "nodes": stats.nodes}
        if outcome != "complete":
            report["status"] = ("refuted" if outcome == "refuted"
                                else "inconclusive")
            report["exit_code"] = (EXIT_REJECTED if outcome == "refuted"
                                   else EXIT_INCONCLUSIVE)
            times["total"] = time.perf_counter() - t0
            return report["exit_code"], report
        t = time.perf_counter()
        try:
            certs = search_mod.transform_certificate(
                tree, problem_domain(problem, prec), prec)
        except search_mod.TransformError as exc:
            report["status"] = f"inconclusive: {exc}"
            report["exit_code"] = EXIT_INCONCLUSIVE
            times["total"] = time.perf_counter() - t0
            return EXIT_INCONCLUSIVE, report
        times["transform"] = time.perf_counter() - t
    else:
        try:
            with open(cfg.cert, "r", encoding="utf-8") as fh:
                certs = certificates.parse_certificate_list(fh.read())
        except (OSError, certificates.CertificateError) as exc:
            report["status"] = f"certificate error: {exc}"
            return EXIT_USAGE, report

    if cfg.mode == "annotate" or (cfg.mode == "full" and cfg.adaptive):
        t = time.perf_counter()
        try:
            certs, _ = checker.annotate_adaptive(problem, certs, prec)
        except checker.CheckFailure as exc:
            report["status"] = f"rejected: {exc}"
            report["exit_code"] = EXIT_REJECTED
            times["total"] = time.perf_counter() - t0
            return EXIT_REJECTED, report
        times["annotate"] = time.perf_counter() - t

    cert_text = certificates.format_certificate_list(certs)
    report["certificate"] = {
        "entries": len(certs),
        "nodes": certificates.count_nodes(certs),
    }
    if cfg.mode == "annotate":
        out_path = cfg.cert_out or cfg.cert + ".annotated"
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(cert_text)
        report["certificate"]["path"] = out_path
    elif cfg.cert and cfg.mode in ("full", "search-only"):
        with open(cfg.cert, "w", encoding="utf-8") as fh:
            fh.write(cert_text)
        report["certificate"]["path"] = cfg.cert

    if cfg.mode == "search-only":
        if not cfg.cert:
            sys.stdout.write(cert_text)
        report["status"] = "certificate found (unchecked)"
        report["exit_code"] = EXIT_VERIFIED
        times["total"] = time.perf_counter() - t0
        return EXIT_VERIFIED, report

    t = time.perf_counter()
    result = checker.check_list(problem, certs, prec,
                                audit=cfg.audit is not None)
    times["check"] = time.perf_counter() - t
    times["total"] = time.perf_counter() - t0
    report["checker"] = result.report.as_dict()
    if cfg.audit:
        with open(cfg.audit, "w", encoding="utf-8") as fh:
            fh.write("\n".join(result.report.audit) + "\n")
    if result.accepted:
        report["status"] = "verified"
        report["exit_code"] = EXIT_VERIFIED
        return EXIT_VERIFIED, report
    report["status"] = "rejected"
    report["rejection"] = {
        "entry": result.failed_entry,
        "path": certificates.format_path(result.failed_path or ()),
        "reason": result.reason,
    }
    report["exit_code"] = EXIT_REJECTED
    return EXIT_REJECTED, report


def _print_report(report: dict, fmt: str) -> None:
    if fmt == "machine":
        print(json.dumps(report, indent=2, default=str))
        return
    print(f"status: {report['status']}")
    if report.get("search"):
        print(f"search: {report['search']['outcome']} "
              f"({report['search']['nodes']} nodes explored)")
    if report.get("certificate"):
        cert = report["certificate"]
        print(f"certificate: {cert['entries']} entries, {cert['nodes']} nodes"
              + (f", saved to {cert['path']}" if "path" in cert else ""))
    if report.get("checker"):
        chk = report["checker"]
        rules = ", ".join(f"{k}={v}" for k, v in chk["rules"].items() if v)
        print(f"checker: {chk['entries']} entries, {chk['nodes']} rule "
              f"applications ({rules}), max digits {chk['max_digits']}")
    if report.get("rejection"):
        rej = report["rejection"]
        print(f"rejected at entry {rej['entry']} path {rej['path']}: "
              f"{rej['reason']}")
    times = report.get("times", {})
    if times:
        parts = ", ".join(f"{k} {v:.3f}s" for k, v in times.items())
        print(f"time: {parts}")


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="boxcert",
        description="Verify a nonlinear inequality f(x) < 0 on a box, with "
                    "a replayable certificate.")
    ap.add_argument("input", nargs="?", default="",
                    help="problem file, or corpus:NAME")
    ap.add_argument("--digits", type=int, default=5,
                    help="mantissa digits of the rigorous tier (default 5)")
    ap.add_argument("--base", type=int, default=200,
                    help="mantissa base of the rigorous tier (default 200)")
    ap.add_argument("--max-depth", type=int, default=50,
                    help="search subdivision depth limit (default 50)")
    ap.add_argument("--mode", default="full",
                    choices=["full", "search-only", "check-only", "annotate"])
    ap.add_argument("--cert", default=None, metavar="FILE",
                    help="certificate file (output for full/search-only, "
                         "input for check-only/annotate)")
    ap.add_argument("--cert-out", default=None, metavar="FILE",
                    help="output path for annotate mode "
                         "(default: CERT.annotated)")
    ap.add_argument("--report", default="text", choices=["text", "machine"])
    ap.add_argument("--workers", type=int, default=1,
                    help="concurrent search workers")
    ap.add_argument("--no-cache", action="store_true",
                    help="disable the rigorous-tier operation cache")
    ap.add_argument("--adaptive", action="store_true",
                    help="annotate minimal per-node precision before checking")
    ap.add_argument("--audit", default=None, metavar="FILE",
                    help="write the checker audit log to FILE")
    ap.add_argument("--list-corpus", action="store_true",
                    help="list shipped benchmark problems and exit")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    if args.list_corpus:
        for entry in corpus():
            print(f"{entry.name}: n={entry.problem.n}, expected "
                  f"{entry.expected}, suggested depth {entry.suggested_depth}")
        return EXIT_VERIFIED
    if not args.input:
        print("error: an input problem (or corpus:NAME) is required",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = RunConfig(input=args.input, digits=args.digits, base=args.base,
                        max_depth=args.max_depth, mode=args.mode,
                        cert=args.cert, cert_out=args.cert_out,
                        report=args.report, workers=args.workers,
                        cache=not args.no_cache, adaptive=args.adaptive,
                        audit=args.audit)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code, report = run(cfg)
    _print_report(report, cfg.report)
    return code


if __name__ == "__main__":
    sys.exit(main())
