"""Command-line entry point.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on a
usage or parameter error.  Randomized commands use ``--seed`` (default 0).
Numbers written as ``p/q`` or integers are exact; decimals are floats.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, JacksteinError, ResourceError, VerificationError
from .jack_measure import jack_distribution
from .kerov_growth import sample_path
from .mc_engine import McConfig, run_mc, sample_stream
from .partitions import enumerate_partitions, exact_alpha, format_scalar, max_n, parse_scalar
from .reports import FAIL, PASS, BoundReport
from .stein_bounds import (
    jack_tail_report,
    ks_exact_discrete,
    nonuniform_bound_profile,
    uniform_bound_rhs,
)
from .suites import SUITES, check, run_suite, zero_bias_identities
from .zero_bias import AtomicDistribution, kappa, kappa_lemma_check, rosenthal_check

MANIFEST_ENV = "JACKSTEIN_MANIFEST"
DEFAULT_MANIFEST = "jackstein-manifest.jsonl"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunManifest:
    subcommand: str
    parameters: dict
    version: str = __version__
    timestamp: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    )
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    verdict: str = PASS

    def append_to(self, path: Path) -> None:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(asdict(self), sort_keys=True) + "\n")


def read_manifests(path: Path) -> list[dict]:
    if not path.exists():
        return []
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _alpha_arg(text: str):
    value = parse_scalar(text)
    if not value > 0:
        raise DomainError(f"alpha must be positive, got {text}")
    return value


def _alpha_grid(text: str) -> list[Fraction]:
    return [exact_alpha(tok.strip()) for tok in text.split(",") if tok.strip()]


def _floats(text: str) -> list[float]:
    return [float(parse_scalar(tok.strip())) for tok in text.split(",") if tok.strip()]


def _load_law(text: str) -> AtomicDistribution:
    raw = Path(text[1:]).read_text() if text.startswith("@") else text
    if not raw.lstrip().startswith("{") and Path(text).exists():
        raw = Path(text).read_text()
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DomainError(f"law is not valid JSON: {exc}") from None
    return AtomicDistribution.from_json(obj)


def _emit(text: str, out: str | None) -> list:
    if out:
        Path(out).write_text(text)
        return [out]
    sys.stdout.write(text)
    return []


def _reports_text(reports: list[BoundReport], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "lhs", "rhs", "verdict", "context"])
        for r in reports:
            d = r.to_dict()
            w.writerow([d["name"], d["lhs"], d["rhs"], d["verdict"], json.dumps(d["context"], sort_keys=True)])
        return buf.getvalue()
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"


def _verdict(reports) -> str:
    return FAIL if any(r.verdict == FAIL for r in reports) else PASS


def cmd_enumerate(args) -> int:
    parts = enumerate_partitions(args.n)
    if args.format == "json":
        sys.stdout.write(json.dumps([str(p) for p in parts]) + "\n")
    else:
        sys.stdout.write("".join(f"{p}\n" for p in parts))
    return 0


def cmd_measure(args) -> int:
    alpha = exact_alpha(args.alpha)
    law = jack_distribution(args.n, alpha)
    doc = law.to_json()
    if args.format == "json":
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["partition", "prob_num", "prob_den", "prob_float", "w_value"])
        for (lam, pr), entry in zip(law, doc["entries"]):
            w.writerow([str(lam), pr.numerator, pr.denominator, repr(float(pr)), repr(entry["w"])])
        text = buf.getvalue()
    _emit(text, args.out)
    return 0


def cmd_sample(args) -> int:
    alpha = args.alpha
    rows = []
    for i in range(args.num_samples):
        path = sample_path(args.n, alpha, sample_stream(args.seed, i))
        rows.append(path.w_value)
    w = np.asarray(rows)
    if args.format == "csv":
        text = "w_value\n" + "".join(f"{v!r}\n" for v in w.tolist())
    else:
        edges = np.arange(-args.hist_range, args.hist_range + args.bin_width / 2, args.bin_width)
        counts, _ = np.histogram(w, bins=edges)
        doc = {
            "config": {"n": args.n, "alpha": format_scalar(alpha), "num_samples": args.num_samples,
                       "seed": args.seed},
            "moments": {"mean": float(w.mean()), "var": float(w.var()),
                        "m4": float(np.mean(w**4))},
            "histogram": {"edges": edges.tolist(), "counts": counts.tolist(),
                          "below": int((w < edges[0]).sum()), "above": int((w >= edges[-1]).sum())},
        }
        text = json.dumps(doc, indent=2) + "\n"
    _emit(text, args.out)
    return 0


def cmd_mcks(args) -> int:
    cfg = McConfig(
        n=args.n,
        alpha=float(args.alpha),
        num_samples=args.num_samples,
        seed=args.seed,
        workers=args.workers,
        delta=args.delta,
        bin_width=args.bin_width,
        histogram=True if args.histogram else None,
    )
    report = run_mc(cfg)
    outputs = _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    if args.csv_dump:
        from .mc_engine import simulate_w

        w = simulate_w(cfg.n, cfg.alpha, cfg.seed, 0, cfg.num_samples)
        Path(args.csv_dump).write_text("w_value\n" + "".join(f"{v!r}\n" for v in w.tolist()))
        outputs.append(args.csv_dump)
    return 0 if report.verdict == PASS else 1


def cmd_zerobias(args) -> int:
    law = _load_law(args.law)
    if args.check == "identity":
        reports = zero_bias_identities(law)
    elif args.check == "rosenthal":
        reports = rosenthal_check([law] * args.copies, args.p, strict=False)
    else:
        if args.p is None:
            raise DomainError("--check kappa needs --p")
        reports = kappa_lemma_check(args.p) if args.p > 8 else []
        reports.insert(0, BoundReport("kappa", None, kappa(args.p).value, "report-only",
                                      {"p": args.p, "log_value": kappa(args.p).log_value}))
    _emit(_reports_text(reports, args.format), args.out)
    return 1 if _verdict(reports) == FAIL else 0


def bounds_reports(n: int, alpha, q: float | None, p: float | None, x_grid) -> list[BoundReport]:
    exact = isinstance(alpha, Fraction) and n <= max_n()
    if exact:
        lhs = ks_exact_discrete(jack_distribution(n, alpha).w_law()).distance
        reports = uniform_bound_rhs(n, alpha, lhs=lhs)
    else:
        reports = uniform_bound_rhs(n, alpha)
    if alpha >= 1 and n >= 3:
        for qq in ([q] if q is not None else [2.0]):
            reports.extend(jack_tail_report(n, alpha, qq, exact=exact and n >= 3))
    if p is not None and exact:
        reports.append(nonuniform_bound_profile(n, alpha, p, x_grid))
    return reports


def cmd_bounds(args, manifest: RunManifest) -> int:
    reports = bounds_reports(args.n, args.alpha, args.q, args.p, args.x_grid)
    manifest.outputs = _emit(_reports_text(reports, args.format), args.out)
    manifest.verdict = _verdict(reports)
    return 1 if manifest.verdict == FAIL else 0


def cmd_ks(args) -> int:
    if args.law:
        law = _load_law(args.law)
    else:
        if args.n is None or args.alpha is None:
            raise DomainError("ks needs either --law or both --n and --alpha")
        law = jack_distribution(args.n, exact_alpha(args.alpha)).w_law()
    result = ks_exact_discrete(law)
    _emit(json.dumps(result.to_dict(), indent=2) + "\n", args.out)
    return 0


def cmd_verify(args, manifest: RunManifest) -> int:
    alphas = _alpha_grid(args.alpha_grid)
    reports = run_suite(args.suite, args.n_max, alphas)
    failed = [r.to_dict() for r in reports if r.verdict == FAIL]
    summary = {
        "suite": args.suite,
        "checks": len(reports),
        "failed": len(failed),
        "failures": failed,
        "verdict": _verdict(reports),
    }
    manifest.outputs = _emit(json.dumps(summary, indent=2) + "\n", args.out)
    manifest.verdict = summary["verdict"]
    return 1 if failed else 0


def cmd_report(args) -> int:
    rows = read_manifests(Path(args.manifest_file))
    if args.format == "json":
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
    else:
        for r in rows:
            sys.stdout.write(f"{r['timestamp']}  {r['subcommand']:<8} {r['verdict']:<6} "
                             f"{json.dumps(r['parameters'], sort_keys=True)}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jackstein", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--manifest", default=os.environ.get(MANIFEST_ENV, DEFAULT_MANIFEST),
                   help="append-only JSONL file receiving verify/bounds run manifests")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("enumerate", help="list the partitions of n")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--format", choices=["text", "json"], default="text")

    m = sub.add_parser("measure", help="exact Jack measure of all partitions of n")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--alpha", type=_alpha_arg, required=True)
    m.add_argument("--format", choices=["csv", "json"], default="csv")
    m.add_argument("--out")

    s = sub.add_parser("sample", help="sample W by growth paths")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha", type=_alpha_arg, required=True)
    s.add_argument("--num-samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=["csv", "json"], default="json")
    s.add_argument("--bin-width", type=float, default=0.1)
    s.add_argument("--hist-range", type=float, default=6.0)
    s.add_argument("--out")

    k = sub.add_parser("mcks", help="Monte Carlo Kolmogorov distance of W")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--alpha", type=_alpha_arg, required=True)
    k.add_argument("--num-samples", type=int, default=10**6)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--workers", type=int, default=1)
    k.add_argument("--delta", type=float, default=1e-3)
    k.add_argument("--bin-width", type=float, default=1e-3)
    k.add_argument("--histogram", action="store_true", help="bin samples instead of buffering")
    k.add_argument("--csv-dump", help="also write the per-sample W values as CSV")
    k.add_argument("--out")

    z = sub.add_parser("zerobias", help="zero-bias checks on a JSON law {atoms, masses}")
    z.add_argument("--law", required=True, help="inline JSON, a file path, or @file")
    z.add_argument("--p", type=float)
    z.add_argument("--check", choices=["identity", "rosenthal", "kappa"], default="identity")
    z.add_argument("--copies", type=int, default=1, help="number of i.i.d. summands for rosenthal")
    z.add_argument("--format", choices=["json", "csv"], default="json")
    z.add_argument("--out")

    b = sub.add_parser("bounds", help="bound reports for W_{n,alpha}")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--alpha", type=_alpha_arg, required=True)
    b.add_argument("--q", type=float)
    b.add_argument("--p", type=float)
    b.add_argument("--x-grid", type=_floats, default=[0.0, -1.0, 1.0, -2.0, 2.0, -3.0, 3.0])
    b.add_argument("--format", choices=["json", "csv"], default="json")
    b.add_argument("--out")

    t = sub.add_parser("ks", help="exact Kolmogorov distance to the normal law")
    t.add_argument("--n", type=int)
    t.add_argument("--alpha")
    t.add_argument("--law")
    t.add_argument("--out")

    v = sub.add_parser("verify", help="run exact invariant suites")
    v.add_argument("--suite", choices=["all", *SUITES], default="all")
    v.add_argument("--n-max", type=int, default=8)
    v.add_argument("--alpha-grid", default="1,2,1/2,5/3")
    v.add_argument("--out")

    r = sub.add_parser("report", help="summarize the run manifest")
    r.add_argument("--manifest-file", default=None)
    r.add_argument("--format", choices=["text", "json"], default="text")
    return p


def _params(args) -> dict:
    out = {}
    for key, val in vars(args).items():
        if key in ("command", "manifest"):
            continue
        out[key] = format_scalar(val) if isinstance(val, (Fraction, float)) else val
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"jackstein: error: {exc}\n")
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    manifest = RunManifest(args.command, _params(args))
    try:
        if args.command == "verify":
            code = cmd_verify(args, manifest)
        elif args.command == "bounds":
            code = cmd_bounds(args, manifest)
        elif args.command == "report":
            if args.manifest_file is None:
                args.manifest_file = args.manifest
            code = cmd_report(args)
        else:
            code = globals()[f"cmd_{args.command}"](args)
    except VerificationError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "failures": exc.failures}) + "\n")
        manifest.verdict = FAIL
        code = 1
    except (JacksteinError, UsageError) as exc:
        sys.stderr.write(f"jackstein: error: {exc}\n")
        manifest.verdict = "error"
        code = 2
    if args.command in ("verify", "bounds"):
        manifest.append_to(Path(args.manifest))
    return code


if __name__ == "__main__":
    sys.exit(main())
