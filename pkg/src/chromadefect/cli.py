"""Command-line surface: job configs, artifact caching, engine dispatch.

Every subcommand builds a JobConfig, turns it into a canonical JSON
blob, and uses the blob's sha256 as the cache key.  Artifacts are pure
functions of the config: no timestamps, no thread-count dependence, no
filesystem paths inside the bytes.  Exit codes: 0 success, 2 config or
input validation, 3 engine-level failure (a computation that refused
to certify itself).
"""

import argparse
import base64
import hashlib
import json
import os
import sys
from pathlib import Path

from .charts import (
    chart_from_ext,
    chart_from_may_page,
    chart_from_snapshot,
    chart_to_tsv,
    render_chart,
)
from .defect import catalogue, verdict_table
from .ext import Comodule, ext_ranks
from .fgl import er_defect_witness
from .fgl import PrimeField
from .margolis import FiniteSteenrodModule, is_free_over
from .may import may_e1
from .ssq import Window, build_e1, forced_d3_detector, run_d1, run_d3
from .steenrod import Profile

__all__ = ["JobConfig", "ConfigError", "main", "run_job"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COMPUTE = 3
CACHE_ENV = "CHROMADEFECT_CACHE"
FORMATS = ("tsv", "json", "svg")

# per-subcommand defaults and allowed output formats
FORMAT_POLICY = {
    "ext": (("tsv", "json", "svg"), ("tsv", "svg")),
    "may": (("tsv", "json", "svg"), ("tsv", "svg")),
    "margolis": (("tsv", "json"), ("json",)),
    "fgl": (("tsv", "json"), ("json",)),
    "defect": (("tsv", "json"), ("tsv",)),
    "ko-ss": (("tsv", "json", "svg"), ("tsv", "svg")),
}


class ConfigError(ValueError):
    """Bad flags or unreadable input; maps to exit code 2."""


class JobConfig:
    """One validated CLI job.

    `params` is the canonical payload: everything that can change the
    artifact bytes goes in, everything that cannot (output directory,
    cache toggle, worker count) stays out, so the cache key never
    splits on plumbing.
    """

    __slots__ = ("subcommand", "params", "out_dir", "use_cache", "workers", "payload")

    def __init__(self, subcommand, params, out_dir=".", use_cache=True,
                 workers=1, payload=None):
        if subcommand not in FORMAT_POLICY:
            raise ConfigError(f"unknown subcommand {subcommand!r}")
        if workers < 1:
            raise ConfigError("workers must be at least 1")
        self.subcommand = subcommand
        self.params = dict(params)
        self.out_dir = out_dir
        self.use_cache = use_cache
        self.workers = workers
        self.payload = payload

    def canonical(self) -> str:
        blob = {"subcommand": self.subcommand, "params": self.params}
        return json.dumps(blob, sort_keys=True, separators=(",", ":"))

    def key(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


def _check_prime(p) -> int:
    try:
        PrimeField(p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return p


def _check_positive(name, value) -> int:
    if value < 1:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def _resolve_formats(subcommand, requested):
    allowed, default = FORMAT_POLICY[subcommand]
    if not requested:
        return sorted(default)
    for fmt in requested:
        if fmt not in allowed:
            raise ConfigError(
                f"format {fmt!r} is not available for {subcommand} "
                f"(allowed: {', '.join(allowed)})"
            )
    return sorted(set(requested))


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=1, sort_keys=True) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# subcommand implementations: JobConfig -> {filename: bytes}


def cmd_ext(cfg: JobConfig):
    p = cfg.params["prime"]
    fam = cfg.params["family"]
    n = cfg.params["n"]
    s_max = cfg.params["s_max"]
    stem_max = cfg.params["stem_max"]
    profile = getattr(Profile, fam)(p, n)
    module = Comodule.trivial(profile)
    chart = ext_ranks(profile, module, s_max, stem_max + s_max, workers=cfg.workers)
    base = f"ext_{fam.lower()}{n}_p{p}"
    out = {}
    if "tsv" in cfg.params["formats"]:
        out[f"{base}.tsv"] = chart.to_tsv().encode("utf-8")
    if "json" in cfg.params["formats"]:
        cells = [
            {"s": s, "t": t, "stem": t - s, "dim": d}
            for (s, t), d in sorted(chart.dims.items())
            if d
        ]
        out[f"{base}.json"] = _json_bytes({"label": chart.label, "cells": cells})
    if "svg" in cfg.params["formats"]:
        doc = chart_from_ext(chart)
        out[f"{base}.svg"] = render_chart(doc)
        out[f"{base}_chart.tsv"] = chart_to_tsv(doc).encode("utf-8")
    return out


def cmd_may(cfg: JobConfig):
    p = cfg.params["prime"]
    n = cfg.params["n"]
    page = may_e1(n, p, cfg.params["stem_max"], cfg.params["s_max"])
    base = f"may_n{n}_p{p}"
    out = {}
    if "tsv" in cfg.params["formats"]:
        out[f"{base}_e1.tsv"] = page.to_tsv().encode("utf-8")
    if "json" in cfg.params["formats"]:
        dims = [[stem, s, d] for (stem, s), d in sorted(page.dims().items())]
        out[f"{base}_e1.json"] = _json_bytes(
            {"height": n, "prime": p, "page": page.r, "dims": dims}
        )
    if "svg" in cfg.params["formats"]:
        doc = chart_from_may_page(page)
        out[f"{base}_e1.svg"] = render_chart(doc)
        out[f"{base}_e1_chart.tsv"] = chart_to_tsv(doc).encode("utf-8")
    return out


def cmd_margolis(cfg: JobConfig):
    module = FiniteSteenrodModule.from_json(cfg.payload)
    verdict = is_free_over(module, cfg.params["subalgebra"])
    report = verdict.to_json()
    base = "margolis_verdict"
    out = {}
    if "json" in cfg.params["formats"]:
        out[f"{base}.json"] = _json_bytes(report)
    if "tsv" in cfg.params["formats"]:
        witness = report.get("witness") or {}
        lines = [
            "subalgebra\tfree\trank\twitness-operator\twitness-degree",
            "\t".join(
                str(x)
                for x in (
                    report["subalgebra"],
                    report["free"],
                    report["rank"] if report["rank"] is not None else "-",
                    witness.get("operator", "-"),
                    witness.get("degree", "-"),
                )
            ),
        ]
        out[f"{base}.tsv"] = ("\n".join(lines) + "\n").encode("utf-8")
    return out


def cmd_fgl(cfg: JobConfig):
    report = er_defect_witness(cfg.params["n"], cap=cfg.params["cap"])
    base = f"fgl_er{cfg.params['n']}"
    out = {}
    if "json" in cfg.params["formats"]:
        out[f"{base}.json"] = _json_bytes(report)
    if "tsv" in cfg.params["formats"]:
        lines = ["height\tdoubling-degree\tinverse-obstructed"]
        for h in sorted(report["doubling_degrees"], key=int):
            lines.append(
                f"{h}\t{report['doubling_degrees'][h]}\t{report['inverse_obstructed'][h]}"
            )
        out[f"{base}.tsv"] = ("\n".join(lines) + "\n").encode("utf-8")
    return out


def cmd_defect(cfg: JobConfig):
    verdicts = catalogue(stem_cap=cfg.params["stem_cap"])
    out = {}
    if "tsv" in cfg.params["formats"]:
        out["defect_table.tsv"] = verdict_table(verdicts).encode("utf-8")
    if "json" in cfg.params["formats"]:
        out["defect_table.json"] = _json_bytes([v.to_json() for v in verdicts])
    return out


def cmd_ko_ss(cfg: JobConfig):
    variant = cfg.params["variant"]
    lo, hi, flo, fhi = cfg.params["window"]
    window = Window(lo, hi, flo, fhi)
    e2 = run_d1(build_e1(variant, window))
    e4 = run_d3(e2)
    base = f"ko_{variant}"
    out = {}
    if "tsv" in cfg.params["formats"]:
        out[f"{base}_e2.tsv"] = e2.to_tsv().encode("utf-8")
        out[f"{base}_e4.tsv"] = e4.to_tsv().encode("utf-8")
    if "svg" in cfg.params["formats"]:
        for page in (e2, e4):
            doc = chart_from_snapshot(page)
            out[f"{base}_e{page.page}.svg"] = render_chart(doc)
            out[f"{base}_e{page.page}_chart.tsv"] = chart_to_tsv(doc).encode("utf-8")
    if "json" in cfg.params["formats"]:
        out[f"{base}_forced_d3.json"] = _json_bytes(forced_d3_detector(window))
    return out


JOBS = {
    "ext": cmd_ext,
    "may": cmd_may,
    "margolis": cmd_margolis,
    "fgl": cmd_fgl,
    "defect": cmd_defect,
    "ko-ss": cmd_ko_ss,
}


def run_job(cfg: JobConfig):
    """Dispatch a validated config; returns {filename: bytes}."""
    return JOBS[cfg.subcommand](cfg)


# ---------------------------------------------------------------------------
# cache


def _cache_dir() -> Path:
    root = os.environ.get(CACHE_ENV)
    if root:
        return Path(root)
    return Path.home() / ".cache" / "chromadefect"


def cache_load(key):
    path = _cache_dir() / f"{key}.json"
    if not path.is_file():
        return None
    try:
        blob = json.loads(path.read_text(encoding="utf-8"))
        return {
            name: base64.b64decode(data)
            for name, data in blob["artifacts"].items()
        }
    except (ValueError, KeyError, OSError):
        return None  # corrupt entry: fall through to recompute


def cache_store(key, artifacts):
    root = _cache_dir()
    root.mkdir(parents=True, exist_ok=True)
    blob = {
        "key": key,
        "artifacts": {
            name: base64.b64encode(data).decode("ascii")
            for name, data in sorted(artifacts.items())
        },
    }
    tmp = root / f".{key}.tmp"
    tmp.write_text(json.dumps(blob, sort_keys=True), encoding="utf-8")
    os.replace(tmp, root / f"{key}.json")


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chromadefect",
        description="Exact-arithmetic charts and defect tables for the bundled engines.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--out", default=".", help="output directory (default: cwd)")
        sp.add_argument("--no-cache", action="store_true", help="recompute even on a cache hit")
        sp.add_argument(
            "--format",
            action="append",
            choices=FORMATS,
            dest="formats",
            help="output format; repeatable (default depends on the subcommand)",
        )
        sp.add_argument("--workers", type=int, default=1, help="worker threads for the engine")

    sp = sub.add_parser("ext", help="Ext rank chart of the trivial comodule")
    sp.add_argument("--prime", type=int, default=2)
    sp.add_argument("--family", choices=("A", "E", "P", "T"), default="T",
                    help="quotient Hopf algebra family")
    sp.add_argument("--n", type=int, default=1, help="family height")
    sp.add_argument("--stem-max", type=int, default=13)
    sp.add_argument("--s-max", type=int, default=8)
    common(sp)

    sp = sub.add_parser("may", help="weight-filtration first page with its differentials")
    sp.add_argument("--prime", type=int, default=2)
    sp.add_argument("--n", type=int, default=1, help="telescope height")
    sp.add_argument("--stem-max", type=int, default=13)
    sp.add_argument("--s-max", type=int, default=8)
    common(sp)

    sp = sub.add_parser("margolis", help="freeness verdict for a finite module")
    sp.add_argument("--input", required=True, help="module description (JSON)")
    sp.add_argument("--subalgebra", default="A(1)", help='e.g. "A(1)" or "P(2)"')
    common(sp)

    sp = sub.add_parser("fgl", help="formal-group-law doubling and inversion witness")
    sp.add_argument("--n", type=int, default=2, help="real-theory height")
    sp.add_argument("--cap", type=int, default=None, help="series truncation degree")
    common(sp)

    sp = sub.add_parser("defect", help="chromatic-defect verdict table")
    sp.add_argument("--cap", type=int, default=24, help="stem cap for the evenness scans")
    common(sp)

    sp = sub.add_parser("ko-ss", help="real K-theory descent chart pages")
    sp.add_argument("--variant", choices=("polynomial", "laurent"), default="polynomial")
    sp.add_argument(
        "--window",
        type=int,
        nargs=4,
        metavar=("STEM_LO", "STEM_HI", "FIL_LO", "FIL_HI"),
        default=(-4, 16, -2, 14),
    )
    common(sp)

    return parser


def _config_from_args(args) -> JobConfig:
    formats = _resolve_formats(args.subcommand, args.formats)
    params = {"formats": formats}
    payload = None
    if args.subcommand in ("ext", "may"):
        params["prime"] = _check_prime(args.prime)
        params["n"] = args.n
        if args.n < 0:
            raise ConfigError(f"height must be nonnegative, got {args.n}")
        params["stem_max"] = _check_positive("stem cap", args.stem_max)
        params["s_max"] = _check_positive("s cap", args.s_max)
        if args.subcommand == "ext":
            params["family"] = args.family
    elif args.subcommand == "margolis":
        path = Path(args.input)
        try:
            text = path.read_text(encoding="utf-8")
            payload = json.loads(text)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"unreadable input {args.input}: {exc}") from None
        params["subalgebra"] = args.subalgebra
        params["input_sha256"] = hashlib.sha256(text.encode("utf-8")).hexdigest()
    elif args.subcommand == "fgl":
        params["n"] = _check_positive("height", args.n)
        params["cap"] = None if args.cap is None else _check_positive("cap", args.cap)
    elif args.subcommand == "defect":
        params["stem_cap"] = _check_positive("stem cap", args.cap)
    elif args.subcommand == "ko-ss":
        params["variant"] = args.variant
        lo, hi, flo, fhi = args.window
        if lo > hi or flo > fhi:
            raise ConfigError(f"empty window {tuple(args.window)}")
        params["window"] = [lo, hi, flo, fhi]
    return JobConfig(
        args.subcommand,
        params,
        out_dir=args.out,
        use_cache=not args.no_cache,
        workers=args.workers,
        payload=payload,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    try:
        cfg = _config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    key = cfg.key()
    artifacts = cache_load(key) if cfg.use_cache else None
    if artifacts is None:
        try:
            artifacts = run_job(cfg)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except ValueError as exc:
            print(f"compute error: {exc}", file=sys.stderr)
            return EXIT_COMPUTE
        if cfg.use_cache:
            cache_store(key, artifacts)
    else:
        print(f"cache hit {key[:12]}", file=sys.stderr)

    out_root = Path(cfg.out_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    for name in sorted(artifacts):
        target = out_root / name
        target.write_bytes(artifacts[name])
        print(f"wrote {target}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
