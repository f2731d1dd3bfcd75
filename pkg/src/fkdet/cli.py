"""Batch driver: ``fkdet run|foelner-stats|validate --config PATH``.

Config files are INI-style with the sections below; unknown sections or
keys are rejected.  Paths are resolved relative to the config file::

    [group]
    kind = free_abelian          ; free_abelian | finite | heisenberg
    rank = 1                     ; free_abelian only
    table = z2.txt               ; finite only (or: cyclic = 2)

    [element]
    text =
        5   (0)
        1   (1)
        1   (-1)
    ; or: file = f.txt
    ; factor = <text of h>       optional positivity certificate f = h h*

    [foelner]
    type = box                   ; box | ball
    start = 100
    stop = 1000
    step = 100
    generators = standard        ; or encodings separated by ';'
    cap = 20000

    [methods]
    run = all                    ; or a comma list

    [tolerances]
    series_tol = 1e-10
    series_max_terms = 1000
    mahler_m = 4096
    truncation_allowance = 2e-4
    lueck_poly = 0, 0, 1         ; coefficients, constant term first

    [output]
    dir = out
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import random
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .determinant_lab import (
    EstimateReport,
    Step,
    certify_positive,
    foelner_logdet,
    lattice_index_sequence,
    lueck_trace,
    trace_series_logdet,
)
from .expansive import certify_expansive
from .finite_entropy import finite_entropy
from .group_core import (
    DEFAULT_SIZE_CAP,
    FoelnerSet,
    GeneratingSet,
    GroupKind,
    GroupSpec,
    ball,
    ball_layers,
    box,
    foelner_defect,
    growth_series,
    load_cayley_table,
    translation_defect,
)
from .group_ring import CoeffKind, GroupRingElement, parse_element
from .mahler import NoCertificateError, jensen_1d, mahler_report

ALL_METHODS = ("foelner_logdet", "lattice_index", "series", "mahler", "lueck_trace", "finite_entropy", "expansive")
LOGDET_METHODS = ("foelner_logdet", "lattice_index", "series", "mahler", "jensen")

SCHEMA = {
    "group": {"kind", "rank", "table", "cyclic"},
    "element": {"text", "file", "factor"},
    "foelner": {"type", "start", "stop", "step", "generators", "cap"},
    "methods": {"run"},
    "tolerances": {"series_tol", "series_max_terms", "mahler_m", "truncation_allowance", "lueck_poly"},
    "output": {"dir"},
}
REQUIRED_SECTIONS = ("group", "element", "methods")


class ConfigError(ValueError):
    def __init__(self, message: str, path: str = "<config>", line: int | None = None):
        self.path, self.line = path, line
        loc = f"{path}:{line}" if line else path
        super().__init__(f"{loc}: {message}")


@dataclass
class ExperimentConfig:
    path: str
    spec: GroupSpec
    f: GroupRingElement
    factor: GroupRingElement | None
    foelner_type: str
    n_values: list[int]
    generators: GeneratingSet
    cap: int
    methods: list[str]
    series_tol: float = 1e-10
    series_max_terms: int = 1000
    mahler_m: int = 4096
    truncation_allowance: float = 2e-4
    lueck_poly: list = field(default_factory=lambda: [0, 0, 1])
    out_dir: Path = Path("out")


def _line_map(text: str) -> dict:
    """(section, key) -> line number, and (section, None) -> header line."""
    where: dict = {}
    section = None
    for i, raw in enumerate(text.splitlines(), 1):
        m = re.match(r"^\s*\[([^\]]+)\]", raw)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), i)
            continue
        m = re.match(r"^([^\s=:;#][^=:]*?)\s*[=:]", raw)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip().lower()), i)
    return where


def _parse_number(s: str):
    s = s.strip()
    if "/" in s:
        return Fraction(s)
    try:
        return int(s)
    except ValueError:
        return float(s)


def load_config(path: str | Path, out_override: str | None = None) -> ExperimentConfig:
    path = Path(path)
    name = str(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", name) from exc
    lines = _line_map(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",), strict=True)
    try:
        cp.read_string(text, source=name)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", name, exc.lineno) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", name, exc.lineno) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("missing section header", name, exc.lineno) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("syntax error", name, line) from exc

    def fail(msg, section=None, key=None):
        raise ConfigError(msg, name, lines.get((section, key)) or lines.get((section, None)))

    for section in cp.sections():
        if section not in SCHEMA:
            fail(f"unknown section [{section}]", section)
        for key in cp[section]:
            if key not in SCHEMA[section]:
                fail(f"unknown key {key!r} in [{section}]", section, key)
    for section in REQUIRED_SECTIONS:
        if not cp.has_section(section):
            raise ConfigError(f"missing required section [{section}]", name, None)

    def get(section, key, default=None, conv=str):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            fail(f"bad value for {key!r}: {exc}", section, key)

    base = path.parent
    # group
    kind = get("group", "kind", "")
    if kind == "free_abelian":
        spec = GroupSpec.free_abelian(get("group", "rank", 1, int))
    elif kind == "heisenberg":
        spec = GroupSpec.heisenberg()
    elif kind == "finite":
        if cp.has_option("group", "table"):
            try:
                spec = load_cayley_table(base / get("group", "table"))
            except (OSError, ValueError) as exc:
                fail(str(exc), "group", "table")
        elif cp.has_option("group", "cyclic"):
            spec = GroupSpec.cyclic(get("group", "cyclic", conv=int))
        else:
            fail("finite groups need 'table' or 'cyclic'", "group")
    else:
        fail(f"unknown group kind {kind!r}", "group", "kind")

    # element
    def element_from(key):
        raw = get("element", key)
        if key == "file":
            try:
                raw = (base / raw).read_text()
            except OSError as exc:
                fail(str(exc), "element", key)
        try:
            return parse_element(raw, spec)
        except ValueError as exc:
            fail(f"bad element: {exc}", "element", key)

    if cp.has_option("element", "text"):
        f = element_from("text")
    elif cp.has_option("element", "file"):
        f = element_from("file")
    else:
        fail("[element] needs 'text' or 'file'", "element")
    if not f:
        fail("element is zero", "element")
    factor = element_from("factor") if cp.has_option("element", "factor") else None

    # foelner
    ftype = get("foelner", "type", "ball" if spec.kind is not GroupKind.FREE_ABELIAN else "box")
    if ftype not in ("box", "ball"):
        fail(f"foelner type must be box or ball, got {ftype!r}", "foelner", "type")
    if ftype == "box" and spec.kind is not GroupKind.FREE_ABELIAN:
        fail("box Følner sets need a free abelian group", "foelner", "type")
    start = get("foelner", "start", 1, int)
    stop = get("foelner", "stop", start, int)
    step = get("foelner", "step", 1, int)
    if step < 1 or stop < start or start < (1 if ftype == "box" else 0):
        fail("invalid Følner range", "foelner", "start")
    gens_raw = get("foelner", "generators", "standard")
    if gens_raw.strip() == "standard":
        gens = spec.standard_generators()
    else:
        try:
            gens = GeneratingSet.symmetric_closure(spec, [spec.parse_element(t) for t in gens_raw.split(";") if t.strip()])
        except ValueError as exc:
            fail(f"bad generators: {exc}", "foelner", "generators")

    # methods
    run = [m.strip() for m in get("methods", "run", "all").split(",") if m.strip()]
    if run == ["all"]:
        run = [m for m in ALL_METHODS if _applicable(m, spec, f) is None]
    for m in run:
        if m not in ALL_METHODS:
            fail(f"unknown method {m!r}", "methods", "run")
        why = _applicable(m, spec, f)
        if why:
            fail(f"method {m!r} {why}", "methods", "run")

    cfg = ExperimentConfig(
        path=name,
        spec=spec,
        f=f,
        factor=factor,
        foelner_type=ftype,
        n_values=list(range(start, stop + 1, step)),
        generators=gens,
        cap=get("foelner", "cap", DEFAULT_SIZE_CAP, int),
        methods=run,
        series_tol=get("tolerances", "series_tol", 1e-10, float),
        series_max_terms=get("tolerances", "series_max_terms", 1000, int),
        mahler_m=get("tolerances", "mahler_m", 4096, int),
        truncation_allowance=get("tolerances", "truncation_allowance", 2e-4, float),
        lueck_poly=get("tolerances", "lueck_poly", [0, 0, 1], lambda s: [_parse_number(x) for x in s.split(",")]),
        out_dir=Path(out_override) if out_override else base / get("output", "dir", "out"),
    )
    return cfg


def _applicable(method: str, spec: GroupSpec, f: GroupRingElement) -> str | None:
    """None if the method can run on this group/element, else the reason it cannot."""
    if method == "mahler" and spec.kind is not GroupKind.FREE_ABELIAN:
        return "needs a free abelian group"
    if method == "finite_entropy" and (spec.kind is not GroupKind.FINITE or f.kind is not CoeffKind.EXACT_INT):
        return "needs a finite group and integer coefficients"
    if method == "lattice_index" and f.kind is not CoeffKind.EXACT_INT:
        return "needs integer coefficients"
    return None


def foelner_sequence(cfg: ExperimentConfig) -> list[FoelnerSet]:
    if cfg.foelner_type == "box":
        return [box(cfg.spec.rank, n, cfg.cap) for n in cfg.n_values]
    return [ball(cfg.spec, cfg.generators, n, cfg.cap) for n in cfg.n_values]


# -- experiment ---------------------------------------------------------------

def _run_method(method: str, cfg: ExperimentConfig, seq: list[FoelnerSet]) -> dict:
    f = cfg.f
    if method == "foelner_logdet":
        cert = certify_positive(f, cfg.factor)
        return {"report": foelner_logdet(f, seq, cert)}
    if method == "lattice_index":
        return {"report": lattice_index_sequence(f, seq)}
    if method == "series":
        return {"report": trace_series_logdet(f, cfg.series_tol, cfg.series_max_terms)}
    if method == "lueck_trace":
        return {"report": lueck_trace(f, cfg.lueck_poly, seq)}
    if method == "mahler":
        info = mahler_report(f, cfg.mahler_m)
        m = cfg.mahler_m
        rep = EstimateReport("mahler", [Step(m, m**cfg.spec.rank, info["value"] if info["value"] is not None else math.nan, 0.0)], 0.0)
        if not info["certified"]:
            rep.notes.append("uncertified: non-vanishing on the torus not established")
        out = {"report": rep, "json": info}
        if cfg.spec.rank == 1:
            try:
                j = jensen_1d(f)
                out["jensen"] = EstimateReport("jensen", [Step(0, len(f), j, 0.0)], 0.0)
            except NoCertificateError as exc:
                out["json"]["jensen_refused"] = str(exc)
        return out
    if method == "finite_entropy":
        res = finite_entropy(f)
        order = cfg.spec.order
        rep = EstimateReport("finite_entropy", [Step(order, order, res.h_f, 0.0, res.index if res.is_unit else None)], 0.0)
        return {"report": rep, "json": res.to_dict()}
    if method == "expansive":
        cert = certify_expansive(f)
        eps = float(cert.epsilon) if cert.epsilon is not None else math.nan
        rep = EstimateReport("expansive", [Step(0, len(f), eps, None)], None)
        return {"report": rep, "json": cert.to_dict()}
    raise ValueError(method)


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def compare_finals(finals: dict[str, tuple[float, float]], allowance: float) -> list[dict]:
    """Flag every pair whose gap exceeds the sum of error bounds plus the allowance."""
    names = sorted(finals)
    out = []
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            (va, ea), (vb, eb) = finals[a], finals[b]
            gap = abs(va - vb)
            limit = ea + eb + allowance
            out.append({"pair": [a, b], "gap": gap, "limit": limit, "disagree": not gap <= limit})
    return out


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> dict:
    seq = foelner_sequence(cfg) if any(m in cfg.methods for m in ("foelner_logdet", "lattice_index", "lueck_trace")) else []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda m: _run_method(m, cfg, seq), cfg.methods))
    else:
        results = [_run_method(m, cfg, seq) for m in cfg.methods]
    by_method = dict(zip(cfg.methods, results))

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    reports: dict[str, EstimateReport] = {}
    for m, res in by_method.items():
        reports[m] = res["report"]
        if "jensen" in res:
            reports["jensen"] = res["jensen"]
    for name, rep in reports.items():
        (cfg.out_dir / f"{name}.csv").write_text(rep.to_csv())

    finals = {}
    for name in LOGDET_METHODS:
        rep = reports.get(name)
        if rep is None or not rep.steps or not math.isfinite(rep.final):
            continue
        finals[name] = (rep.final, rep.error_bound or 0.0)
    comparisons = compare_finals(finals, cfg.truncation_allowance)
    summary = {
        "config": cfg.path,
        "group": repr(cfg.spec),
        "methods": {name: rep.to_dict() for name, rep in reports.items()},
        "finals": {k: v[0] for k, v in finals.items()},
        "comparisons": comparisons,
        "disagreements": sum(c["disagree"] for c in comparisons),
    }
    for m, res in by_method.items():
        if "json" in res:
            summary[m] = res["json"]
    summary = _json_safe(summary)
    (cfg.out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# -- Følner diagnostics -------------------------------------------------------

def foelner_stats(cfg: ExperimentConfig) -> list[dict]:
    """Rows n, |F_n|, eq28, eq29, strong_value over the configured range."""
    spec, S = cfg.spec, cfg.generators
    rows = []
    if cfg.foelner_type == "ball":
        n_max = max(max(cfg.n_values), 1)
        growth = {r.n: r for r in growth_series(spec, S, n_max, cfg.cap)}
        layers = ball_layers(spec, S, n_max, cfg.cap)
        for n in cfg.n_values:
            F = FoelnerSet(spec, tuple(g for layer in layers[: n + 1] for g in layer), label=n)
            strong = foelner_defect(F, S, spec).strong_value
            if n in growth:
                r = growth[n]
                rows.append({"n": n, "size": r.size, "eq28": r.eq28_value, "eq29": r.eq29_value, "strong_value": strong})
            else:  # n = 0: log|S^0| = 0
                rows.append({"n": n, "size": len(F), "eq28": 0.0, "eq29": 0.0, "strong_value": strong})
        return rows
    for n in cfg.n_values:
        F = box(spec.rank, n, cfg.cap)
        size = len(F)
        log_size = math.log(size)
        worst = max(translation_defect(F, s, spec) for s in S)
        eq29 = ((n + 1) ** spec.rank / size - 1.0) * log_size
        strong = foelner_defect(F, S, spec).strong_value
        rows.append({"n": n, "size": size, "eq28": worst / size * log_size, "eq29": eq29, "strong_value": strong})
    return rows


def stats_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "set_size", "eq28", "eq29", "strong_value"])
    for r in rows:
        w.writerow([r["n"], r["size"], *(format(r[k], ".17g") for k in ("eq28", "eq29", "strong_value"))])
    return buf.getvalue()


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fkdet", description="Fuglede-Kadison determinant laboratory")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "run the configured estimators and write CSV + summary.json"),
        ("foelner-stats", "write Følner growth/defect diagnostics"),
        ("validate", "check a config file without computing"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="experiment config (INI)")
        sp.add_argument("--out", help="output directory (overrides [output] dir)")
        sp.add_argument("--threads", type=int, default=1, help="methods evaluated concurrently")
        sp.add_argument("--seed", type=int, default=0, help="seed for randomized helpers; estimators are deterministic")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    random.seed(args.seed)
    try:
        cfg = load_config(args.config, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"{args.config}: ok ({cfg.spec!r}, methods: {', '.join(cfg.methods)})")
        return 0
    if args.command == "foelner-stats":
        rows = foelner_stats(cfg)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        text = stats_csv(rows)
        (cfg.out_dir / "foelner_stats.csv").write_text(text)
        sys.stdout.write(text)
        return 0
    summary = run_experiment(cfg, max(1, args.threads))
    for name, value in sorted(summary["finals"].items()):
        print(f"{name:16s} {value:.17g}")
    if summary["disagreements"]:
        print(f"{summary['disagreements']} method pair(s) disagree beyond tolerance", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
