"""Command-line front end: ``worldmetric distance|rank|ctm|demo-lottery``.

Exit codes:

    0  success
    2  malformed scenario or config, out-of-range value, bad arguments
    3  unknown estimator
    4  every ranking candidate is environment-incompatible
    5  CTM class above the enumeration cap
    6  corrupt or mismatched CTM cache file

Reports are JSON with a fixed key order and floats written with 9
significant digits, so identical runs produce identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import ctm, ranker
from .estimators import EstimatorError, resolve
from .similarity import similarity
from .worldstate import (Field, Scenario, ScenarioError, StructuralError, WorldState, digitalize,
                         undigitalize)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_ESTIMATOR = 3
EXIT_ALL_INCOMPATIBLE = 4
EXIT_CAP = 5
EXIT_CACHE = 6

DEFAULTS = {
    "estimator": "LZ77",
    "ctm_states": ranker.CTM_STATES,
    "ctm_steps": ranker.CTM_STEPS,
    "tau_env": ranker.TAU_ENV,
    "tie_eps": ranker.TIE_EPS,
    "format": "json",
    "cache_dir": None,
    "workers": 1,
}


class UsageError(ValueError):
    """Bad input that is not a scenario problem (config, ranges, labels)."""


# -- reports ---------------------------------------------------------------

def format_float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"cannot serialise non-finite float {v!r}")
    text = format(v, ".9g")
    return "0" if text == "-0" else text


def dumps_report(obj, indent: int = 2) -> str:
    """JSON text with insertion-ordered keys and pinned float formatting."""
    out: list[str] = []

    def emit(value, depth: int) -> None:
        pad = " " * (indent * (depth + 1))
        end = " " * (indent * depth)
        if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
            out.append(json.dumps(value))
        elif isinstance(value, float):
            out.append(format_float(value))
        elif isinstance(value, dict):
            if not value:
                out.append("{}")
                return
            out.append("{\n")
            for i, (k, v) in enumerate(value.items()):
                out.append(f"{pad}{json.dumps(str(k))}: ")
                emit(v, depth + 1)
                out.append(",\n" if i < len(value) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(value, (list, tuple)):
            if not value:
                out.append("[]")
                return
            out.append("[\n")
            for i, v in enumerate(value):
                out.append(pad)
                emit(v, depth + 1)
                out.append(",\n" if i < len(value) - 1 else "\n")
            out.append(end + "]")
        else:
            raise TypeError(f"cannot serialise {type(value).__name__}")

    emit(obj, 0)
    return "".join(out) + "\n"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def dumps_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row.values()])
    return buf.getvalue()


def ranking_report(ranking: ranker.CounterfactualRanking) -> dict:
    return {
        "parameters": dict(ranking.parameters),
        "actual": ranking.actual,
        "entries": [ranking_row(e) for e in ranking.entries],
        "plurality_classes": [list(c) for c in ranking.plurality_classes],
    }


def ranking_row(e: ranker.RankedEntry) -> dict:
    return {"label": e.label, "distance": e.distance, "delta_si": e.delta_si,
            "probability": e.probability, "compatible": e.compatible}


# -- scenario files --------------------------------------------------------

def scenario_from_json(data, where: str) -> Scenario:
    """Build a Scenario from parsed JSON, naming the offending location on error."""
    if not isinstance(data, dict):
        raise ScenarioError(f"{where}: top level must be an object")
    unknown = set(data) - {"label", "fields"}
    if unknown:
        raise ScenarioError(f"{where}: unknown keys {sorted(unknown)}")
    label = data.get("label")
    if not isinstance(label, str) or not label:
        raise ScenarioError(f"{where}: 'label' must be a non-empty string")
    fields = data.get("fields")
    if not isinstance(fields, list):
        raise ScenarioError(f"{where}: 'fields' must be a list")
    out = []
    for i, f in enumerate(fields):
        loc = f"{where}: fields[{i}]"
        if not isinstance(f, dict):
            raise ScenarioError(f"{loc}: must be an object")
        unknown = set(f) - {"name", "type", "width", "cardinality", "value"}
        if unknown:
            raise ScenarioError(f"{loc}: unknown keys {sorted(unknown)}")
        for key in ("name", "type", "value"):
            if key not in f:
                raise ScenarioError(f"{loc}: missing {key!r}")
        if not isinstance(f["name"], str) or not f["name"]:
            raise ScenarioError(f"{loc}: 'name' must be a non-empty string")
        field = Field(f["name"], f["type"], f["value"], f.get("width"), f.get("cardinality"))
        try:
            field.validate()
        except ScenarioError as exc:
            raise ScenarioError(f"{loc}: {exc}") from None
        out.append(field)
    return Scenario(label, tuple(out))


def load_world(path: str | Path) -> WorldState:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None
    scenario = scenario_from_json(data, str(path))
    try:
        return digitalize(scenario)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def scenario_to_json(world: WorldState) -> dict:
    """Inverse of :func:`scenario_from_json` for fixture generation."""
    fields = []
    for f in undigitalize(world).fields:
        entry = {"name": f.name, "type": f.kind}
        if f.kind in ("uint", "bits"):
            entry["width"] = f.width
        if f.kind == "enum":
            entry["cardinality"] = f.cardinality
        entry["value"] = f.value
        fields.append(entry)
    return {"label": world.label, "fields": fields}


def expand_inputs(paths: Sequence[str]) -> list[Path]:
    """Files as given; directories contribute their ``*.json`` files in name order."""
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            found = sorted(p.glob("*.json"))
            if not found:
                raise UsageError(f"{p}: directory holds no .json scenario files")
            out.extend(found)
        elif p.is_file():
            out.append(p)
        else:
            raise UsageError(f"{p}: no such file or directory")
    return out


# -- configuration ---------------------------------------------------------

def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"config {path}: cannot read ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path}: top level must be an object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"config {path}: unknown keys {sorted(unknown)}")
    return data


def settle(args: argparse.Namespace) -> dict:
    """Merge flags over config over defaults, then check types and ranges."""
    config = load_config(getattr(args, "config", None))
    merged = {}
    for key, default in DEFAULTS.items():
        if not hasattr(args, key):
            continue
        flag = getattr(args, key)
        merged[key] = flag if flag is not None else config.get(key, default)
    for key in ("ctm_states", "ctm_steps", "workers"):
        if key in merged:
            v = merged[key]
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise UsageError(f"{key.replace('_', '-')} must be a positive integer, got {v!r}")
    for key in ("tau_env", "tie_eps"):
        if key in merged:
            v = merged[key]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
                raise UsageError(f"{key.replace('_', '-')} must lie in [0, 1], got {v!r}")
            merged[key] = float(v)
    if "format" in merged and merged["format"] not in ("json", "csv"):
        raise UsageError(f"format must be json or csv, got {merged['format']!r}")
    if "estimator" in merged:
        merged["estimator"] = resolve(merged["estimator"])
    return merged


def _distribution(opts: dict) -> ctm.CtmDistribution | None:
    """Cached CTM table when --cache-dir holds one, else None (enumerate in process)."""
    if not opts.get("cache_dir"):
        if ctm.class_size(opts["ctm_states"]) > ctm.DEFAULT_CAP:
            raise ctm.CtmCapError(f"{opts['ctm_states']}-state class has "
                                  f"{ctm.class_size(opts['ctm_states'])} machines, above the cap of {ctm.DEFAULT_CAP}")
        return None
    path = ctm.cache_path(opts["cache_dir"], opts["ctm_states"], opts["ctm_steps"])
    if not path.exists():
        return None
    return _read_cache(path, opts["ctm_states"], opts["ctm_steps"])


def _read_cache(path: Path, n: int, budget: int) -> ctm.CtmDistribution:
    try:
        return ctm.read_cache(path, n, budget)
    except ctm.CacheError as exc:
        raise ctm.CacheError(f"{path}: {exc}; re-enumerate with 'worldmetric ctm --ctm-states {n} "
                             f"--ctm-steps {budget} --out {path} --rebuild'") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands --------------------------------------------------------------

def cmd_distance(args: argparse.Namespace) -> int:
    opts = settle(args)
    x, y = load_world(args.first), load_world(args.second)
    score = similarity(x.payload, y.payload, opts["estimator"])
    report = {
        "estimator": str(score.estimator),
        "x": x.label,
        "y": y.label,
        "distance": score.value,
        "k_x": score.k_x,
        "k_y": score.k_y,
        "k_x_given_y": score.k_x_given_y,
        "k_y_given_x": score.k_y_given_x,
    }
    _emit(dumps_csv([report]) if opts["format"] == "csv" else dumps_report(report), args.out)
    return EXIT_OK


def cmd_rank(args: argparse.Namespace) -> int:
    opts = settle(args)
    actual = load_world(args.actual)
    candidates = [load_world(p) for p in expand_inputs(args.candidates)]
    labels = [c.label for c in candidates]
    dupes = sorted({l for l in labels if labels.count(l) > 1})
    if dupes:
        raise UsageError(f"candidate labels must be unique; repeated: {', '.join(dupes)}")
    request = ranker.RankingRequest(actual, tuple(candidates), opts["estimator"], opts["ctm_states"],
                                    opts["ctm_steps"], opts["tau_env"], opts["tie_eps"])
    ranking = ranker.rank(request, _distribution(opts))
    if opts["format"] == "csv":
        _emit(dumps_csv([ranking_row(e) for e in ranking.entries]), args.out)
    else:
        _emit(dumps_report(ranking_report(ranking)), args.out)
    if not ranking.compatible:
        print("worldmetric: every candidate is environment-incompatible "
              f"(delta_si > tau-env {opts['tau_env']})", file=sys.stderr)
        return EXIT_ALL_INCOMPATIBLE
    return EXIT_OK


def cmd_ctm(args: argparse.Namespace) -> int:
    opts = settle(args)
    n, budget = opts["ctm_states"], opts["ctm_steps"]
    if args.out:
        path = Path(args.out)
    else:
        path = ctm.cache_path(opts["cache_dir"] or ".", n, budget)
    status = "verified"
    if path.exists() and not args.rebuild:
        dist = _read_cache(path, n, budget)
    else:
        dist = ctm.enumerate_class(n, budget, cap=args.cap, workers=opts["workers"])
        ctm.write_cache(dist, path)
        status = "written"
    report = {
        "status": status,
        "path": str(path),
        "states": dist.states,
        "step_budget": dist.step_budget,
        "machines": dist.machines,
        "halting": dist.halting,
        "outputs": len(dist.weights),
    }
    sys.stdout.write(dumps_report(report))
    return EXIT_OK


def _numbers(text: str | None, what: str) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        values = tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise UsageError(f"--{what}: expected five integers, got {text!r}") from None
    return values


def cmd_demo_lottery(args: argparse.Namespace) -> int:
    opts = settle(args)
    ticket = _numbers(args.ticket, "ticket") or ranker.DEFAULT_TICKET
    drawn = _numbers(args.drawn, "drawn") or ranker.DEFAULT_DRAWN
    try:
        demo = ranker.lottery_demo(ticket, drawn, opts["estimator"], opts["ctm_states"],
                                   opts["ctm_steps"], opts["tau_env"], opts["tie_eps"],
                                   _distribution(opts))
    except (ctm.CtmCapError, ctm.CacheError):
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ranking = demo["ranking"]
    if opts["format"] == "csv":
        _emit(dumps_csv([ranking_row(e) for e in ranking.entries]), args.out)
        return EXIT_OK
    keep = ("value", "bits", "k", "distance", "exp", "probability")
    report = {
        "ticket": demo["ticket"],
        "drawn": demo["drawn"],
        "actual": demo["actual"],
        "actual_is_winning": demo["actual_is_winning"],
        "winning_worlds": demo["winning_worlds"],
        "notes": demo["notes"],
        "numbers": [{k: r[k] for k in keep} for r in demo["numbers"]],
        "ticket_numbers": [{k: r[k] for k in keep} for r in demo["ticket_numbers"]],
        "worlds": ranking_report(ranking),
    }
    _emit(dumps_report(report), args.out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def _probability(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    config = argparse.ArgumentParser(add_help=False)
    config.add_argument("--config", help="JSON file of option defaults (flags override it)")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=("json", "csv"), default=None)
    output.add_argument("--out", help="write the report here instead of stdout")

    estimator = argparse.ArgumentParser(add_help=False)
    estimator.add_argument("--estimator", help="complexity estimator (RLE, LZ78, ENTROPY0, LZ77)")

    machines = argparse.ArgumentParser(add_help=False)
    machines.add_argument("--ctm-states", type=_positive, default=None)
    machines.add_argument("--ctm-steps", type=_positive, default=None)
    machines.add_argument("--cache-dir", default=None, help="directory of CTM cache files")

    tolerances = argparse.ArgumentParser(add_help=False)
    tolerances.add_argument("--tau-env", type=_probability, default=None)
    tolerances.add_argument("--tie-eps", type=_probability, default=None)

    parser = argparse.ArgumentParser(prog="worldmetric",
                                     description="Rank counterfactual world-states by algorithmic similarity.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", parents=[config, output, estimator],
                       help="normalized similarity of two scenario files")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("rank", parents=[config, output, estimator, machines, tolerances],
                       help="rank candidate scenarios against an actual one")
    p.add_argument("actual")
    p.add_argument("candidates", nargs="+", help="scenario files or directories of them")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("ctm", parents=[config, machines], help="build or verify a CTM cache file")
    p.add_argument("--out", help="cache file path (default: content-addressed name in --cache-dir)")
    p.add_argument("--workers", type=_positive, default=None)
    p.add_argument("--cap", type=_positive, default=ctm.DEFAULT_CAP, help="largest class to enumerate")
    p.add_argument("--rebuild", action="store_true", help="re-enumerate even if a cache exists")
    p.set_defaults(func=cmd_ctm)

    p = sub.add_parser("demo-lottery", parents=[config, output, estimator, machines, tolerances],
                       help="the binary lottery: 252 outcomes of the last draw")
    p.add_argument("--ticket", help="five numbers in [0, 255], e.g. '71,43,66,87,99'")
    p.add_argument("--drawn", help="five distinct numbers in [0, 255]")
    p.set_defaults(func=cmd_demo_lottery)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EstimatorError as exc:
        print(f"worldmetric: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR
    except ctm.CtmCapError as exc:
        print(f"worldmetric: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ctm.CacheError as exc:
        print(f"worldmetric: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except (ScenarioError, StructuralError, UsageError) as exc:
        print(f"worldmetric: {exc}", file=sys.stderr)
        return EXIT_USAGE
