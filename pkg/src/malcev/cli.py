"""Command-line driver.

Subcommands ``good-copy``, ``bad-copy``, ``verify``, ``oracle-compare`` and
``diagram``.  Each takes ``--config=FILE`` (JSON, ``"schema": 1``); any
``--key=value`` flag overrides the matching config key.  Traces are JSONL,
diagrams CSV.  ``MALCEV_LOG`` sets the log level.

Exit codes: 0 done, 2 resumable (a search budget ran out), 3 property
violation or failed check, 4 invalid witness or unusable guesser plugin,
64 bad usage.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Mapping, Sequence

from . import aoag, bad_copy, good_copy, grids, tfag
from .oracle import OracleContext

log = logging.getLogger("malcev")

EXIT_OK, EXIT_RESUMABLE, EXIT_VIOLATION, EXIT_WITNESS, EXIT_USAGE = 0, 2, 3, 4, 64

DEFAULTS = {
    "schema": 1,
    "class": "tfag",
    "spec": None,
    "stages": 200,
    "scramble": "none",
    "p5_budget": 64,
    "max_t_steps": 20000,
    "lookahead": 2,
    "witness_budget": 200000,
    "guessers": None,
    "verify": True,
    "size": 20,
    "grids": ["dependence", "closure", "certificates"],
    "fragment": None,
    "t_max": 5000,
    "semidecide_budget": 64,
    "seed": 0,
    "trace": None,
    "diagram": None,
}

# keys that describe outputs, not the run; kept out of the trace
OUTPUT_KEYS = ("trace", "diagram", "verify")


class UsageError(ValueError):
    pass


# ------------------------------------------------------------------ config


def load_config(path: str | None, overrides: Mapping) -> dict:
    cfg = dict(DEFAULTS)
    if path:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if doc.get("schema", 1) != 1:
            raise UsageError("unsupported config schema")
        unknown = set(doc) - set(DEFAULTS) - {"construction"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    if cfg["class"] not in ("tfag", "aoag"):
        raise UsageError(f"unknown class {cfg['class']!r}")
    return cfg


def _flag_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_overrides(extra: Sequence[str]) -> dict:
    out = {}
    for arg in extra:
        if not arg.startswith("--") or "=" not in arg:
            raise UsageError(f"expected --key=value, got {arg!r}")
        key, _, val = arg[2:].partition("=")
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"unknown option --{key}")
        out[key] = _flag_value(val)
    return out


def schedule_from(cfg) -> tuple:
    sc = cfg["scramble"]
    if sc in (None, "none", False):
        return ()
    if sc == "default":
        return tfag.DEFAULT_SCHEDULE
    return tuple(tfag.Collapse.from_json(c) for c in sc)


def build_structure(cfg):
    sched = schedule_from(cfg)
    if cfg["class"] == "tfag":
        spec = tfag.GroupSpec.from_json(cfg["spec"] or {})
        return tfag.scrambled_presentation(spec, sched) if sched else tfag.standard_presentation(spec)
    spec = aoag.LogGroupSpec.from_json(cfg["spec"] or {})
    return aoag.scrambled_presentation(spec, sched) if sched else aoag.standard_presentation(spec)


def engine(cfg, structure):
    """Closure approximation plus Condition-G oracle for the configured class."""
    if cfg["class"] == "tfag":
        return tfag.closure_approx(structure), tfag.GroupConditionG(structure)
    return aoag.closure_approx(structure), aoag.LogConditionG(structure)


def run_config(cfg) -> dict:
    return {k: v for k, v in cfg.items() if k not in OUTPUT_KEYS}


def _write(path, text):
    if path:
        Path(path).write_text(text)


# ---------------------------------------------------------------- commands


def cmd_good_copy(cfg) -> int:
    S = build_structure(cfg)
    closure, oracle = engine(cfg, S)
    sched = good_copy.SearchSchedule(int(cfg["lookahead"]), int(cfg["p5_budget"]), int(cfg["max_t_steps"]))
    res = good_copy.run(closure, oracle, int(cfg["stages"]), sched, config={**run_config(cfg), "construction": "good-copy"})
    _write(cfg["trace"], good_copy.dumps_trace(res.trace))
    if res.states:
        _write(cfg["diagram"], res.final.committed(S).to_csv())
    if cfg.get("verify", True):
        bad = good_copy.verify_trace(res.trace, closure, oracle, int(cfg["p5_budget"]))
        if bad:
            for s, tags in bad:
                print(f"stage {s}: {' '.join(tags)}")
            return EXIT_VIOLATION
    if res.status != "complete":
        print(f"resumable at stage {res.final.s if res.states else -1}")
        return EXIT_RESUMABLE
    print(f"complete: {res.final.s} stages, t={res.final.t}, basis images {list(res.final.images()[:10])}")
    return EXIT_OK


def guessers_from(cfg) -> list:
    g = cfg["guessers"]
    if g is None:
        return bad_copy.guesser_suite(seed=int(cfg["seed"]) or 7)
    if isinstance(g, str):
        g = [{"kind": k} for k in g.split(",") if k]
    return [bad_copy.guesser_from_json(d) for d in g]


def bad_copy_hook(cfg, structure):
    if cfg["class"] == "tfag":
        return bad_copy.GroupConditionB(structure, int(cfg["witness_budget"])), 1
    return bad_copy.LogConditionB(structure, int(cfg["witness_budget"])), 2


def _bad_copy_run(cfg):
    S = build_structure(cfg)
    if schedule_from(cfg):
        raise UsageError("bad-copy needs the standard presentation (its basis is the generators)")
    hook, anchors = bad_copy_hook(cfg, S)
    builder = bad_copy.BadCopyBuilder(S, hook, guessers_from(cfg), anchors)
    builder.emit({"event": "run_config", **run_config(cfg), "construction": "bad-copy"})
    return builder.run(int(cfg["stages"]))


def cmd_bad_copy(cfg) -> int:
    try:
        res = _bad_copy_run(cfg)
    except bad_copy.PluginError as exc:
        print(json.dumps({"event": "abort", "reason": "plugin", "detail": str(exc)}))
        return EXIT_WITNESS
    except bad_copy.InvalidWitnessError as exc:
        print(json.dumps({"event": "abort", "reason": "invalid witness", "counterexample": exc.record}))
        return EXIT_WITNESS
    _write(cfg["trace"], bad_copy.dumps_log(res.log))
    _write(cfg["diagram"], res.fragment().to_csv())
    problems = bad_copy_problems(res)
    for p in problems:
        print(p)
    acts = sum(1 for ev in res.log if ev["event"] == "act")
    print(f"bad copy: {len(res.state.values)} elements, {acts} acts")
    return EXIT_VIOLATION if problems else EXIT_OK


def bad_copy_problems(res) -> list[str]:
    out = []
    acted = [ev["e"] for ev in res.log if ev["event"] == "act"]
    for e in set(acted):
        if acted.count(e) > 1:
            out.append(f"R{e} acted {acted.count(e)} times")
        if not bad_copy.verify_defeated(res, e):
            out.append(f"R{e} acted but its guesser is not defeated")
    for r in res.state.requirements:
        if isinstance(r.guesser, bad_copy.OracleGuesser) and bad_copy.verify_defeated(res, r.e):
            out.append(f"oracle guesser R{r.e} defeated")
    if not bad_copy.pullback_check(res):
        out.append("pullback check failed")
    return out


def _read_jsonl(path) -> list[dict]:
    try:
        text = Path(path).read_text()
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read trace {path}: {exc}") from exc


def cmd_verify(path: str) -> int:
    events = _read_jsonl(path)
    if not events:
        print("empty trace: nothing to check")
        return EXIT_OK
    head = events[0]
    if head.get("event") == "config" and head.get("construction", "good-copy") == "good-copy":
        cfg = load_config(None, {k: v for k, v in head.items() if k in DEFAULTS})
        S = build_structure(cfg)
        closure, oracle = engine(cfg, S)
        bad = good_copy.verify_trace(events, closure, oracle, int(cfg["p5_budget"]))
        for s, tags in bad:
            print(f"stage {s}: {' '.join(tags)}")
        print(f"{len(good_copy.states_from_trace(events))} stages checked, {len(bad)} failing")
        return EXIT_VIOLATION if bad else EXIT_OK
    run_ev = next((ev for ev in events if ev.get("event") == "run_config"), None)
    if run_ev is None:
        raise UsageError("trace has no config record")
    cfg = load_config(None, {k: v for k, v in run_ev.items() if k in DEFAULTS})
    res = _bad_copy_run(cfg)
    problems = bad_copy_problems(res)
    if bad_copy.dumps_log(res.log) != bad_copy.dumps_log(events):
        problems.append("replay differs from the recorded log")
    for p in problems:
        print(p)
    print(f"bad-copy log replayed, {len(problems)} problems")
    return EXIT_VIOLATION if problems else EXIT_OK


def oracle_compare(cfg) -> dict:
    S = build_structure(cfg)
    closure, _ = engine(cfg, S)
    ctx = OracleContext(S, cfg["class"])
    report = {}
    frag = cfg["fragment"]
    for name in cfg["grids"]:
        if name == "dependence":
            r = grids.dependence_grid(ctx, closure, frag or 12)
            got, want = grids.basis_prefix_check(ctx, closure)
            r.extra["basis_prefix"] = got
            if got != want:
                r.disagree += 1
                r.failures.append({"basis_prefix": got, "oracle": want})
        elif name == "closure":
            r = grids.closure_grid(ctx, closure, frag or 12, t_max=int(cfg["t_max"]))
        elif name == "certificates":
            mod = tfag if cfg["class"] == "tfag" else aoag
            r = grids.certificate_grid(
                ctx,
                lambda cs, phi, b: mod.indep_diagram_semidecide(S, cs, phi, b),
                frag or 10,
                budget=int(cfg["semidecide_budget"]),
            )
        else:
            raise UsageError(f"unknown grid {name!r}")
        report[name] = r.to_json()
    return report


def cmd_oracle_compare(cfg) -> int:
    report = oracle_compare(cfg)
    print(json.dumps(report, indent=1, sort_keys=True))
    bad = any(r["disagree"] or r.get("monotonicity_violations") for r in report.values())
    return EXIT_VIOLATION if bad else EXIT_OK


def cmd_diagram(cfg) -> int:
    S = build_structure(cfg)
    text = S.fragment(int(cfg["size"])).to_csv()
    if cfg["diagram"]:
        _write(cfg["diagram"], text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -------------------------------------------------------------------- main


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage, which would read as "resumable"
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="malcev", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("good-copy", "bad-copy", "oracle-compare", "diagram"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
    sv = sub.add_parser("verify")
    sv.add_argument("trace")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("MALCEV_LOG", "WARNING").upper())
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        if args.command == "verify":
            if extra:
                raise UsageError(f"unexpected arguments {extra}")
            return cmd_verify(args.trace)
        cfg = load_config(args.config, parse_overrides(extra))
        if args.command == "good-copy":
            return cmd_good_copy(cfg)
        if args.command == "bad-copy":
            return cmd_bad_copy(cfg)
        if args.command == "oracle-compare":
            return cmd_oracle_compare(cfg)
        return cmd_diagram(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
