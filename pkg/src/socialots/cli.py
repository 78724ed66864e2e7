"""Command line: ``socialots check | run | explain``.

Exit codes: 0 everything holds or reproduces, 1 a violation or failed
expectation, 2 bad input (flags, parse errors, schema mismatch, a state
space over the limit, or an exploration cut short by ``--max-states``).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import lang, verifier
from .kernel import OtsError
from .lang import ParseError
from .social import EXTENSIONS, PLACEHOLDERS, SocialNetwork, social_bounds
from .universe import DEFAULT_MAX_STATES

OK, VIOLATION, BAD_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def _csv(text: str) -> list[str]:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a non-empty comma-separated list")
    if len(set(items)) != len(items):
        raise argparse.ArgumentTypeError(f"duplicate entries in {text!r}")
    return items


def _uids(text: str) -> list[int]:
    try:
        values = [int(x) for x in _csv(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"uids must be naturals: {text!r}") from None
    if any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("uids must be non-negative")
    return values


def _places(text: str) -> list[str]:
    items = _csv(text)
    bad = [x for x in items if x not in PLACEHOLDERS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown placeholder {bad[0]!r}")
    return [p for p in PLACEHOLDERS if p in items]


def _caps(text: str) -> dict[str, int]:
    caps = {}
    for part in _csv(text):
        key, sep, value = part.partition("=")
        if not sep or key not in ("seq", "set"):
            raise argparse.ArgumentTypeError(f"caps look like seq=1,set=2, got {part!r}")
        try:
            caps[key] = int(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"cap {key} must be an integer") from None
        if caps[key] < 1:
            raise argparse.ArgumentTypeError(f"cap {key} must be positive")
    return caps


def _bool(text: str) -> bool:
    if text.lower() in ("true", "1", "yes"):
        return True
    if text.lower() in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--default-visibility", type=_bool, default=True, metavar="{true|false}",
                   help="visibility of a freshly added profile (default true)")
    p.add_argument("--ext", action="append", default=[], choices=sorted(EXTENSIONS),
                   help="enable a model extension (repeatable)")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socialots", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="check invariants")
    check.add_argument("--mode", choices=("reach", "induct", "base", "stutter"), default="reach")
    check.add_argument("--accounts", type=_csv, default=["alice", "bob"])
    check.add_argument("--uids", type=_uids, default=[1, 2])
    check.add_argument("--payloads", type=_csv, default=["p"])
    check.add_argument("--places", type=_places, default=["photos"],
                       help="placeholders whose contents are enumerated (default photos)")
    check.add_argument("--caps", type=_caps, default={"seq": 1, "set": 2})
    check.add_argument("--max-accounts", type=int, default=None,
                       help="induct mode: most installed accounts in a universe state")
    check.add_argument("--invariants", default="builtin", help="an .inv file or 'builtin'")
    check.add_argument("--lemmas", default=None, help="an .inv file of supporting lemmas")
    check.add_argument("--max-states", type=_positive, default=DEFAULT_MAX_STATES)
    check.add_argument("--sample", type=_positive, default=None,
                       help="stutter mode: how many reachable states to test")
    check.add_argument("--no-shrink", action="store_true", help="report traces unshrunk")
    check.add_argument("--out", type=Path, default=None, help="also write the JSON report here")
    _model_flags(check)

    run = sub.add_parser("run", help="execute scenario scripts")
    run.add_argument("scenarios", nargs="+",
                     help="paths to .sns files, or bundled:NAME for a bundled scenario")
    run.add_argument("--invariants", default=None, help="extra definitions for expect-violation")
    _model_flags(run)

    explain = sub.add_parser("explain", help="replay a counterexample and show what changed")
    explain.add_argument("counterexample", type=Path,
                         help="a counterexample JSON file or a report containing one")
    explain.add_argument("--json", action="store_true")
    return parser


# -- definitions -------------------------------------------------------------


def _read(path: str | Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _parse_defs(path: str) -> list[lang.InvariantDef]:
    try:
        return lang.parse_invariant_file(_read(path))
    except ParseError as exc:
        raise UsageError(f"{path}:{exc}") from None


def load_definitions(invariants: str, lemmas: str | None):
    if invariants == "builtin":
        defs = list(verifier.builtin_definitions().values())
    else:
        defs = _parse_defs(invariants)
    invs = [d for d in defs if d.kind == "invariant"]
    lems = [d for d in defs if d.kind == "lemma"]
    if lemmas:
        lems += _parse_defs(lemmas)
    names = [d.name for d in invs + lems]
    dup = next((n for n in names if names.count(n) > 1), None)
    if dup:
        raise UsageError(f"definition {dup!r} appears twice")
    return invs, lems


def bundled_scenarios() -> dict[str, str]:
    root = verifier.resources.files("socialots").joinpath("data").joinpath("scenarios")
    return {
        p.name.removesuffix(".sns"): p.read_text(encoding="utf-8")
        for p in sorted(root.iterdir(), key=lambda x: x.name)
        if p.name.endswith(".sns")
    }


# -- commands ----------------------------------------------------------------


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_check(args) -> int:
    caps = {"seq": 1, "set": 2, **args.caps}
    b = social_bounds(args.accounts, args.uids, args.payloads, args.places, caps["seq"], caps["set"])
    invs, lems = load_definitions(args.invariants, args.lemmas)
    if args.mode != "stutter" and not invs + lems:
        raise UsageError("no invariants to check")
    if args.max_accounts is not None and args.max_accounts < 0:
        raise UsageError("--max-accounts must be non-negative")
    net = SocialNetwork(args.default_visibility, args.ext)
    if args.mode == "base":
        report = verifier.check_base(invs + lems, b, net=net)
    elif args.mode == "reach":
        report = verifier.merge_reports(
            "reach",
            [
                verifier.check_base(invs + lems, b, net=net),
                verifier.explore(b, invs + lems, max_states=args.max_states, net=net),
            ],
        )
    elif args.mode == "induct":
        report = verifier.induct(invs, lems, b, args.max_accounts, max_states=args.max_states, net=net)
    else:
        report = verifier.check_stutter(b, args.sample, net=net, max_states=args.max_states)
    if not args.no_shrink:
        for v in report.verdicts:
            if isinstance(v.counterexample, verifier.ReachTrace):
                v.counterexample = verifier.shrink(v.counterexample, net)
    payload = report.to_json()
    if args.out:
        args.out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _emit(args, payload, report.format())
    if not report.complete:
        print("exploration stopped at --max-states; raise it for a complete run", file=sys.stderr)
        return BAD_INPUT
    return OK if report.ok else VIOLATION


def cmd_run(args) -> int:
    extra = {}
    if args.invariants:
        extra = {d.name: d for d in _parse_defs(args.invariants)}
    bundled = None
    code = OK
    results = []
    for ref in args.scenarios:
        if ref.startswith("bundled:"):
            bundled = bundled if bundled is not None else bundled_scenarios()
            name = ref.removeprefix("bundled:")
            if name not in bundled:
                raise UsageError(f"no bundled scenario {name!r}; have {', '.join(bundled)}")
            src = bundled[name]
        else:
            src = _read(ref)
        try:
            sc = lang.parse_scenario(src)
        except ParseError as exc:
            raise UsageError(f"{ref}:{exc}") from None
        trace = lang.run_scenario(sc, args.ext, args.default_visibility, extra)
        results.append(trace)
        if not trace.passed:
            code = VIOLATION
    if args.json:
        payload = results[0].to_json() if len(results) == 1 else [t.to_json() for t in results]
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(t.format() for t in results))
    return code


def _pick_counterexample(data):
    if isinstance(data, dict) and "verdicts" in data:
        if data.get("schema") != verifier.SCHEMA:
            raise verifier.ReplayError(f"unsupported report schema {data.get('schema')!r}")
        for v in data["verdicts"]:
            if "counterexample" in v:
                return v["counterexample"]
        raise verifier.ReplayError("report contains no counterexample")
    return data


def _fmt(value) -> str:
    return json.dumps(value, separators=(", ", ": "))


def cmd_explain(args) -> int:
    try:
        data = json.loads(_read(args.counterexample))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.counterexample}: not JSON ({exc.msg})") from None
    ce = verifier.counterexample_from_json(_pick_counterexample(data))
    net = SocialNetwork(ce.default_visibility, ce.extensions)
    reproduced = verifier.replay(ce, net)
    env = ", ".join(f"{k}={v}" for k, v in ce.env.items())
    lines = [f"{ce.invariant.kind} {ce.invariant.name} at {env}"]
    steps = []
    if isinstance(ce, verifier.ReachTrace):
        s = net.initial()
        for i, st in enumerate(ce.steps, 1):
            t, applied = net.apply(s, st.transition, st.args)
            delta = verifier.observation_delta(s, t)
            call = lang.print_call(lang.Call(st.transition, st.args))
            lines.append(f"{i:>3}. {call}{'' if applied else '  [stutter]'}")
            lines += [f"       {path}: {_fmt(old)} -> {_fmt(new)}" for path, old, new in delta]
            steps.append({"call": call, "applied": applied,
                          "delta": [{"observer": p, "before": o, "after": n} for p, o, n in delta]})
            s = t
    else:
        t, applied = net.apply(ce.pre_state, ce.transition, ce.args)
        call = lang.print_call(lang.Call(ce.transition, ce.args))
        lines.append(f"from an arbitrary state satisfying the hypothesis, apply {call}")
        delta = verifier.observation_delta(ce.pre_state, t)
        lines += [f"       {path}: {_fmt(old)} -> {_fmt(new)}" for path, old, new in delta]
        steps.append({"call": call, "applied": applied,
                      "delta": [{"observer": p, "before": o, "after": n} for p, o, n in delta]})
    lines.append("violation reproduced" if reproduced else "violation NOT reproduced")
    payload = {"schema": verifier.SCHEMA, "invariant": ce.invariant.name, "reproduced": reproduced,
               "steps": steps}
    _emit(args, payload, "\n".join(lines))
    return OK if reproduced else VIOLATION


COMMANDS = {"check": cmd_check, "run": cmd_run, "explain": cmd_explain}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else BAD_INPUT
    try:
        return COMMANDS[args.command](args)
    except (UsageError, OtsError) as exc:
        # covers parse, replay, universe-size and disabled-extension errors
        print(f"socialots: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
