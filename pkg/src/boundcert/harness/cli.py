"""Command line entry point: ``boundcert <subcommand> ...``.

Exit status is 0 exactly when every check requested by the subcommand passes,
1 when a check fails and 2 on usage or input errors.
"""

import argparse
import json
import math
import sys

from ..errors import DomainError, NumericalError, SamplerError, ValidationError
from .commands import certify_cmd, evolve_cmd, fr_compare_cmd, window_cmd
from .scenario import load_scenario
from .suites import SUITES, failed_checks, report_json, run_suite

REPORT_TRIALS = 25


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _verify(args):
    rep = run_suite(args.suite, args.trials, args.seed, dump_dir=args.dump_dir)
    _emit(report_json(rep), args.out)
    for name in failed_checks(rep):
        print(f"FAILED {name}", file=sys.stderr)
    return 0 if rep["pass"] else 1


def _evolve(args):
    res = evolve_cmd(load_scenario(args.scenario), allow_nonsecular=args.allow_nonsecular)
    _emit(res.text, args.out)
    return 0 if res.ok else 1


def _certify(args):
    res = certify_cmd(load_scenario(args.scenario), allow_nonsecular=args.allow_nonsecular)
    _emit(res.text, args.out)
    if not res.ok:
        print(f"certification checks failed: {res.details}", file=sys.stderr)
    return 0 if res.ok else 1


def _json_cmd(fn):
    def run(args):
        res = fn(load_scenario(args.scenario))
        _emit(json.dumps(_clean(res.text), indent=1, sort_keys=True) + "\n", args.out)
        return 0 if res.ok else 1
    return run


def _report(args):
    rep = run_suite("all", args.trials, args.seed)
    _emit(report_json(rep), args.out)
    return 0 if rep["pass"] else 1


def build_parser():
    p = argparse.ArgumentParser(prog="boundcert", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a seeded verification suite")
    v.add_argument("--suite", required=True, choices=SUITES + ("all",))
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None, help="report file (default stdout)")
    v.add_argument("--dump-dir", default=None, help="write failing instances here")
    v.set_defaults(func=_verify)

    for name, func, help_ in (("evolve", _evolve, "trajectory CSV"),
                              ("certify", _certify, "certified activation CSV")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--scenario", required=True)
        s.add_argument("--out", default=None)
        s.add_argument("--allow-nonsecular", action="store_true")
        s.set_defaults(func=func)

    for name, fn, help_ in (("window", window_cmd, "closed-form dominance windows"),
                            ("fr-compare", fr_compare_cmd, "coherence bound vs recoverability remainder")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--scenario", required=True)
        s.add_argument("--out", default=None)
        s.set_defaults(func=_json_cmd(fn))

    r = sub.add_parser("report", help="run every suite and write the report")
    r.add_argument("--out", required=True)
    r.add_argument("--trials", type=int, default=REPORT_TRIALS)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be positive")
    try:
        return args.func(args)
    except (ValidationError, DomainError, SamplerError, NumericalError, OSError,
            json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
