"""Command-line front end.

Every subcommand accepts ``--seed``, ``--format {json,csv}``, ``--output``
and ``--config``. A config file is a JSON object whose keys are option names
(``trials``, ``a_prime``, ...); explicit flags override it and unknown keys
are rejected. Without ``--seed`` the seed comes from ``$CQM_SEED`` and then
from :data:`DEFAULT_SEED`.

Exit codes: 0 success, 1 invalid input, 2 numerical failure. Diagnostics go
to stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import report
from .algebra import make_observable, matrix_from_json
from .contexts import ObservableFamily, contexts_to_json, maximal_contexts
from .errors import CQMError, NumericalFailure, ValidationError
from .experiments import (CHSHConfig, KSInstance, chsh_run, classical_chsh_baseline, ks_18ray,
                          ks_check, pauli_walkthrough)
from .gns import gns_construct, verify_representation
from .oscillator import GreenRequest, build_truncation, green_report
from .probability import MeasurementConfig, StateFunctional, sample
from .states import prepare

DEFAULT_SEED = 20240607
GLOBAL_KEYS = {"seed", "format", "output", "config"}


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def load_family(path: str) -> ObservableFamily:
    """``{"observables": [{"label": str, "matrix": {"dim", "re", "im"}}, ...]}``."""
    obj = _load_json(path)
    try:
        pairs = [(o["label"], make_observable(matrix_from_json(o["matrix"]))) for o in obj["observables"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed family file {path}: {exc}") from exc
    return ObservableFamily.from_pairs(pairs)


def _flatten(prefix: str, obj, rows: list):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    elif isinstance(obj, complex):
        rows.append((prefix + ".re", report._float(obj.real)))
        rows.append((prefix + ".im", report._float(obj.imag)))
    elif isinstance(obj, float):
        rows.append((prefix, report._float(obj)))
    else:
        rows.append((prefix, "" if obj is None else str(obj)))


def key_value_csv(obj: dict) -> str:
    rows: list = []
    _flatten("", obj, rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    w.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------ subcommands


def cmd_chsh(args):
    cfg = CHSHConfig(args.a, args.b, args.a_prime, args.b_prime, args.trials, args.seed)
    rep = chsh_run(cfg, workers=args.workers)
    out = {"subcommand": "chsh", "seed": args.seed,
           "angles": {"a": args.a, "b": args.b, "a_prime": args.a_prime, "b_prime": args.b_prime},
           "trials": args.trials}
    out.update(rep.to_json())
    out["z_score"] = rep.z_score
    return out, rep.to_csv()


def cmd_chsh_classical(args):
    rep = classical_chsh_baseline(args.seed, args.trials, args.model)
    out = {"subcommand": "chsh-classical"}
    out.update(rep.to_json())
    return out, None


def cmd_ks(args):
    inst = ks_18ray() if args.instance == "18ray" else KSInstance.from_json(_load_json(args.instance))
    res = ks_check(inst, count_all=args.count_all)
    out = {"subcommand": "ks", "instance": args.instance, "rays": len(inst.rays),
           "contexts": len(inst.contexts)}
    out.update(res.to_json())
    return out, None


def cmd_pauli(args):
    a = np.array([[args.a, complex(args.b_re, args.b_im)], [complex(args.b_re, -args.b_im), args.d]])
    rep = pauli_walkthrough(a, args.e0)
    out = {"subcommand": "pauli-demo", "matrix": {"a": args.a, "b_re": args.b_re,
                                                  "b_im": args.b_im, "d": args.d}, "E0": args.e0}
    out.update(rep.to_json())
    return out, None


def cmd_oscillator(args):
    if args.times is not None:
        times = args.times
    else:
        gen = np.random.default_rng(args.seed)
        times = [float(t) for t in gen.uniform(-3.0 / args.nu, 3.0 / args.nu, args.order)]
    req = GreenRequest(tuple(times), build_truncation(args.N, args.nu))
    out = {"subcommand": "oscillator", "nu": args.nu}
    out.update(green_report(req))
    return out, None


def cmd_gns(args):
    if args.weight is not None:
        psi = StateFunctional(matrix_from_json(_load_json(args.weight)))
    else:
        psi = StateFunctional.maximally_mixed(args.tracial)
    rep = gns_construct(psi.dim, psi, args.rank_tol)
    check = verify_representation(rep, args.trials, args.seed)
    out = {"subcommand": "gns", "seed": args.seed, "n": rep.n, "rep_dim": rep.rep_dim,
           "violations": len(check.violations), "max_residuals": check.max_residuals,
           "representation": rep.to_json()}
    return out, None


def _index_pair(text: str) -> tuple[int, int]:
    try:
        i, k = text.split(":")
        return int(i), int(k)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected CONTEXT:OUTCOME, got {text!r}") from exc


def cmd_sample(args):
    fam = load_family(args.family)
    ctxs = maximal_contexts(fam)
    i, k = args.prep
    j = args.measure
    for idx in (i, j):
        if not 0 <= idx < len(ctxs):
            raise ValidationError(f"context index {idx} out of range (family has {len(ctxs)})")
    prep = prepare(ctxs[i], k)
    s = sample(MeasurementConfig(prep, ctxs[j], args.trials, args.seed), workers=args.workers)
    out = {"subcommand": "sample", "preparation": {"context_id": prep.anchor_context, "outcome": k}}
    out.update(s.to_json())
    return out, s.to_csv()


def cmd_contexts(args):
    fam = load_family(args.family)
    ctxs = maximal_contexts(fam, min_size=args.min_size)
    out = {"subcommand": "contexts", "count": len(ctxs), "contexts": contexts_to_json(ctxs)}
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["context_id", "sources", "maximal_within_family"])
    for c in ctxs:
        w.writerow([c.id, ";".join(c.source_observables), c.maximal_within_family])
    return out, rows.getvalue()


def build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None)
    common.add_argument("--config", default=None)

    parser = _Parser(prog="cqm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chsh", parents=[common], help="contextual CHSH Monte Carlo")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=math.pi / 8)
    p.add_argument("--a-prime", type=float, default=math.pi / 4)
    p.add_argument("--b-prime", type=float, default=3 * math.pi / 8)
    p.add_argument("--trials", type=int, default=10**6)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("chsh-classical", parents=[common], help="noncontextual baseline")
    p.add_argument("--trials", type=int, default=10**6)
    p.add_argument("--model", choices=("sign", "constant"), default="sign")
    p.set_defaults(func=cmd_chsh_classical)

    p = sub.add_parser("ks", parents=[common], help="Kochen-Specker colouring search")
    p.add_argument("--instance", default="18ray")
    p.add_argument("--count-all", action="store_true")
    p.set_defaults(func=cmd_ks)

    p = sub.add_parser("pauli-demo", parents=[common], help="two-level walkthrough")
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--d", type=float, default=0.0)
    p.add_argument("--b-re", type=float, default=1.0)
    p.add_argument("--b-im", type=float, default=0.0)
    p.add_argument("--e0", type=float, default=1.0)
    p.set_defaults(func=cmd_pauli)

    p = sub.add_parser("oscillator", parents=[common], help="Green functions, Wick vs operator")
    p.add_argument("--N", type=int, default=40)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--times", type=_floats, default=None)
    p.add_argument("--order", type=int, default=4)
    p.set_defaults(func=cmd_oscillator)

    p = sub.add_parser("gns", parents=[common], help="GNS construction and checks")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--weight", default=None, help="JSON matrix file with the state's weight")
    g.add_argument("--tracial", type=int, default=2, help="use the tracial state on n x n")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--rank-tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_gns)

    p = sub.add_parser("sample", parents=[common], help="sample one device")
    p.add_argument("--family", required=True)
    p.add_argument("--prep", type=_index_pair, default=(0, 0))
    p.add_argument("--measure", type=int, default=0)
    p.add_argument("--trials", type=int, default=10**5)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("contexts", parents=[common], help="enumerate contexts of a family")
    p.add_argument("--family", required=True)
    p.add_argument("--min-size", type=int, default=1)
    p.set_defaults(func=cmd_contexts)
    return parser


def _apply_config(parser: _Parser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    cfg = _load_json(args.config)
    if not isinstance(cfg, dict):
        raise ValidationError("config file must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions} - {"help", "config"}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ValidationError(f"unknown config keys for {args.command}: {unknown}")
    subparser.set_defaults(**cfg)
    try:
        return parser.parse_args(argv)
    finally:
        subparser.set_defaults(**{k: None for k in cfg})


def _diagnose(kind: str, exc: Exception):
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.seed is None:
            env = os.environ.get("CQM_SEED")
            try:
                args.seed = int(env) if env not in (None, "") else DEFAULT_SEED
            except ValueError as exc:
                raise ValidationError(f"CQM_SEED is not an integer: {env!r}") from exc
        payload, table = args.func(args)
        text = report.dumps(payload) if args.format == "json" else (table or key_value_csv(payload))
        sys.stdout.write(text)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return 0
    except NumericalFailure as exc:
        _diagnose("numerical", exc)
        return 2
    except (CQMError, ValueError, TypeError, OSError) as exc:
        _diagnose("usage" if isinstance(exc, UsageError) else "validation", exc)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
