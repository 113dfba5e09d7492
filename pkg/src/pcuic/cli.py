"""Command-line driver."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checker import CheckedEnv, check_env, infer, no_guard
from .env import ConstantBody, lookup_constant
from .erasure import EConst, emit_env, emit_value, erase_env, eval_erased, optimize_boxes, prune_env
from .errors import PcuicError
from .meta import SUITES, run_suite
from .printer import print_term
from .reduction import DEFAULT_FUEL, Fuel, cbv_eval
from .resolve import load
from .term import Const


class Failure(Exception):
    """A failure of the driver itself (bad arguments, missing file)."""

    def __init__(self, code: str, message: str, exit_code: int = 2):
        super().__init__(message)
        self.code = code
        self.message = message
        self.exit_code = exit_code


def _span(err) -> dict | None:
    span = getattr(err, "span", None)
    if span is None:
        return None
    return {"line": span.line, "col": span.col}


def diagnostic(path: str, err: Exception) -> dict:
    if isinstance(err, (PcuicError, Failure)):
        code, message, exit_code = err.code, err.message, err.exit_code
    else:
        raise err
    d = {
        "severity": "error",
        "file": path,
        "code": code,
        "span": _span(err),
        "message": message,
        "exit_code": exit_code,
    }
    decl = getattr(err, "decl", None)
    if decl is not None:
        d["decl"] = decl
    return d


def format_diagnostic(d: dict) -> str:
    where = d["file"]
    if d["span"]:
        where += f":{d['span']['line']}:{d['span']['col']}"
    decl = f" (in {d['decl']})" if "decl" in d else ""
    return f"{where}: error[{d['code']}]: {d['message']}{decl}"


def _load_checked(args) -> tuple[CheckedEnv, object]:
    try:
        src = Path(args.file).read_text()
    except OSError as e:
        raise Failure("io-error", f"cannot read {args.file}: {e.strerror}") from None
    prog = load(src)
    guard = no_guard if getattr(args, "unsafe_no_guard", False) else None
    E = check_env(prog.env, fuel=args.fuel, guard=guard)
    return E, prog


def _require_constant(E: CheckedEnv, name: str) -> ConstantBody:
    if name not in E.env:
        raise Failure("unbound-name", f"no declaration named {name}")
    return lookup_constant(E.env, name)


def cmd_check(args) -> dict:
    E, prog = _load_checked(args)
    return {"status": "ok", "declarations": len(E.env.decls), "text": f"{args.file}: ok ({len(E.env.decls)} declarations)"}


def cmd_infer(args) -> dict:
    E, _ = _load_checked(args)
    name = args.term
    ref = E.env.global_ref(name)
    if ref is None:
        raise Failure("unbound-name", f"no declaration named {name}")
    d = E.env.lookup(name)
    target = d.body if isinstance(d, ConstantBody) and d.body is not None else ref
    ty = infer(E, [], target, Fuel(args.fuel))
    text = print_term(ty, E.env)
    return {"status": "ok", "term": name, "type": text, "text": f"{name} : {text}"}


def cmd_eval(args) -> dict:
    E, _ = _load_checked(args)
    _require_constant(E, args.term)
    if args.erased:
        env = erase_env(E, fuel=args.fuel)
        if args.prune:
            env = prune_env(env, args.term)
        if args.optimize:
            env = optimize_boxes(env)
        text = emit_value(eval_erased(env, EConst(args.term), Fuel(args.fuel)), env)
    else:
        text = print_term(cbv_eval(E.env, Const(args.term), Fuel(args.fuel)), E.env)
    return {"status": "ok", "term": args.term, "value": text, "text": text}


def cmd_erase(args) -> dict:
    E, _ = _load_checked(args)
    _require_constant(E, args.root)
    env = erase_env(E, fuel=args.fuel)
    if args.prune:
        env = prune_env(env, args.root)
    if args.optimize:
        env = optimize_boxes(env)
    out = {"status": "ok", "root": args.root, "decls": env.names()}
    if args.emit_erased:
        out["erased"] = emit_env(env)
        out["text"] = out["erased"].rstrip("\n")
    else:
        out["text"] = "\n".join(env.names())
    return out


def cmd_meta(args) -> dict:
    report = run_suite(args.suite, max_size=args.max_size, seed=args.seed, trials=args.trials, fuel=args.fuel)
    lines = [f"{args.suite}: {report.checked} checked, {len(report.counterexamples)} counterexamples"]
    lines += [f"counterexample: {c}" for c in report.counterexamples]
    return {
        "status": "ok" if not report.counterexamples else "counterexample",
        "suite": args.suite,
        "checked": report.checked,
        "skipped": report.skipped,
        "counterexamples": list(report.counterexamples),
        "text": "\n".join(lines),
        "exit_code": 0 if not report.counterexamples else 1,
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcuic", description="Check, evaluate and erase PCUIC source files.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="reduction step budget")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--unsafe-no-guard", action="store_true", help="skip the fixpoint guard check")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="type check a file")
    c.add_argument("file")
    c.set_defaults(run=cmd_check)

    c = sub.add_parser("infer", parents=[common], help="print the principal type of a declaration")
    c.add_argument("file")
    c.add_argument("--term", required=True)
    c.set_defaults(run=cmd_infer)

    c = sub.add_parser("eval", parents=[common], help="evaluate a definition")
    c.add_argument("file")
    c.add_argument("--term", required=True)
    c.add_argument("--erased", action="store_true", help="evaluate the erased program instead")
    c.add_argument("--prune", action="store_true")
    c.add_argument("--optimize", action="store_true")
    c.set_defaults(run=cmd_eval)

    c = sub.add_parser("erase", parents=[common], help="erase a file to lambda-box")
    c.add_argument("file")
    c.add_argument("--root", required=True)
    c.add_argument("--prune", action="store_true")
    c.add_argument("--optimize", action="store_true")
    c.add_argument("--emit-erased", action="store_true", help="print the erased program as s-expressions")
    c.set_defaults(run=cmd_erase)

    c = sub.add_parser("meta", parents=[common], help="run a metatheory property suite")
    c.add_argument("--suite", required=True, choices=SUITES)
    c.add_argument("--max-size", type=int, help="node bound for generated terms (suite default if unset)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--trials", type=int, help="sample count (suite default if unset)")
    c.set_defaults(run=cmd_meta)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    path = getattr(args, "file", "<meta>")
    try:
        out = args.run(args)
        code = out.pop("exit_code", 0)
    except (PcuicError, Failure) as e:
        out = diagnostic(path, e)
        code = out["exit_code"]
        out["status"] = "error"
        out["text"] = format_diagnostic(out)
    except RecursionError:
        out = {"status": "error", "file": path, "code": "out-of-fuel", "span": None,
               "message": "recursion limit reached", "exit_code": 4}
        code = 4
        out["text"] = format_diagnostic(out)
    text = out.pop("text")
    if args.json:
        print(json.dumps(out, sort_keys=True))
    else:
        print(text, file=sys.stdout if code == 0 else sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
