"""Command line front end.

Exit codes: 0 success, 1 malformed input, 2 precondition failure,
3 computation failure (the failing stage is reported), 4 uncertified results
under --require-certified.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .engine import JobSpec, PreconditionError, StageError, run_job, uncertified
from .exactpoly import ParseError


class InputError(Exception):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        super().__init__(msg)
        self.line = line
        self.col = col


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _split(text: str | None) -> list:
    if text is None:
        return []
    return [t.strip() for t in text.split(";") if t.strip()]


def _ints(text: str | None):
    if text is None:
        return None
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected comma separated integers, got {text!r}") from None


def _vars(text: str | None) -> list:
    return [v.strip() for v in (text or "").split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--job", help="JobSpec JSON file; inline flags are ignored")
    common.add_argument("--seed", type=int, default=None, help="defaults to $EDRC_SEED or 0")
    common.add_argument("--require-certified", action="store_true")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings")
    common.add_argument("--output", help="write JSON here instead of stdout")
    common.add_argument("--vars", help="comma separated variable names")

    ap = _Parser(prog="edrc", description="Exact de Rham cohomology of affine varieties.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", parents=[common], help="evaluate the closed-form degree bounds")
    for k in ("p", "m", "n", "D", "d", "dp", "d0", "d1", "s", "l", "t"):
        b.add_argument(f"--{k}", type=int)
    b.add_argument("--deg-alpha", type=int, dest="deg_alpha")
    b.add_argument("--Ds", help="comma separated component degrees")

    c = sub.add_parser("certificate", parents=[common], help="Nullstellensatz certificate")
    c.add_argument("--ideal", default="", help="generators of X separated by ';'")
    c.add_argument("--gens", required=False, help="polynomials g_i separated by ';'")
    c.add_argument("--cap", type=int)
    c.add_argument("--dim", type=int)
    c.add_argument("--degree", type=int)

    i = sub.add_parser("idempotents", parents=[common], help="idempotents for a union of components")
    i.add_argument("--component", action="append", default=[],
                   help="generators of one component separated by ';' (repeat per component)")
    i.add_argument("--method", choices=("kollar", "jelonek"), default="kollar")
    i.add_argument("--degrees")
    i.add_argument("--dims")

    h = sub.add_parser("cohomology", parents=[common], help="de Rham cohomology of X")
    h.add_argument("--ideal", default="", help="generators separated by ';'")
    h.add_argument("--component", action="append", default=[])
    h.add_argument("--route", choices=("closed", "pipeline"), default="closed")
    h.add_argument("--dim", type=int)
    h.add_argument("--degrees")
    h.add_argument("--window", type=int, help="fixed degree window instead of stabilization")

    y = sub.add_parser("hypersurface", parents=[common], help="cohomology of Z(f) minus Z(g)")
    y.add_argument("--f")
    y.add_argument("--g")
    y.add_argument("--p-max", type=int, dest="p_max")
    y.add_argument("--window", type=int)

    r = sub.add_parser("residue", parents=[common], help="residue of a form with poles on f0 f1")
    r.add_argument("--f")
    r.add_argument("--g")
    r.add_argument("--form", help='JSON object such as {"dX0^dx": "x"}')
    r.add_argument("--order", type=int, default=1)
    r.add_argument("--lambda", action="store_true", dest="apply_lambda",
                   help="treat --form as a form on B and apply lambda first")

    v = sub.add_parser("resolve", parents=[common], help="birational patch cover of X")
    v.add_argument("--ideal", default="")
    v.add_argument("--dim", type=int)
    v.add_argument("--degree", type=int)
    return ap


def _job_from_args(a) -> JobSpec:
    vars = _vars(a.vars)
    cmd = a.command
    if cmd == "bounds":
        inputs = {k: getattr(a, k) for k in ("p", "m", "n", "D", "d", "dp", "d0", "d1", "s", "l",
                                             "t", "deg_alpha")}
        inputs["Ds"] = _ints(a.Ds)
        return JobSpec("bounds", bounds=inputs)
    if cmd == "certificate":
        return JobSpec("certificate", vars=vars, ideal=_split(a.ideal), generators=_split(a.gens),
                       cap=a.cap, dims=[a.dim] if a.dim is not None else None,
                       degrees=[a.degree] if a.degree is not None else None)
    if cmd == "idempotents":
        return JobSpec("idempotents", vars=vars, components=[_split(c) for c in a.component],
                       method=a.method, degrees=_ints(a.degrees), dims=_ints(a.dims))
    if cmd == "cohomology":
        comps = [_split(c) for c in a.component]
        mode = "cohomology-pipeline" if a.route == "pipeline" else "cohomology-closed"
        if comps and mode == "cohomology-closed":
            raise PreconditionError("--component needs --route pipeline")
        return JobSpec(mode, vars=vars, ideal=_split(a.ideal), components=comps,
                       dims=[a.dim] if a.dim is not None else None, degrees=_ints(a.degrees),
                       truncation={"d": a.window} if a.window is not None else {}, route=a.route)
    if cmd == "hypersurface":
        return JobSpec("hypersurface-cohomology", vars=vars, f=a.f, g=a.g, p_max=a.p_max,
                       truncation={"d": a.window} if a.window is not None else {})
    if cmd == "residue":
        form = None
        if a.form is not None:
            form = _load_json(a.form, "--form")
            if not isinstance(form, dict):
                raise InputError("--form must be a JSON object")
        return JobSpec("residue", vars=vars, f=a.f, g=a.g, form=form, order=a.order,
                       apply_lambda=a.apply_lambda)
    return JobSpec("resolve", vars=vars, ideal=_split(a.ideal),
                   dims=[a.dim] if a.dim is not None else None,
                   degrees=[a.degree] if a.degree is not None else None)


def _load_json(text: str, where: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}: {exc.msg}", exc.lineno, exc.colno) from None


def _fail(code: int, payload: dict) -> int:
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
        if a.job:
            with open(a.job, encoding="utf-8") as fh:
                data = _load_json(fh.read(), a.job)
            job = JobSpec.from_dict(data)
        else:
            job = _job_from_args(a)
        if a.seed is not None:
            job.seed = a.seed
        elif not a.job:
            job.seed = int(os.environ.get("EDRC_SEED", "0"))
        result = run_job(job)
    except InputError as exc:
        return _fail(1, {"error": str(exc), "kind": "parse", "line": exc.line, "column": exc.col})
    except ParseError as exc:
        return _fail(1, {"error": str(exc), "kind": "parse", "line": exc.line, "column": exc.col})
    except OSError as exc:
        return _fail(1, {"error": str(exc), "kind": "input"})
    except (PreconditionError, TypeError) as exc:
        return _fail(2, {"error": str(exc), "kind": "precondition"})
    except StageError as exc:
        return _fail(3, {"error": str(exc.cause), "kind": "computation", "stage": exc.stage})
    if not a.timings:
        result["timings"] = {}
    text = json.dumps(result, sort_keys=True, indent=2) + "\n"
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if a.require_certified and uncertified(result):
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
