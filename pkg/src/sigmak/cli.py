"""Batch command line front end.

Every run prints (or writes to --out) one JSON document

    {"schema": "1", "command": ..., "config": {...}, "seed": ..., "result": ...}

with sorted keys and a trailing newline, so identical inputs give
byte-identical files.  --format csv switches to the command's table
output where one exists.  Exit codes: 0 success/pass, 1 computation failure
or failed audit, 2 usage error.
"""
import argparse
import ast
import csv
import io
import json
import sys

import numpy as np

from . import harness
from .conformal import bubble_exact, bubble_kappa, schouten_eigenvalues
from .curvature import CurvatureSpec, elementary_symmetric, in_gamma_k
from .errors import SigmaKError
from .fields import GeneralizedBubble, field_from_dict
from .radial import (SolverConfig, bubble_for_decay, continuation_solve, default_decay,
                     newton_solve, bubble_on_grid)

SCHEMA = "1"


class UsageError(Exception):
    pass


# -- parameters per command -----------------------------------------------------
# name -> default; a config file may set exactly these keys (plus "seed")

PARAMS = {
    "cone-check": {"lam": None, "k": None, "batch": None, "n": None},
    "eval": {"field": None, "points": None, "k": None},
    "bubble": {"n": 3, "k": 1, "s": 1.0},
    "solve": {"n": 4, "k": 2, "t": 1.0, "perturb": 0.0, "solver": None},
    "continue": {"n": 4, "k": 2, "solver": None},
    "audit-harnack": {"field": None, "n": 3, "k": 1, "s": None, "R": 1.0, "delta": None,
                      "samples": 100_000},
    "verify": {"suite": None},
}


def _parse_vector(text):
    text = text.strip()
    if text in ("e", "E"):
        return None
    try:
        val = ast.literal_eval(text)
    except (ValueError, SyntaxError) as exc:
        raise UsageError("malformed vector %r" % text) from exc
    arr = np.atleast_1d(np.asarray(val, dtype=float))
    if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise UsageError("malformed vector %r" % text)
    return arr


def _read_batch(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    try:
        rows = json.loads(text)
    except json.JSONDecodeError:
        rows = [line.replace(",", " ").split() for line in text.splitlines() if line.strip()]
    try:
        out = [np.asarray(r, dtype=float) for r in rows]
    except (TypeError, ValueError) as exc:
        raise UsageError("malformed batch file") from exc
    if not out or any(r.ndim != 1 or not np.all(np.isfinite(r)) for r in out):
        raise UsageError("malformed batch file")
    return out


def _load_json_arg(text):
    """Inline JSON, or @path / a path to a JSON file."""
    if text is None:
        return None
    if isinstance(text, (dict, list)):
        return text
    path = text[1:] if text.startswith("@") else text
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError:
        pass
    except json.JSONDecodeError as exc:
        raise UsageError("malformed JSON in %s" % path) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError("expected JSON or a JSON file, got %r" % text) from exc


# -- commands ------------------------------------------------------------------------

def cmd_cone_check(cfg, seed):
    vecs = []
    for item in cfg["lam"] or []:
        vecs.append(_parse_vector(item) if isinstance(item, str) else np.asarray(item, float))
    if cfg["batch"]:
        vecs.extend(_read_batch(cfg["batch"]))
    if not vecs:
        raise UsageError("cone-check needs --lam or --batch")
    known = [v for v in vecs if v is not None]
    n = cfg["n"]
    if n is None and known:
        n = len(known[0])
    if n is None and isinstance(cfg["k"], int):
        n = cfg["k"]
    rows = []
    for v in vecs:
        if v is None:
            if n is None:
                raise UsageError("'e' needs --n, an integer k or another vector to fix n")
            v = np.ones(n)
        k = cfg["k"]
        if k in (None, "n"):
            k = len(v)
        try:
            k = int(k)
        except (TypeError, ValueError) as exc:
            raise UsageError("k must be an integer or 'n'") from exc
        if not 1 <= k <= len(v):
            raise UsageError("k=%d out of range for a vector of length %d" % (k, len(v)))
        sig = elementary_symmetric(v)[1:k + 1]
        rows.append({"lambda": v.tolist(), "k": k, "sigma": sig.tolist(),
                     "member": bool(in_gamma_k(v, k))})
    return 0, rows


def _table_cone(rows):
    kmax = max(r["k"] for r in rows)
    header = ["lambda", "k"] + ["sigma_%d" % j for j in range(1, kmax + 1)] + ["member"]
    out = [header]
    for r in rows:
        sig = [repr(x) for x in r["sigma"]] + [""] * (kmax - len(r["sigma"]))
        out.append([" ".join(repr(x) for x in r["lambda"]), r["k"]] + sig + [r["member"]])
    return out


def _field(desc, n=None):
    data = _load_json_arg(desc)
    if not isinstance(data, dict):
        raise UsageError("field descriptor must be a JSON object")
    try:
        u = field_from_dict(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError("unresolvable field descriptor: %s" % exc) from exc
    if n is not None and u.n != n:
        raise UsageError("field has n=%d, expected %d" % (u.n, n))
    return u


def cmd_eval(cfg, seed):
    u = _field(cfg["field"])
    pts = _load_json_arg(cfg["points"]) if cfg["points"] is not None else [[0.0] * u.n]
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] != u.n:
        raise UsageError("points must have %d coordinates" % u.n)
    v, g, _ = u.evaluate(pts, order=1)
    lam = schouten_eigenvalues(u, pts)
    rows = []
    spec = CurvatureSpec.sigma(u.n, int(cfg["k"])) if cfg["k"] is not None else None
    for i, p in enumerate(pts):
        row = {"point": p.tolist(), "u": float(v[i]), "eigenvalues": lam[i].tolist()}
        if spec is not None:
            inside = bool(spec.contains(lam[i]))
            row["in_cone"] = inside
            row["f"] = float(spec.value(lam[i])) if inside else None
        rows.append(row)
    return 0, rows


def cmd_bubble(cfg, seed):
    spec = CurvatureSpec.sigma(int(cfg["n"]), int(cfg["k"]))
    b = bubble_exact(spec, float(cfg["s"]))
    return 0, {"spec": spec.to_dict(), "amplitude": b.amplitude, "scale": b.scale,
               "center": b.center.tolist(), "kappa": bubble_kappa(spec.n, b.scale),
               "f_e": spec.f_e(), "field": GeneralizedBubble(spec.n, b.amplitude, b.scale).to_dict()}


def _solver_config(data):
    try:
        return SolverConfig.from_dict(data or {})
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_solve(cfg, seed):
    base = CurvatureSpec.sigma(int(cfg["n"]), int(cfg["k"]))
    t = float(cfg["t"])
    spec = base if t == 1.0 else base.at(t)
    config = _solver_config(cfg["solver"])
    c = default_decay(spec) if config.far_field_constant is None else config.far_field_constant
    start = bubble_on_grid(spec, c, config)
    start = start * (1.0 + float(cfg["perturb"]))
    sol = newton_solve(spec, start, config)
    b = bubble_for_decay(spec, c)
    result = sol.to_dict()
    result.update({"certified": sol.certified, "bubble": b.to_dict(),
                   "cone_certificate": bool(np.all(sol.cone_certificate))})
    return (0 if sol.certified else 1), result, sol.to_csv()


def cmd_continue(cfg, seed):
    base = CurvatureSpec.sigma(int(cfg["n"]), int(cfg["k"]))
    config = _solver_config(cfg["solver"])
    path = continuation_solve(base, config)
    sol = path.final
    result = path.to_dict()
    result.update({"certified": sol.certified, "steps": len(path.steps)})
    return (0 if sol.certified else 1), result, sol.to_csv()


def cmd_audit(cfg, seed):
    n = int(cfg["n"])
    spec = CurvatureSpec.sigma(n, int(cfg["k"]))
    if cfg["field"] is not None:
        u = _field(cfg["field"])
        spec = CurvatureSpec.sigma(u.n, int(cfg["k"]))
    else:
        s = 1.0 if cfg["s"] is None else float(cfg["s"])
        b = bubble_exact(spec, s)
        u = GeneralizedBubble(n, b.amplitude, b.scale)
    rep = harness.harnack_audit(u, float(cfg["R"]), cfg["delta"], spec=spec,
                                samples=int(cfg["samples"]), seed=seed)
    out = rep.to_dict()
    out["branches"] = harness.harnack_branches(u.n)
    out["field"] = u.to_dict()
    return (0 if rep.passed else 1), out


def cmd_verify(cfg, seed):
    name = cfg["suite"]
    if name not in list(harness.SUITES) + ["all"]:
        raise UsageError("unknown suite %r (choose from %s, all)"
                         % (name, ", ".join(harness.SUITES)))
    res = harness.verify_suite(name, seed)
    return (0 if res["pass"] else 1), res


COMMANDS = {
    "cone-check": cmd_cone_check,
    "eval": cmd_eval,
    "bubble": cmd_bubble,
    "solve": cmd_solve,
    "continue": cmd_continue,
    "audit-harnack": cmd_audit,
    "verify": cmd_verify,
}


# -- plumbing -------------------------------------------------------------------------

def _cone_index(text):
    if text == "n":
        return text
    try:
        return int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("k must be an integer or 'n'") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON run config")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="64-bit seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS)

    p = _Parser(prog="sigmak", parents=[common],
                description="Schouten-operator toolkit: evaluation, radial solves, audits.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    S = argparse.SUPPRESS

    q = sub.add_parser("cone-check", parents=[common], help="Garding cone membership")
    q.add_argument("lam", nargs="*", default=S, help="vectors like '(-1,1,1)' or 'e'")
    q.add_argument("--k", type=_cone_index, default=S, help="cone index (integer or 'n')")
    q.add_argument("--batch", default=S, help="file of vectors (JSON list or one per line)")
    q.add_argument("--n", type=int, default=S, help="dimension for the vector 'e'")

    q = sub.add_parser("eval", parents=[common], help="eigenvalues of A^u at points")
    q.add_argument("--field", default=S, help="field descriptor (JSON or path)")
    q.add_argument("--points", default=S, help="JSON list of points (or path)")
    q.add_argument("--k", type=int, default=S, help="also evaluate sigma_k^(1/k)")

    q = sub.add_parser("bubble", parents=[common], help="exact bubble parameters")
    q.add_argument("--n", type=int, default=S)
    q.add_argument("--k", type=int, default=S)
    q.add_argument("--s", type=float, default=S)

    for name, helptext in (("solve", "radial Newton solve"), ("continue", "continuation in t")):
        q = sub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("--n", type=int, default=S)
        q.add_argument("--k", type=int, default=S)
        if name == "solve":
            q.add_argument("--t", type=float, default=S, help="homotopy parameter")
            q.add_argument("--perturb", type=float, default=S,
                           help="relative amplitude perturbation of the start")
        q.add_argument("--R-max", dest="R_max", type=float, default=S)
        q.add_argument("--M", type=int, default=S)

    q = sub.add_parser("audit-harnack", parents=[common], help="Harnack product audit")
    q.add_argument("--field", default=S, help="field descriptor; default: exact bubble")
    q.add_argument("--n", type=int, default=S)
    q.add_argument("--k", type=int, default=S)
    q.add_argument("--s", type=float, default=S, help="bubble scale")
    q.add_argument("--R", type=float, default=S)
    q.add_argument("--delta", type=float, default=S)
    q.add_argument("--samples", type=int, default=S)

    q = sub.add_parser("verify", parents=[common], help="property suites")
    q.add_argument("suite", help="invariance | lemma2 | touching | duality | all")
    return p


def resolve(args):
    """Merge defaults, config file and flags; unknown config keys are errors."""
    ns = vars(args)
    command = ns.pop("command")
    params = dict(PARAMS[command])
    seed = 0
    fmt = ns.pop("format", "json")
    out = ns.pop("out", None)
    if "config" in ns:
        data = _load_json_arg(ns.pop("config"))
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        data = dict(data)
        data.pop("schema", None)
        if data.pop("command", command) != command:
            raise UsageError("config was written for another command")
        seed = data.pop("seed", seed)
        unknown = set(data) - set(params)
        if unknown:
            raise UsageError("unknown config keys: %s" % sorted(unknown))
        params.update(data)
    if "seed" in ns:
        seed = ns.pop("seed")
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    # grid flags live inside the solver block
    grid = {key: ns.pop(key) for key in ("R_max", "M") if key in ns}
    if grid:
        params["solver"] = {**(params.get("solver") or {}), **grid}
    params.update(ns)
    if "solver" in params:
        params["solver"] = _solver_config(params["solver"]).to_dict()
    return command, params, seed, fmt, out


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=True,
                      default=_plain) + "\n"


def _plain(val):
    if isinstance(val, np.generic):
        return val.item()
    if isinstance(val, np.ndarray):
        return val.tolist()
    raise TypeError("not serializable: %r" % type(val))


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv=None):
    try:
        command, params, seed, fmt, out = resolve(build_parser().parse_args(argv))
    except UsageError as exc:
        sys.stderr.write("sigmak: usage error: %s\n" % exc)
        return 2
    doc = {"schema": SCHEMA, "command": command, "config": params, "seed": seed}
    table = None
    try:
        outcome = COMMANDS[command](params, seed)
        code, result = outcome[0], outcome[1]
        if len(outcome) > 2:
            table = outcome[2]
        elif command == "cone-check":
            table = _csv(_table_cone(result))
        doc["result"] = result
    except UsageError as exc:
        sys.stderr.write("sigmak: usage error: %s\n" % exc)
        return 2
    except SigmaKError as exc:
        code = 1
        doc["error"] = exc.to_dict()
    if fmt == "csv" and "error" not in doc:
        if table is None:
            sys.stderr.write("sigmak: usage error: %s has no CSV output\n" % command)
            return 2
        _emit(table, out)
    else:
        _emit(_dump(doc), out)
    return code


if __name__ == "__main__":
    sys.exit(main())
