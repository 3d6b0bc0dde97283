"""``agt`` command line front end.

Structured output is JSON with a top-level ``"schema": "agt/1"`` key, written
with sorted keys so that repeated runs are byte-identical.  CSV is used for
family sweeps and DOT for graphs.

Exit codes: 0 success, 1 certificate or verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import (
    AGTError,
    CertificateError,
    ConvergenceFailure,
    PrecisionExhausted,
    SearchExhausted,
)

SCHEMA = "agt/1"
FAILURE_ERRORS = (CertificateError, SearchExhausted, ConvergenceFailure, PrecisionExhausted)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    action: str | None
    params: dict = field(default_factory=dict)
    json_path: str | None = None
    csv_path: str | None = None
    dot_path: str | None = None
    seed: int | None = None
    out: object = field(default=None, repr=False)  # stream for "-" targets


def _default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if hasattr(o, "to_dict"):
        return o.to_dict()
    return str(o)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_default, allow_nan=True) + "\n"


def _write(path: str | None, text: str, stdout):
    if path in (None, "-"):
        stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _load_json(path: str, allowed: set | None = None):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from e
    if allowed is not None:
        if not isinstance(data, dict):
            raise UsageError(f"{path} must hold a JSON object")
        unknown = set(data) - allowed
        if unknown:
            raise UsageError(f"unknown keys in {path}: {sorted(unknown)}; allowed: {sorted(allowed)}")
    return data


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"expected a comma separated list of integers, got {text!r}") from e


def _threads() -> int | None:
    v = os.environ.get("AGT_THREADS")
    if v is None or v == "":
        return None
    try:
        n = int(v)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"AGT_THREADS must be a positive integer, got {v!r}")
    return n


# -- subcommands ------------------------------------------------------------

def cmd_words(cfg: RunConfig):
    from .words import verify_paradox

    depth = cfg.params["depth"]
    if depth < 0:
        raise UsageError("--depth must be >= 0")
    rep = verify_paradox(depth)
    return rep.to_dict(), rep.passed


PING_KEYS = {"form", "a", "b", "sets", "G", "H", "maxlen"}


def cmd_pingpong(cfg: RunConfig):
    from . import pingpong as pp

    conf = _load_json(cfg.params["config"], PING_KEYS)
    form = conf.get("form", "first")
    sets = conf.get("sets")
    if not isinstance(sets, dict):
        raise UsageError('config needs "sets": {name: [[lo, hi], ...]}')
    try:
        S = {k: pp.parse_set(v) for k, v in sets.items()}
    except (ValueError, TypeError) as e:
        # a set that overlaps itself cannot be a ping-pong table
        from .errors import DisjointnessViolation

        raise DisjointnessViolation(f"invalid slope set: {e}") from e

    def need(*names):
        missing = [n for n in names if n not in S]
        if missing:
            raise UsageError(f"form {form!r} needs sets {list(names)}; missing {missing}")
        return [S[n] for n in names]

    def mat(key):
        if key not in conf:
            raise UsageError(f'form {form!r} needs matrix "{key}"')
        return pp.as_matrix([[str(x) for x in row] for row in conf[key]])

    out: dict = {"form": form}
    if form == "first":
        cert = pp.certify_first_form(mat("a"), mat("b"), *need("A+", "A-", "B+", "B-"))
    elif form == "ping":
        cert = pp.certify_ping(mat("a"), mat("b"), *need("A", "B"))
    elif form == "second":
        def factor(items):
            fs = []
            for it in items:
                m = pp.as_matrix([[str(x) for x in row] for row in it["matrix"]])
                fs.append(pp.CyclicFactor(m, it.get("order")))
            return fs

        cert = pp.certify_second_form(factor(conf.get("G", [])), factor(conf.get("H", [])), *need("A", "B"))
    else:
        raise UsageError(f"unknown form {form!r}; choose first, second or ping")
    out["certificate"] = cert.to_dict()
    ok = cert.valid
    maxlen = conf.get("maxlen")
    if maxlen and form in ("first", "ping"):
        res = pp.exhaustive_nontriviality(mat("a"), mat("b"), int(maxlen))
        out["nontriviality"] = res.to_dict()
        ok = ok and res.passed
    return out, ok


def _decoder(oracle):
    from .words import Word

    name = oracle.name
    if name == "z":
        return int
    if name == "z2":
        return lambda v: (int(v[0]), int(v[1]))
    if name == "free2":
        return lambda v: Word.parse(str(v))
    if name == "trivial":
        return lambda v: 0
    if name.startswith("sl2z"):
        n = int(name.split(":")[1]) if ":" in name else None
        return lambda v: tuple(tuple(int(x) % n if n else int(x) for x in row) for row in v)
    raise UsageError(f"no generator decoder for {name}")  # pragma: no cover


def _encode(x):
    if isinstance(x, tuple) and not hasattr(x, "runs"):
        return [_encode(y) for y in x]
    if hasattr(x, "runs"):
        return str(x)
    return x


def cmd_cayley(cfg: RunConfig):
    from . import cayley as cy

    try:
        oracle = cy.make_oracle(cfg.params["group"])
    except ValueError as e:
        raise UsageError(str(e)) from e
    gens = cfg.params["gens"]
    if gens == "default":
        S = list(oracle.default_gens)
    else:
        dec = _decoder(oracle)
        raw = _load_json(gens)
        raw = raw.get("gens") if isinstance(raw, dict) else raw
        if not isinstance(raw, list) or not raw:
            raise UsageError("generator file must hold a nonempty list (or {\"gens\": [...]})")
        S = [dec(v) for v in raw]
    n = cfg.params["max_n"]
    if n < 0:
        raise UsageError("--max-n must be >= 0")
    out: dict = {"group": oracle.name, "generators": [_encode(s) for s in S], "max_n": n}
    ok = True
    action = cfg.action
    if action == "growth":
        B = cy.ball(oracle, S, n)
        out["counts"] = B.counts
        out["estimate"] = cy.growth_rate_estimate(B.counts).to_dict()
    elif action == "cheeger":
        B = cy.ball(oracle, S, n)
        rows = []
        for r in range(n + 1):
            q = cy.cheeger_quotient(oracle, B.elements(r), S)
            rows.append({"radius": r, "size": B.counts[r], "quotient": str(q), "float": float(q)})
        out["balls"] = rows
    elif action == "folner":
        eps = Fraction(cfg.params["eps"])
        res = cy.folner_ball_search(oracle, S, eps, n)
        out["eps"] = str(eps)
        out["search"] = res.to_dict()
        ok = res.found
    if cfg.dot_path:
        g = cy.ball_graph(oracle, S, min(n, cfg.params.get("dot_radius") or n))
        _write(cfg.dot_path, g.to_dot(), cfg.out)
    return out, ok


EXPANDER_COLUMNS = ["family", "parameter", "|V|", "degree", "lambda2", "gap", "expansion_exact_or_NA"]


def cmd_expander(cfg: RunConfig):
    from . import expander as ex
    from .graph import cycle_graph

    family, k = cfg.params["family"], cfg.params["k"]
    moduli = _int_list(cfg.params["moduli"])
    if not moduli:
        raise UsageError("--moduli is empty")
    rows = []
    for n in moduli:
        if family == "cycle":
            if n < 3:
                raise UsageError("cycle lengths must be >= 3")
            g, param = cycle_graph(n), f"m={n}"
        else:
            if n < 2:
                raise UsageError("moduli must be >= 2")
            g, param = ex.build_sl_cayley(k, n), f"k={k},n={n}"
        rep = ex.spectral_gap(g)
        expansion = "NA"
        if g.n <= 24:
            expansion = str(ex.edge_expansion_exact(g).value)
        rows.append({
            "family": family,
            "parameter": param,
            "|V|": g.n,
            "degree": rep.degree,
            "lambda2": rep.lambda2,
            "gap": rep.gap,
            "expansion_exact_or_NA": expansion,
            "normalized_gap": rep.normalized_gap,
        })
    if cfg.csv_path is not None:
        buf = io.StringIO()
        w = csv.DictWriter(buf, EXPANDER_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "lambda2": repr(r["lambda2"]), "gap": repr(r["gap"])})
        _write(cfg.csv_path, buf.getvalue(), cfg.out)
    return {"rows": rows}, True


_BINOPS = {ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Div: "div"}


def padic_eval(expr: str, p: int, prec: int):
    """Evaluate +, -, *, /, unary minus, integer powers and rational literals."""
    from . import padic as pa

    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as e:
        raise UsageError(f"cannot parse expression {expr!r}") from e

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return pa.from_rational(Fraction(str(node.value)), p, prec)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return pa.neg(v) if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            x, y = ev(node.left), ev(node.right)
            op = _BINOPS[type(node.op)]
            if op == "div":
                return pa.mul(x, pa.inv(y))
            return getattr(pa, op)(x, y)
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                raise UsageError("exponents must be integer literals")
            base, e = ev(node.left), node.right.value
            if e < 0:
                base, e = pa.inv(base), -e
            out = pa.from_rational(1, p, prec)
            for _ in range(e):
                out = pa.mul(out, base)
            return out
        raise UsageError(f"unsupported syntax in expression: {ast.dump(node)[:60]}")

    return ev(tree)


def cmd_padic(cfg: RunConfig):
    from . import padic as pa

    p, prec = cfg.params["p"], cfg.params["prec"]
    if prec < 1:
        raise UsageError("--prec must be >= 1")
    pa._check_prime(p)
    x = padic_eval(cfg.params["expr"], p, prec)
    out = {"expr": cfg.params["expr"], "value": x.to_dict(), "text": str(x)}
    if not x.is_zero:
        out["digits_lsf"] = x.digits()
    return out, True


def cmd_tree(cfg: RunConfig):
    from . import btree as bt

    p, R = cfg.params["p"], cfg.params["radius"]
    if R < 0:
        raise UsageError("--radius must be >= 0")
    ball = bt.build_ball(bt.base_class(p), R)
    rep = bt.verify_tree(ball)
    if cfg.dot_path:
        _write(cfg.dot_path, ball.to_dot(), cfg.out)
    return {"p": p, "radius": R, "report": rep.to_dict()}, rep.passed


def cmd_tits(cfg: RunConfig):
    from .projdyn.tits import PipelineParams, construct_free_pair

    raw = _load_json(cfg.params["gens"])
    if isinstance(raw, dict):
        extra = set(raw) - {"gens"}
        if extra:
            raise UsageError(f"unknown keys in {cfg.params['gens']}: {sorted(extra)}")
        raw = raw.get("gens")
    try:
        gens = [np.array(g, dtype=float) for g in raw]
    except (TypeError, ValueError) as e:
        raise UsageError("generator file must hold a list of square matrices") from e
    d = cfg.params["dim"]
    if not gens or any(g.shape != (d, d) for g in gens):
        raise UsageError(f"every generator must be a {d}x{d} matrix")
    params = PipelineParams(exact_check_len=cfg.params["exact_len"] or None)
    if cfg.seed is not None:
        params.seed = cfg.seed
    cert = construct_free_pair(gens, params)
    return {"certificate": cert.to_dict()}, cert.valid


def cmd_ergodic(cfg: RunConfig):
    from . import ergodic as er

    try:
        rot = er.parse_alpha(cfg.params["alpha"])
        f = er.TrigPoly.parse(cfg.params["freqs"])
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(str(e)) from e
    ns = _int_list(cfg.params["ns"])
    if not ns or min(ns) < 1:
        raise UsageError("--ns needs positive integers")
    rows = er.convergence_table(f, rot.alpha, ns)
    if cfg.csv_path is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "distance", "envelope", "closed_form_1"])
        for r in rows:
            w.writerow([r.n, repr(r.distance), repr(r.envelope), repr(r.closed_form_1)])
        _write(cfg.csv_path, buf.getvalue(), cfg.out)
    return {
        "alpha": str(rot.alpha),
        "alpha_float": float(rot.alpha),
        "irrational_stand_in": rot.irrational,
        "f": f.to_dict(),
        "rows": [r.to_dict() for r in rows],
    }, True


COMMANDS = {
    "words": cmd_words,
    "pingpong": cmd_pingpong,
    "cayley": cmd_cayley,
    "expander": cmd_expander,
    "padic": cmd_padic,
    "tree": cmd_tree,
    "tits": cmd_tits,
    "ergodic": cmd_ergodic,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="agt", description="Exact and numerical checks for geometric group theory.")
    ap.add_argument("--version", action="version", version=f"agt {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def outputs(p, csv_=False, dot=False):
        p.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH",
                       help="write the JSON report to PATH (default: stdout)")
        if csv_:
            p.add_argument("--csv", nargs="?", const="-", default=None, metavar="PATH")
        if dot:
            p.add_argument("--dot", default=None, metavar="PATH")
        p.add_argument("--seed", type=int, default=None)

    w = sub.add_parser("words", help="free group words")
    w.add_argument("action", choices=["paradox"])
    w.add_argument("--depth", type=int, default=8)
    outputs(w)

    pp = sub.add_parser("pingpong", help="exact ping-pong certificates")
    pp.add_argument("action", choices=["certify"])
    pp.add_argument("--config", required=True)
    outputs(pp)

    c = sub.add_parser("cayley", help="balls, growth, Cheeger quotients, Folner sets")
    c.add_argument("action", choices=["growth", "cheeger", "folner"])
    c.add_argument("--group", required=True, help="z, z2, free2, sl2z, sl2z-mod:N or trivial")
    c.add_argument("--gens", default="default", help="'default' or a JSON file of generators")
    c.add_argument("--max-n", dest="max_n", type=int, default=5)
    c.add_argument("--eps", default="1/10", help="Folner threshold (folner only)")
    c.add_argument("--dot-radius", dest="dot_radius", type=int, default=None)
    outputs(c, dot=True)

    e = sub.add_parser("expander", help="spectral gaps of graph families")
    e.add_argument("--family", choices=["cycle", "slk"], required=True)
    e.add_argument("--k", type=int, choices=[2, 3], default=2)
    e.add_argument("--moduli", required=True, help="comma separated moduli (cycle lengths for cycle)")
    outputs(e, csv_=True)

    pa = sub.add_parser("padic", help="p-adic arithmetic")
    pa.add_argument("action", choices=["eval"])
    pa.add_argument("--p", type=int, required=True)
    pa.add_argument("--expr", required=True)
    pa.add_argument("--prec", type=int, default=20)
    outputs(pa)

    t = sub.add_parser("tree", help="balls in the Bruhat-Tits tree")
    t.add_argument("--p", type=int, required=True)
    t.add_argument("--radius", type=int, default=2)
    outputs(t, dot=True)

    ti = sub.add_parser("tits", help="ping-pong players in SL_d(R)")
    ti.add_argument("action", choices=["construct"])
    ti.add_argument("--gens", required=True, help="JSON list of d x d matrices")
    ti.add_argument("--dim", type=int, required=True)
    ti.add_argument("--exact-len", dest="exact_len", type=int, default=10,
                    help="word length of the exact cross-check for integral inputs (0 disables)")
    outputs(ti)

    er = sub.add_parser("ergodic", help="ergodic averages of circle rotations")
    er.add_argument("--alpha", required=True, help="sqrt2, sqrtN, golden, p/q or a decimal")
    er.add_argument("--freqs", required=True, help="freq:coeff list, e.g. 1:1,3:0.5")
    er.add_argument("--ns", default="10,100,1000")
    outputs(er, csv_=True)
    return ap


def _config(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "action", "json", "csv", "dot", "seed")}
    return RunConfig(ns.command, getattr(ns, "action", None), params,
                     getattr(ns, "json", None), getattr(ns, "csv", None),
                     getattr(ns, "dot", None), getattr(ns, "seed", None))


def _envelope(cfg: RunConfig | None, status: str, body: dict) -> dict:
    out = {"schema": SCHEMA, "status": status}
    if cfg is not None:
        out["command"] = cfg.command
        if cfg.action:
            out["action"] = cfg.action
    out.update(body)
    return out


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    cfg = None
    try:
        _threads()
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("a subcommand is required")
        cfg = _config(ns)
        cfg.out = stdout
        body, ok = COMMANDS[cfg.command](cfg)
        doc = _envelope(cfg, "pass" if ok else "fail", body)
        code = 0 if ok else 1
    except UsageError as e:
        stderr.write(f"agt: usage error: {e}\n\n")
        stderr.write(parser.format_help())
        return 2
    except FAILURE_ERRORS as e:
        err = {"type": type(e).__name__, "message": str(e)}
        cert = getattr(e, "certificate", None)
        if cert is not None:
            err["certificate"] = cert.to_dict() if hasattr(cert, "to_dict") else cert
        if getattr(e, "witness", None) is not None:
            err["witness"] = e.witness
        if getattr(e, "diagnostics", None):
            err["diagnostics"] = e.diagnostics
        if getattr(e, "stage", None) is not None:
            err["stage"] = e.stage
        doc = _envelope(cfg, "fail", {"error": err})
        code = 1
    except (AGTError, ValueError) as e:
        stderr.write(f"agt: {type(e).__name__}: {e}\n")
        return 2
    text = dumps(doc)
    # tabular or graph output may already occupy stdout
    if cfg is not None and cfg.json_path not in (None, "-"):
        _write(cfg.json_path, text, stdout)
    elif cfg is None or not ((cfg.csv_path in ("-",)) or (cfg.dot_path == "-")) or cfg.json_path == "-":
        stdout.write(text)
    return code


def main_exit():  # pragma: no cover - console script entry
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
