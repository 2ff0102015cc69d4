"""Command-line front end. Every command reads JSON (or flags) and prints sorted JSON.

Exit codes: 0 ok, 2 invalid input, 3 inconclusive verdict.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

import numpy as np

from . import dieudonne as dd
from . import dyer_lashof as dl
from . import fmodule as fm
from . import hopf as hp
from . import polar as pl
from . import witt as wt
from .graded import GradedAlgebra, ValidationError, algebra_from_json, check_algebra

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 2, 3


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# I/O helpers


def read_json(path: str) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno} "
                       f"(char {exc.pos}): {exc.msg}") from None


def dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _check_p(args, data: dict, what: str) -> None:
    p = data.get("p") if isinstance(data, dict) else None
    if getattr(args, "p", None) is not None and p is not None and int(p) != args.p:
        raise CLIError(f"--p {args.p} disagrees with p = {p} in {what}")


def load_carrier(args, path: str) -> GradedAlgebra | pl.PolarAlgebra:
    """Algebra JSON (with 'products' or a 'preset') or polar JSON (with 'mu')."""
    data = read_json(path)
    if not isinstance(data, dict):
        raise CLIError(f"{path}: expected a JSON object")
    if "preset" in data and getattr(args, "p", None) is not None and "p" not in data:
        data = dict(data, p=args.p)
    _check_p(args, data, path)
    if getattr(args, "max_degree", None) is not None and "max_degree" not in data:
        data = dict(data, max_degree=args.max_degree)
    if "mu" in data:
        return pl.polar_from_json(data)
    return algebra_from_json(data)


def load_polar(args, path: str) -> pl.PolarAlgebra:
    A = load_carrier(args, path)
    return A if isinstance(A, pl.PolarAlgebra) else pl.polarize(A)


def _vector(args, carrier, path: str, degree: int | None) -> wt.WittVector:
    data = read_json(path)
    if isinstance(data, list):
        entries, deg = data, degree
    elif isinstance(data, dict):
        entries, deg = data.get("entries"), data.get("degree", degree)
    else:
        raise CLIError(f"{path}: expected a Witt vector object")
    if entries is None or deg is None:
        raise CLIError(f"{path}: a Witt vector needs 'entries' and a degree (field or --degree)")
    M = carrier.module
    vec = []
    for e in entries:
        vec.append({M.index(name): int(c) for name, c in e.items()})
    v = wt.WittVector(carrier, int(deg), vec)
    if args.length is not None and v.length != args.length:
        raise CLIError(f"{path}: vector has length {v.length}, expected --length {args.length}")
    return v


def _witt_json(v: wt.WittVector) -> dict:
    return {"degree": v.degree, "length": v.length, "entries": v.to_json()}


def _n(value: str | None) -> int | None:
    if value is None or value in ("inf", "infinity", "oo"):
        return None
    try:
        n = int(value)
    except ValueError:
        raise CLIError(f"--n must be a nonnegative integer or 'inf', got {value!r}") from None
    if n < 0:
        raise CLIError("--n must be nonnegative")
    return n


# ---------------------------------------------------------------------------
# Commands


def cmd_polarize(args) -> dict:
    A = load_carrier(args, args.input)
    if isinstance(A, pl.PolarAlgebra):
        return A.to_json()
    return pl.polarize(A).to_json()


def cmd_split(args) -> dict:
    A = load_polar(args, args.input)
    A0, blocks = pl.p_typical_split(A)
    return {
        "p": A.p,
        "degree_zero": A0.to_json(),
        "blocks": {str(j): B.to_json() for j, B in sorted(blocks.items())},
    }


def cmd_hull(args) -> dict:
    A = load_polar(args, args.input)
    H = pl.hull(A, args.max_degree)
    M = A.module
    return {
        "hull": H.algebra.to_json(),
        "dims": {str(d): n for d, n in H.algebra.module.dims().items()},
        "unit_map": {M.name(i): H.algebra.module.describe(v) for i, v in sorted(H.unit_map.items())},
        "degree_zero_stable": H.degree_zero_stable,
    }


def cmd_check(args) -> dict:
    A = load_carrier(args, args.input)
    if isinstance(A, GradedAlgebra):
        issues = check_algebra(A, limit=args.limit)
        out = {"kind": "algebra", "ok": not issues, "issues": issues}
        if not issues:
            P = pl.polarize(A)
            out["polarization"] = {"assoc_violations": pl.check_assoc(P, limit=args.limit),
                                   **_report(pl.polarity_report(P))}
        return out
    rep = pl.polarity_report(A)
    viol = pl.check_assoc(A, limit=args.limit)
    return {"kind": "polar", "assoc_violations": viol, **_report(rep)}


def _report(rep: dict) -> dict:
    return {k: (v if not isinstance(v, dict) else {str(a): b for a, b in v.items()}) for k, v in rep.items()}


def cmd_witt(args) -> dict:
    A = load_polar(args, args.input) if not args.binary else load_carrier(args, args.input)
    op = args.op
    if op == "random":
        if args.degree is None or args.length is None:
            raise CLIError("witt random needs --degree and --length")
        rng = np.random.default_rng(args.seed)
        return _witt_json(wt.random_witt_vector(A, args.degree, args.length, rng))
    if op == "teichmuller":
        if args.element is None or args.length is None:
            raise CLIError("witt teichmuller needs --element NAME[=COEF] and --length")
        terms = {}
        for part in args.element.split(","):
            name, _, c = part.partition("=")
            terms[A.module.index(name.strip())] = int(c) if c else 1
        return _witt_json(wt.teichmuller(A, terms, args.length, args.degree))
    if args.a is None:
        raise CLIError(f"witt {op} needs -a VECTOR.json")
    u = _vector(args, A, args.a, args.degree)
    if op == "add" or op == "sub":
        if args.b is None:
            raise CLIError(f"witt {op} needs -b VECTOR.json")
        v = _vector(args, A, args.b, args.degree)
        f = wt.witt_add if op == "add" else wt.witt_sub
        return _witt_json(f(u, v, verify=args.verify))
    if op == "frobenius":
        return _witt_json(wt.frobenius(u))
    if op == "verschiebung":
        return _witt_json(wt.verschiebung(u))
    if op == "ghost":
        return {"ghost": [A.module.describe(g) for g in _ghost_components(u)]}
    raise CLIError(f"unknown witt operation {op!r}")


def _ghost_components(u: wt.WittVector):
    # w_m = sum p^i a_i^{p^{m-i}}; over F_p only the i = 0 term survives
    A = u.carrier
    out = []
    x = u.entries[0]
    for m in range(u.length + 1):
        out.append(x)
        x = A.frobenius(x) if isinstance(A, pl.PolarAlgebra) else A.power(x, A.p)
    return out


def cmd_cowitt(args) -> dict:
    A = load_polar(args, args.input)
    C = wt.cowitt_u(A, args.n_max, args.max_degree)
    out = []
    for j in C.degrees():
        s = C.slots[j]
        size = sum(A.module.dim(d) for d in s.entry_degrees(A.p))
        out.append({"degree": j, "base": s.base, "length": s.length,
                    "entry_degrees": s.entry_degrees(A.p), "log_p_order": size})
    return {"p": A.p, "max_degree": C.D, "degrees": out, "skipped_degree_zero": C.skipped_degree_zero}


def _load_fmodule(args, path):
    data = read_json(path)
    _check_p(args, data, path)
    try:
        return fm.fmodule_from_json(data)
    except KeyError as exc:
        raise CLIError(f"{path}: unknown basis element {exc}") from None


def cmd_fmod(args) -> dict:
    if args.op == "random":
        if args.p is None:
            raise CLIError("fmod random needs --p")
        rng = np.random.default_rng(args.seed)
        return fm.random_fmodule(args.p, rng, max_dim=args.max_dim, D=args.max_degree).to_json()
    if args.input is None:
        raise CLIError(f"fmod {args.op} needs -i MODULE.json")
    if args.op == "from-polar":
        return fm.u_f(load_polar(args, args.input)).to_json()
    M = _load_fmodule(args, args.input)
    if args.op == "decompose":
        bc = fm.decompose(M)
        out = bc.to_json()
        if isinstance(M, fm.FModule):
            cb = fm.chain_basis(M)
            out["witness_verified"] = fm.verify_chain_basis(M, cb)
        return out
    if args.op == "dualize":
        return fm.dualize(M).to_json()
    if args.op == "lift":
        if not isinstance(M, fm.FModule):
            raise CLIError("lift needs an F-module (key 'F')")
        import warnings

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            A = fm.lift_to_polar(M)
        return {"polar": A.to_json(), "warnings": [str(w.message) for w in caught]}
    raise CLIError(f"unknown fmod operation {args.op!r}")


def cmd_dieudonne(args) -> dict:
    if args.op == "compute":
        if args.input is None:
            raise CLIError("dieudonne compute needs -i CARRIER.json")
        A = load_carrier(args, args.input)
        M = dd.cowitt_dieudonne(A, args.n_max, args.max_degree)
        return M.to_json()
    if args.op == "check":
        if len(args.files) != 1:
            raise CLIError("dieudonne check needs one module file")
        M = dd.module_from_json(read_json(args.files[0]))
        issues = dd.check_dieudonne(M)
        return {"ok": not issues, "issues": issues}
    if args.op == "compare":
        if len(args.files) != 2:
            raise CLIError("dieudonne compare needs two module files")
        a, b = (read_json(f) for f in args.files)
        if isinstance(a, dict) and isinstance(b, dict) and "p" in a and "p" in b and a["p"] != b["p"]:
            raise CLIError(f"modules have different primes {a['p']} and {b['p']}")
        M, N = dd.module_from_json(a), dd.module_from_json(b)
        res = dd.is_isomorphic(M, N, L=args.words, bound_exp=args.bound_exp)
        out = {"verdict": res.verdict, "reason": res.reason, "differing": res.differing}
        if res.witness is not None:
            out["witness"] = {str(n): [[int(x) for x in row] for row in m] for n, m in sorted(res.witness.items())}
        if res.verdict == "inconclusive":
            raise _Inconclusive(out)
        return out
    raise CLIError(f"unknown dieudonne operation {args.op!r}")


class _Inconclusive(Exception):
    def __init__(self, payload):
        self.payload = payload


def _hopf_source(args) -> hp.HopfAlgebra:
    src = args.source
    if src in (None, "file"):
        if args.input is None:
            raise CLIError("give a source (lambda, counterexample, counterexample-prime) or -i HOPF.json")
        data = read_json(args.input)
        _check_p(args, data, args.input)
        return hp.hopf_from_json(data)
    if args.p is None:
        raise CLIError(f"{src} needs --p")
    if src == "lambda":
        return hp.lambda_p(args.j, args.p, args.n, args.max_degree)
    if src in ("counterexample", "counterexample-prime"):
        H, Hp = hp.counterexample_pair(args.p, args.j, args.max_degree)
        return H if src == "counterexample" else Hp
    raise CLIError(f"unknown Hopf algebra source {src!r}")


def cmd_hopf(args) -> dict:
    op = args.op
    if op == "cofree":
        if args.input is None:
            raise CLIError("hopf cofree needs -i ALGEBRA.json")
        A = load_carrier(args, args.input)
        if not isinstance(A, GradedAlgebra):
            raise CLIError("cof_u of a polar algebra is not built directly; use dieudonne compute")
        H = hp.cof_u(A, args.max_degree)
        return H.to_json()
    if op == "lambda":
        if args.p is None:
            raise CLIError("hopf lambda needs --p")
        return hp.lambda_p(args.j, args.p, args.n, args.max_degree).to_json()
    if op == "counterexample":
        if args.p is None:
            raise CLIError("hopf counterexample needs --p")
        H, Hp = hp.counterexample_pair(args.p, args.j, args.max_degree)
        return {
            "H": H.to_json(),
            "H_prime": Hp.to_json(),
            "primitives_of_duals": {
                "H": {str(d): n for d, n in hp.primitives(hp.dual(H)).dims().items()},
                "H_prime": {str(d): n for d, n in hp.primitives(hp.dual(Hp)).dims().items()},
            },
        }
    H = _hopf_source(args)
    if op == "primitives":
        P = hp.primitives(H)
        return {"p": H.p, "max_degree": H.max_degree,
                "basis": [{"name": n, "degree": d} for n, d in P.basis],
                "dims": {str(d): n for d, n in P.dims().items()}}
    if op == "verify-cofree":
        rep = hp.verify_cofree(H, args.max_degree if args.source in (None, "file") else None)
        out = rep.to_json()
        for key in ("dims", "primitive_dims", "sym_dims"):
            out[key] = {str(d): n for d, n in out[key].items()}
        return out
    if op == "check":
        issues = hp.check_hopf(H, limit=args.limit)
        return {"ok": not issues, "issues": issues}
    raise CLIError(f"unknown hopf operation {op!r}")


def cmd_dl(args) -> dict:
    if args.p is None:
        raise CLIError("dl needs --p")
    n = _n(args.n)
    if args.op == "rewrite":
        if args.word is None:
            raise CLIError("dl rewrite needs a word such as \"bQ^3 Q^1\"")
        m = dl.DLMonomial(dl.parse_word(args.word), args.gen, args.gen_degree)
        e = dl.expression(args.p, {m: 1}, n)
        out = dl.adem_rewrite(e, strategy=args.strategy, signs=args.signs)
        if args.unstable:
            out = dl.apply_instability(out)
        res = out.to_json()
        res["input"] = {"word": m.text(), **dl.dl_degree(m, args.p, n)}
        res["text"] = out.text()
        return res
    if args.op == "basis":
        words, series = dl.admissible_basis(args.q, n, args.p, args.max_degree)
        return {"p": args.p, "q": args.q, "n": "inf" if n is None else n, "max_degree": args.max_degree,
                "words": [w.text() for w in words], "poincare": {str(d): c for d, c in series.items()}}
    raise CLIError(f"unknown dl operation {args.op!r}")


# ---------------------------------------------------------------------------
# Parser


def _positive_prime(text: str) -> int:
    from .linalg import is_prime

    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not is_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not prime")
    return p


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_positive_prime)
    common.add_argument("--max-degree", type=_nonneg)
    common.add_argument("--length", type=_nonneg)
    common.add_argument("--n-max", type=_nonneg)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-i", "--input")
    common.add_argument("-o", "--output")
    common.add_argument("--limit", type=int, default=20)

    parser = argparse.ArgumentParser(prog="polarlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_ in [("polarize", cmd_polarize, "polarization of an algebra"),
                            ("split", cmd_split, "p-typical splitting"),
                            ("hull", cmd_hull, "enveloping algebra of a polar algebra"),
                            ("check", cmd_check, "axiom checks"),
                            ("cowitt", cmd_cowitt, "shape of the co-Witt groups")]:
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)

    w = sub.add_parser("witt", parents=[common], help="Witt vector arithmetic")
    w.add_argument("op", choices=["add", "sub", "frobenius", "verschiebung", "teichmuller", "ghost", "random"])
    w.add_argument("-a")
    w.add_argument("-b")
    w.add_argument("--degree", type=_nonneg)
    w.add_argument("--element")
    w.add_argument("--binary", action="store_true", help="use the algebra's own product, not its polarization")
    w.add_argument("--verify", action="store_true")
    w.set_defaults(func=cmd_witt)

    f = sub.add_parser("fmod", parents=[common], help="F-modules")
    f.add_argument("op", choices=["decompose", "lift", "dualize", "from-polar", "random"])
    f.add_argument("--max-dim", type=_nonneg, default=20)
    f.set_defaults(func=cmd_fmod)

    d = sub.add_parser("dieudonne", parents=[common], help="Dieudonne modules")
    d.add_argument("op", choices=["compute", "compare", "check"])
    d.add_argument("files", nargs="*")
    d.add_argument("--words", type=_nonneg, default=3)
    d.add_argument("--bound-exp", type=_nonneg, default=24)
    d.set_defaults(func=cmd_dieudonne)

    h = sub.add_parser("hopf", parents=[common], help="Hopf algebras")
    h.add_argument("op", choices=["cofree", "primitives", "verify-cofree", "lambda", "counterexample", "check"])
    h.add_argument("source", nargs="?", choices=["lambda", "counterexample", "counterexample-prime", "file"])
    h.add_argument("--j", type=int, default=2)
    h.add_argument("--n", type=_nonneg)
    h.set_defaults(func=cmd_hopf)

    q = sub.add_parser("dl", parents=[common], help="Dyer-Lashof words (p odd)")
    q.add_argument("op", choices=["rewrite", "basis"])
    q.add_argument("word", nargs="?")
    q.add_argument("--n", default=None, help="loop parameter (integer or 'inf')")
    q.add_argument("--gen", default="x")
    q.add_argument("--gen-degree", type=int, default=2)
    q.add_argument("--q", type=int, default=2)
    q.add_argument("--strategy", choices=["leftmost", "rightmost"], default="leftmost")
    q.add_argument("--signs", choices=["clm", "none"], default="clm")
    q.add_argument("--unstable", action="store_true", help="also apply instability")
    q.set_defaults(func=cmd_dl)
    return parser


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.command == "dl" and args.op == "basis" and args.max_degree is None:
        args.max_degree = 40
    code = EXIT_OK
    try:
        result = args.func(args)
    except _Inconclusive as inc:
        result, code = inc.payload, EXIT_INCONCLUSIVE
    except CLIError as exc:
        print(f"polarlab: {exc}", file=stderr)
        return exc.code
    except (ValidationError, KeyError, ValueError, wt.WittResourceError, wt.NotPolarError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"polarlab: {type(exc).__name__}: {msg}", file=stderr)
        return EXIT_INVALID
    text = dump(result)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
