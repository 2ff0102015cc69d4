"""Finite-type graded modules and graded-commutative algebras over F_p.

Elements are sparse vectors: dicts from basis index to a nonzero residue.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .linalg import check_prime

Vec = dict[int, int]


class ValidationError(ValueError):
    """Malformed or inconsistent input data."""


def vadd(x: Mapping[int, int], y: Mapping[int, int], p: int, scale: int = 1) -> Vec:
    out = dict(x)
    for k, c in y.items():
        v = (out.get(k, 0) + scale * c) % p
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return out


def vscale(x: Mapping[int, int], c: int, p: int) -> Vec:
    c %= p
    if not c:
        return {}
    return {k: (v * c) % p for k, v in x.items() if (v * c) % p}


def vclean(x: Mapping[int, int], p: int) -> Vec:
    return {k: v % p for k, v in x.items() if v % p}


@dataclass(frozen=True)
class GradedModule:
    p: int
    max_degree: int
    basis: tuple[tuple[str, int], ...]

    def __post_init__(self):
        check_prime(self.p)
        object.__setattr__(self, "basis", tuple((str(n), int(d)) for n, d in self.basis))
        names = [n for n, _ in self.basis]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ValidationError(f"duplicate basis names: {dup}")
        for n, d in self.basis:
            if d < 0:
                raise ValidationError(f"basis element {n!r} has negative degree {d}")
            if d > self.max_degree:
                raise ValidationError(f"basis element {n!r} of degree {d} exceeds max_degree {self.max_degree}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    def __len__(self):
        return len(self.basis)

    def name(self, i: int) -> str:
        return self.basis[i][0]

    def degree(self, i: int) -> int:
        return self.basis[i][1]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValidationError(f"unknown basis element {name!r}") from None

    def in_degree(self, d: int) -> list[int]:
        return [i for i, (_, deg) in enumerate(self.basis) if deg == d]

    def degrees(self) -> list[int]:
        return sorted({d for _, d in self.basis})

    def dims(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for _, d in self.basis:
            out[d] = out.get(d, 0) + 1
        return dict(sorted(out.items()))

    def dim(self, d: int) -> int:
        return sum(1 for _, deg in self.basis if deg == d)

    def element(self, terms: Mapping[str, int]) -> Vec:
        return vclean({self.index(n): c for n, c in terms.items()}, self.p)

    def describe(self, x: Mapping[int, int]) -> list[dict]:
        return [{"coef": c, "basis": self.name(i)} for i, c in sorted(x.items())]


def shift(M: GradedModule, i: int) -> GradedModule:
    """M(i)_n = M_{p^i n} for i >= 0; M(-1)_n = M_{n/p} when p | n, else 0."""
    p = M.p
    if i < -1:
        raise ValueError("shift supports i >= 0 or i = -1")
    if i == -1:
        return GradedModule(p, M.max_degree * p, tuple((n, d * p) for n, d in M.basis))
    q = p**i
    return GradedModule(p, M.max_degree // q, tuple((n, d // q) for n, d in M.basis if d % q == 0))


@dataclass
class GradedAlgebra:
    """Graded-commutative algebra by structure constants, truncated above max_degree."""

    module: GradedModule
    unit: str
    products: dict[tuple[int, int], Vec] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if self.module.degree(self.module.index(self.unit)) != 0:
            raise ValidationError("the unit must have degree 0")
        u = self.unit_index
        for i in range(len(self.module)):
            self.products.setdefault((u, i), {i: 1})
            self.products.setdefault((i, u), {i: 1})
        self.products = {k: vclean(v, self.p) for k, v in self.products.items()}
        self.products = {k: v for k, v in self.products.items() if v}
        M = self.module
        for (i, j), v in self.products.items():
            d = M.degree(i) + M.degree(j)
            for k in v:
                if M.degree(k) != d:
                    raise ValidationError(
                        f"{M.name(i)}*{M.name(j)} has a component {M.name(k)!r} outside degree {d}")

    @property
    def p(self) -> int:
        return self.module.p

    @property
    def max_degree(self) -> int:
        return self.module.max_degree

    @property
    def unit_index(self) -> int:
        return self.module.index(self.unit)

    def __len__(self):
        return len(self.module)

    def degree(self, i: int) -> int:
        return self.module.degree(i)

    def mul_basis(self, i: int, j: int) -> Vec:
        return self.products.get((i, j), {})

    def mul(self, x: Mapping[int, int], y: Mapping[int, int]) -> Vec:
        p = self.p
        out: Vec = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, c in self.products.get((i, j), {}).items():
                    v = (out.get(k, 0) + a * b * c) % p
                    if v:
                        out[k] = v
                    else:
                        out.pop(k, None)
        return out

    def one(self) -> Vec:
        return {self.unit_index: 1}

    def prod(self, xs: Iterable[Mapping[int, int]]) -> Vec:
        out = self.one()
        for x in xs:
            out = self.mul(out, x)
            if not out:
                break
        return out

    def power(self, x: Mapping[int, int], n: int) -> Vec:
        out = self.one()
        base = dict(x)
        while n:
            if n & 1:
                out = self.mul(out, base)
            n >>= 1
            if n:
                base = self.mul(base, base)
        return out

    def to_json(self) -> dict:
        prods = []
        u = self.unit_index
        for (i, j), v in sorted(self.products.items()):
            if u in (i, j):
                continue
            prods.append({"left": self.module.name(i), "right": self.module.name(j),
                          "value": self.module.describe(v)})
        return {
            "p": self.p,
            "max_degree": self.max_degree,
            "basis": [{"name": n, "degree": d} for n, d in self.module.basis],
            "unit": self.unit,
            "products": prods,
        }


def algebra_from_table(p: int, D: int, basis: Sequence[tuple[str, int]], unit: str,
                       table: Mapping[tuple[str, str], Mapping[str, int]], label: str = "") -> GradedAlgebra:
    M = GradedModule(p, D, tuple(basis))
    prods = {}
    for (a, b), val in table.items():
        prods[(M.index(a), M.index(b))] = M.element(val)
    return GradedAlgebra(M, unit, prods, label)


def algebra_from_json(data: Mapping[str, Any]) -> GradedAlgebra:
    if "preset" in data:
        params = {k: v for k, v in data.items() if k != "preset"}
        return make_preset(data["preset"], **params)
    try:
        p = int(data["p"])
        D = int(data["max_degree"])
        basis = [(b["name"], int(b["degree"])) for b in data["basis"]]
        unit = data["unit"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"algebra JSON missing field: {exc}") from None
    M = GradedModule(p, D, tuple(basis))
    prods: dict[tuple[int, int], Vec] = {}
    for entry in data.get("products", []):
        key = (M.index(entry["left"]), M.index(entry["right"]))
        val = {}
        for t in entry.get("value", []):
            k = M.index(t["basis"])
            val[k] = val.get(k, 0) + int(t["coef"])
        prods[key] = vadd(prods.get(key, {}), val, p)
    return GradedAlgebra(M, unit, prods, data.get("label", ""))


# ---------------------------------------------------------------------------
# Algebra axioms


def check_algebra(A: GradedAlgebra, limit: int | None = None) -> list[dict]:
    """All violations of the truncated graded-commutative algebra axioms."""
    p, D = A.p, A.max_degree
    M = A.module
    n = len(M)
    report: list[dict] = []

    def note(kind, *idx, **extra):
        report.append({"kind": kind, "elements": [M.name(i) for i in idx], **extra})
        return limit is not None and len(report) >= limit

    u = A.unit_index
    for (i, j), v in A.products.items():
        target = M.degree(i) + M.degree(j)
        bad = [k for k in v if M.degree(k) != target]
        if bad:
            if note("degree", i, j, detail=f"product has components outside degree {target}"):
                return report
    for i in range(n):
        if A.mul_basis(u, i) != {i: 1} or A.mul_basis(i, u) != {i: 1}:
            if note("unit", i):
                return report
    for i in range(n):
        for j in range(i, n):
            di, dj = M.degree(i), M.degree(j)
            sign = -1 if (di * dj) % 2 else 1
            lhs = A.mul_basis(i, j)
            rhs = vscale(A.mul_basis(j, i), sign, p)
            if lhs != rhs:
                if note("commutativity", i, j):
                    return report
    by_deg = {d: M.in_degree(d) for d in M.degrees()}
    for i in range(n):
        for j in range(n):
            ij = A.mul_basis(i, j)
            dij = M.degree(i) + M.degree(j)
            if dij > D:
                continue
            for d3, ks in by_deg.items():
                if dij + d3 > D:
                    continue
                for k in ks:
                    left = A.mul(ij, {k: 1})
                    right = A.mul({i: 1}, A.mul_basis(j, k))
                    if left != right:
                        if note("associativity", i, j, k):
                            return report
    return report


# ---------------------------------------------------------------------------
# Monomial algebras and presets


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    height: int | None = None  # x^height = 0; None means only the degree truncation applies


def _parse_generators(gens, p: int, exterior: bool = False) -> list[Generator]:
    out = []
    for g in gens:
        if isinstance(g, Generator):
            gen = g
        elif isinstance(g, Mapping):
            gen = Generator(str(g["name"]), int(g["degree"]), g.get("height"))
        else:
            name, deg, *rest = g
            gen = Generator(str(name), int(deg), rest[0] if rest else None)
        if exterior:
            gen = Generator(gen.name, gen.degree, 2)
        if gen.degree < 0:
            raise ValidationError(f"generator {gen.name!r} has negative degree")
        if gen.height is not None and int(gen.height) < 1:
            raise ValidationError(f"generator {gen.name!r} needs height >= 1")
        if gen.degree == 0 and gen.height is None:
            raise ValidationError(
                f"degree-0 generator {gen.name!r} must be nilpotent (give a height) so degree 0 stays finite")
        if p > 2 and gen.degree % 2 == 1 and (gen.height is None or gen.height > 2):
            raise ValidationError(
                f"odd generator {gen.name!r} squares to zero for p > 2; use height 2 or the exterior preset")
        out.append(gen)
    names = [g.name for g in out]
    if len(set(names)) != len(names):
        raise ValidationError("duplicate generator names")
    return out


def monomial_name(gens: Sequence[Generator], exps: Sequence[int]) -> str:
    parts = [g.name if e == 1 else f"{g.name}^{e}" for g, e in zip(gens, exps) if e]
    return "*".join(parts) if parts else "1"


def _koszul_sign(gens: Sequence[Generator], e: Sequence[int], f: Sequence[int]) -> int:
    # moving the odd letters of f leftwards past the later odd letters of e
    s = 0
    for k, g in enumerate(gens):
        if g.degree % 2 and f[k]:
            for i in range(k + 1, len(gens)):
                if gens[i].degree % 2:
                    s += e[i] * f[k]
    return -1 if s % 2 else 1


def monomial_algebra(p: int, D: int, gens: Sequence[Generator],
                     relations: Sequence[Sequence[int]] = (), label: str = "") -> GradedAlgebra:
    """k[gens] / (x^height, relation monomials), truncated above degree D."""
    n = len(gens)
    rels = [tuple(r) for r in relations]

    def allowed(e):
        if sum(a * g.degree for a, g in zip(e, gens)) > D:
            return False
        for a, g in zip(e, gens):
            if g.height is not None and a >= g.height:
                return False
        return not any(all(a >= b for a, b in zip(e, r)) for r in rels)

    monos: list[tuple[int, ...]] = []

    def rec(k, e, deg):
        if k == n:
            if allowed(e):
                monos.append(tuple(e))
            return
        g = gens[k]
        a = 0
        while True:
            if g.height is not None and a >= g.height:
                break
            if deg + a * g.degree > D:
                break
            rec(k + 1, e + [a], deg + a * g.degree)
            a += 1
            if g.degree == 0 and g.height is None:
                break

    rec(0, [], 0)

    def mdeg(e):
        return sum(a * g.degree for a, g in zip(e, gens))

    monos.sort(key=lambda e: (mdeg(e), tuple(-a for a in e)))
    index = {e: i for i, e in enumerate(monos)}
    basis = tuple((monomial_name(gens, e), mdeg(e)) for e in monos)
    prods: dict[tuple[int, int], Vec] = {}
    for i, e in enumerate(monos):
        for j, f in enumerate(monos):
            s = tuple(a + b for a, b in zip(e, f))
            k = index.get(s)
            if k is None:
                continue
            sign = _koszul_sign(gens, e, f) if p > 2 else 1
            prods[(i, j)] = {k: sign % p}
    unit = monomial_name(gens, (0,) * n)
    return GradedAlgebra(GradedModule(p, D, basis), unit, prods, label)


def tensor_product(A: GradedAlgebra, B: GradedAlgebra, D: int | None = None, sep: str = "|") -> GradedAlgebra:
    """A ⊗ B with the Koszul sign (a⊗b)(c⊗d) = (-1)^{|b||c|} ac⊗bd."""
    if A.p != B.p:
        raise ValidationError("tensor factors over different primes")
    p = A.p
    if D is None:
        D = min(A.max_degree, B.max_degree)
    pairs = [(i, j) for i in range(len(A)) for j in range(len(B)) if A.degree(i) + B.degree(j) <= D]
    pairs.sort(key=lambda ij: (A.degree(ij[0]) + B.degree(ij[1]), ij))
    index = {ij: k for k, ij in enumerate(pairs)}
    basis = tuple((f"{A.module.name(i)}{sep}{B.module.name(j)}", A.degree(i) + B.degree(j)) for i, j in pairs)
    prods: dict[tuple[int, int], Vec] = {}
    degs = [A.degree(i) + B.degree(j) for i, j in pairs]
    bdeg = [B.degree(j) for _, j in pairs]
    adeg = [A.degree(i) for i, _ in pairs]
    for k1, (a, b) in enumerate(pairs):
        stop = bisect.bisect_right(degs, D - degs[k1])
        for k2 in range(stop):
            c, d = pairs[k2]
            ac = A.mul_basis(a, c)
            if not ac:
                continue
            bd = B.mul_basis(b, d)
            if not bd:
                continue
            sign = -1 if (bdeg[k1] * adeg[k2]) % 2 else 1
            out: Vec = {}
            for x, cx in ac.items():
                for y, cy in bd.items():
                    t = index.get((x, y))
                    if t is not None:
                        out[t] = (out.get(t, 0) + sign * cx * cy) % p
            out = vclean(out, p)
            if out:
                prods[(k1, k2)] = out
    unit = f"{A.unit}{sep}{B.unit}"
    return GradedAlgebra(GradedModule(p, D, basis), unit, prods, f"{A.label}{sep}{B.label}")


def dual_algebra(p: int, D: int, basis: Sequence[tuple[str, int]],
                 coproduct: Mapping[str, Mapping[tuple[str, str], int]], label: str = "") -> GradedAlgebra:
    """Degreewise dual of a connected coalgebra: (a*·b*)(c) = coefficient of a⊗b in Δc."""
    M = GradedModule(p, D, tuple(basis))
    zero = M.in_degree(0)
    if len(zero) != 1:
        raise ValidationError("dual_of expects a connected coalgebra (one degree-0 basis element)")
    prods: dict[tuple[int, int], Vec] = {}
    for c, terms in coproduct.items():
        k = M.index(c)
        for (a, b), coef in terms.items():
            i, j = M.index(a), M.index(b)
            if M.degree(i) + M.degree(j) != M.degree(k):
                raise ValidationError(f"coproduct term {a}⊗{b} of {c} has the wrong degree")
            prods[(i, j)] = vadd(prods.get((i, j), {}), {k: coef}, p)
    return GradedAlgebra(M, M.name(zero[0]), prods, label)


def make_preset(kind: str, p: int = 2, max_degree: int | None = None, **params) -> GradedAlgebra:
    """Constructors for the standard example algebras.

    kinds: truncated_polynomial, exterior, tensor_product, quotient_monomial_ideal, dual_of.
    """
    check_prime(p)
    D = max_degree
    if kind in ("truncated_polynomial", "exterior", "quotient_monomial_ideal"):
        if D is None:
            raise ValidationError(f"preset {kind} needs max_degree")
        gens = _parse_generators(params.get("generators", []), p, exterior=(kind == "exterior"))
        rels = []
        if kind == "quotient_monomial_ideal":
            names = [g.name for g in gens]
            for r in params.get("relations", []):
                unknown = set(r) - set(names)
                if unknown:
                    raise ValidationError(f"relation mentions unknown generators {sorted(unknown)}")
                rels.append(tuple(int(r.get(nm, 0)) for nm in names))
        A = monomial_algebra(p, D, gens, rels, label=kind)
    elif kind == "tensor_product":
        factors = [f if isinstance(f, GradedAlgebra) else algebra_from_json({"p": p, **f})
                   for f in params.get("factors", [])]
        if not factors:
            raise ValidationError("tensor_product needs at least one factor")
        A = factors[0]
        for B in factors[1:]:
            A = tensor_product(A, B, D)
        if D is not None and D != A.max_degree:
            A = truncate(A, D)
    elif kind == "dual_of":
        if D is None:
            raise ValidationError("dual_of needs max_degree")
        basis = [(b["name"], int(b["degree"])) for b in params["basis"]]
        cop: dict[str, dict[tuple[str, str], int]] = {}
        for entry in params.get("coproduct", []):
            terms = cop.setdefault(entry["element"], {})
            for t in entry.get("value", []):
                key = (t["left"], t["right"])
                terms[key] = terms.get(key, 0) + int(t["coef"])
        A = dual_algebra(p, D, basis, cop, label="dual_of")
    else:
        raise ValidationError(f"unknown preset kind {kind!r}")
    return A


def truncate(A: GradedAlgebra, D: int) -> GradedAlgebra:
    keep = [i for i in range(len(A)) if A.degree(i) <= D]
    new = {old: k for k, old in enumerate(keep)}
    basis = tuple(A.module.basis[i] for i in keep)
    prods = {}
    for (i, j), v in A.products.items():
        if i in new and j in new:
            w = {new[k]: c for k, c in v.items() if k in new}
            if w:
                prods[(new[i], new[j])] = w
    return GradedAlgebra(GradedModule(A.p, D, basis), A.unit, prods, A.label)


def polynomial(p: int, D: int, *gens: tuple) -> GradedAlgebra:
    """Shorthand: polynomial(3, 18, ("x", 2, 9)) is F_3[x]/(x^9) in degrees <= 18."""
    return monomial_algebra(p, D, _parse_generators(gens, p), label="truncated_polynomial")


def standard_presets(p: int) -> dict[str, GradedAlgebra]:
    """A small zoo of algebras used as carriers in checks and demos."""
    out = {
        "poly_x2": polynomial(p, 4 * p * p, ("x", 2)),
        "trunc_x2_h4": polynomial(p, 12, ("x", 2, 4)),
        "poly_x2_y4": polynomial(p, 4 * p, ("x", 2), ("y", 4)),
        "exterior_x3": make_preset("exterior", p=p, max_degree=6 * p, generators=[{"name": "e", "degree": 3}]),
        "mixed_deg0": polynomial(p, 4 * p, ("t", 0, 2), ("x", 2)),
        "monomial_quotient": make_preset(
            "quotient_monomial_ideal", p=p, max_degree=4 * p,
            generators=[{"name": "x", "degree": 2}, {"name": "y", "degree": 2}],
            relations=[{"x": 1, "y": 2}]),
    }
    if p == 2:
        out["poly_odd"] = polynomial(p, 12, ("z", 1))
    else:
        out["tensor_ext_poly"] = make_preset(
            "tensor_product", p=p, max_degree=4 * p,
            factors=[{"preset": "exterior", "max_degree": 4 * p, "generators": [{"name": "e", "degree": 1}]},
                     {"preset": "truncated_polynomial", "max_degree": 4 * p,
                      "generators": [{"name": "x", "degree": 2}]}])
    return out


def multiset_tuples(items: Sequence[int], k: int) -> Iterable[tuple[int, ...]]:
    return itertools.combinations_with_replacement(items, k)


def ground_field(p: int, max_degree: int = 0) -> GradedAlgebra:
    """F_p concentrated in degree 0."""
    return GradedAlgebra(GradedModule(p, max_degree, (("1", 0),)), "1", {}, "ground_field")
