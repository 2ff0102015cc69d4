"""Connected graded bicommutative Hopf algebras over F_p, truncated at a degree.

Bases are finite per degree and degree 0 is spanned by the unit, so every
Hopf algebra here is conilpotent. Coproducts are stored as dictionaries
{(left, right): coef}; products may be computed lazily.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import factorial
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .graded import (GradedAlgebra, GradedModule, Generator, ValidationError, Vec,
                     monomial_algebra, monomial_name, vadd, vclean)
from .linalg import check_prime, rank, rank_kernel, rref
from .polar import PolarAlgebra
from .witt import witt_sum_polys

Tensor = dict[tuple[int, int], int]


def _tadd(x: dict, y: Mapping, p: int, scale: int = 1) -> dict:
    for k, c in y.items():
        v = (x.get(k, 0) + scale * c) % p
        if v:
            x[k] = v
        else:
            x.pop(k, None)
    return x


class HopfAlgebra:
    """Basis, unit, coproduct table and a (possibly lazy) product."""

    def __init__(self, module: GradedModule, unit: int, coproducts: dict[int, Tensor],
                 products: dict[tuple[int, int], Vec] | None = None,
                 mul: Callable[[int, int], Vec] | None = None, label: str = ""):
        self.module = module
        self.unit = unit
        self.coproducts = coproducts
        self._products = dict(products or {})
        self._mul = mul
        self.label = label
        if module.dim(0) != 1 or module.degree(unit) != 0:
            raise ValidationError("only connected Hopf algebras (degree 0 = span of the unit) are supported")

    @property
    def p(self) -> int:
        return self.module.p

    @property
    def max_degree(self) -> int:
        return self.module.max_degree

    @property
    def has_product(self) -> bool:
        return self._mul is not None or bool(self._products) or len(self.module) == 1

    def __len__(self):
        return len(self.module)

    def degree(self, i: int) -> int:
        return self.module.degree(i)

    def mul_basis(self, i: int, j: int) -> Vec:
        if i == self.unit:
            return {j: 1}
        if j == self.unit:
            return {i: 1}
        key = (i, j)
        if key in self._products:
            return self._products[key]
        if self.degree(i) + self.degree(j) > self.max_degree:
            return {}
        if self._mul is None:
            if self._products:
                return {}
            raise ValidationError(f"{self.label or 'coalgebra'} has no product")
        out = vclean(self._mul(i, j), self.p)
        self._products[key] = out
        return out

    def mul(self, x: Mapping[int, int], y: Mapping[int, int]) -> Vec:
        out: Vec = {}
        for i, a in x.items():
            for j, b in y.items():
                out = vadd(out, self.mul_basis(i, j), self.p, a * b)
        return out

    def prod(self, xs: Sequence[Mapping[int, int]]) -> Vec:
        out: Vec = {self.unit: 1}
        for x in xs:
            out = self.mul(out, x)
        return out

    def coproduct(self, x: Mapping[int, int]) -> Tensor:
        out: Tensor = {}
        for i, c in x.items():
            _tadd(out, self.coproducts[i], self.p, c)
        return out

    def tensor_mul(self, X: Mapping[tuple[int, int], int], Y: Mapping[tuple[int, int], int]) -> Tensor:
        """(a|b)(c|d) = (-1)^{|b||c|} ac|bd in H (x) H."""
        p = self.p
        out: Tensor = {}
        for (a, b), s in X.items():
            for (c, d), t in Y.items():
                sign = -1 if (self.degree(b) * self.degree(c)) % 2 else 1
                left, right = self.mul_basis(a, c), self.mul_basis(b, d)
                for u, cu in left.items():
                    for v, cv in right.items():
                        k = (u, v)
                        val = (out.get(k, 0) + sign * s * t * cu * cv) % p
                        if val:
                            out[k] = val
                        else:
                            out.pop(k, None)
        return out

    def all_products(self) -> dict[tuple[int, int], Vec]:
        D = self.max_degree
        for i in range(len(self)):
            for j in range(len(self)):
                if self.degree(i) + self.degree(j) <= D:
                    self.mul_basis(i, j)
        u = self.unit
        return {k: v for k, v in self._products.items() if v and u not in k}

    def to_json(self, with_products: bool = True) -> dict:
        M = self.module
        out: dict[str, Any] = {
            "p": self.p,
            "max_degree": M.max_degree,
            "label": self.label,
            "unit": M.name(self.unit),
            "basis": [{"name": n, "degree": d} for n, d in M.basis],
        }
        if with_products and self.has_product:
            out["products"] = [
                {"left": M.name(i), "right": M.name(j), "value": M.describe(v)}
                for (i, j), v in sorted(self.all_products().items())
            ]
        out["coproducts"] = [
            {"element": M.name(i),
             "value": [{"coef": c, "left": M.name(a), "right": M.name(b)}
                       for (a, b), c in sorted(self.coproducts[i].items())]}
            for i in range(len(M))
        ]
        return out


def hopf_from_json(data: Mapping[str, Any]) -> HopfAlgebra:
    try:
        p = check_prime(int(data["p"]))
        D = int(data["max_degree"])
        M = GradedModule(p, D, tuple((b["name"], int(b["degree"])) for b in data["basis"]))
        unit = M.index(data.get("unit", "1"))
        prods: dict[tuple[int, int], Vec] = {}
        for e in data.get("products", []):
            v: Vec = {}
            for t in e["value"]:
                v = vadd(v, {M.index(t["basis"]): 1}, p, int(t["coef"]))
            prods[(M.index(e["left"]), M.index(e["right"]))] = v
        cop: dict[int, Tensor] = {i: {} for i in range(len(M))}
        for e in data.get("coproducts", []):
            k = M.index(e["element"])
            for t in e["value"]:
                _tadd(cop[k], {(M.index(t["left"]), M.index(t["right"])): 1}, p, int(t["coef"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"Hopf algebra JSON missing field: {exc}") from None
    return HopfAlgebra(M, unit, cop, products=prods, label=data.get("label", ""))


# ---------------------------------------------------------------------------
# Checks


def check_hopf(H: HopfAlgebra, limit: int | None = None, full: bool = True) -> list[dict]:
    """Counit, coassociativity, cocommutativity and (if there is a product)
    commutativity, associativity and multiplicativity of the coproduct.
    With ``full=False`` only the (co)commutativity and counit checks run."""
    p, M, D = H.p, H.module, H.max_degree
    issues: list[dict] = []

    def note(kind, *idx):
        if limit is None or len(issues) < limit:
            issues.append({"kind": kind, "elements": [M.name(i) for i in idx]})

    n = len(M)
    for i in range(n):
        cop = H.coproducts[i]
        left = {b: c for (a, b), c in cop.items() if a == H.unit}
        right = {a: c for (a, b), c in cop.items() if b == H.unit}
        if vclean(left, p) != {i: 1} or vclean(right, p) != {i: 1}:
            note("counit", i)
        for (a, b) in cop:
            if M.degree(a) + M.degree(b) != M.degree(i):
                note("coproduct_degree", i)
                break
        swapped: Tensor = {}
        for (a, b), c in cop.items():
            sign = -1 if (M.degree(a) * M.degree(b)) % 2 else 1
            _tadd(swapped, {(b, a): 1}, p, sign * c)
        if swapped != {k: v % p for k, v in cop.items() if v % p}:
            note("cocommutativity", i)
        # (D x 1) D == (1 x D) D as dictionaries on triples
        lhs: dict = {}
        rhs: dict = {}
        for (a, b), c in (cop.items() if full else ()):
            for (u, v), d in H.coproducts[a].items():
                _tadd(lhs, {(u, v, b): 1}, p, c * d)
            for (u, v), d in H.coproducts[b].items():
                _tadd(rhs, {(a, u, v): 1}, p, c * d)
        if full and lhs != rhs:
            note("coassociativity", i)
        if limit is not None and len(issues) >= limit:
            return issues
    if not H.has_product:
        return issues
    for i in range(n):
        for j in range(n):
            if M.degree(i) + M.degree(j) > D:
                continue
            xy = H.mul_basis(i, j)
            sign = -1 if (M.degree(i) * M.degree(j)) % 2 else 1
            if vclean(H.mul_basis(j, i), p) != vclean({k: sign * c for k, c in xy.items()}, p):
                note("commutativity", i, j)
            if full and H.coproduct(xy) != H.tensor_mul(H.coproducts[i], H.coproducts[j]):
                note("bialgebra", i, j)
            if limit is not None and len(issues) >= limit:
                return issues
    for i, j, k in itertools.product(range(n if full else 0), repeat=3):
        if M.degree(i) + M.degree(j) + M.degree(k) > D or H.unit in (i, j, k):
            continue
        if H.mul(H.mul_basis(i, j), {k: 1}) != H.mul({i: 1}, H.mul_basis(j, k)):
            note("associativity", i, j, k)
            if limit is not None and len(issues) >= limit:
                break
    return issues


# ---------------------------------------------------------------------------
# Primitives


def _reduced_coproduct_matrix(H: HopfAlgebra, d: int) -> np.ndarray:
    src = H.module.in_degree(d)
    cols = []
    keys: dict[tuple[int, int], int] = {}
    for i in src:
        cols.append({k: c for k, c in H.coproducts[i].items() if H.unit not in k})
        for k in cols[-1]:
            keys.setdefault(k, len(keys))
    m = np.zeros((len(keys), len(src)), dtype=np.int64)
    for c, col in enumerate(cols):
        for k, v in col.items():
            m[keys[k], c] = v % H.p
    return m


def primitive_vectors(H: HopfAlgebra) -> dict[int, list[np.ndarray]]:
    """Degree -> basis of ker(reduced coproduct), in coordinates of H_d."""
    out: dict[int, list[np.ndarray]] = {}
    for d in H.module.degrees():
        if d == 0:
            continue
        dim = H.module.dim(d)
        m = _reduced_coproduct_matrix(H, d)
        if m.shape[0] == 0:
            vecs = list(np.eye(dim, dtype=np.int64))
        else:
            _, ker = rank_kernel(m, H.p)
            vecs = [np.array(v, dtype=np.int64) for v in ker]
            if vecs:
                vecs = list(rref(np.array(vecs), H.p)[0])
        if vecs:
            out[d] = vecs
    return out


def _vec_name(H: HopfAlgebra, d: int, v: np.ndarray) -> str:
    idx = H.module.in_degree(d)
    parts = []
    for k, c in zip(idx, v):
        c = int(c) % H.p
        if c:
            parts.append(H.module.name(k) if c == 1 else f"{c}*{H.module.name(k)}")
    return "+".join(parts)


def primitives(H: HopfAlgebra) -> GradedModule:
    """P(H) as a graded module; basis names spell out the primitive vectors."""
    vecs = primitive_vectors(H)
    basis = [(_vec_name(H, d, v), d) for d, vs in sorted(vecs.items()) for v in vs]
    return GradedModule(H.p, H.max_degree, tuple(basis))


def dual(H: HopfAlgebra, label: str | None = None) -> HopfAlgebra:
    """Degreewise dual on the dual basis (same names); needs H's full product."""
    p, M = H.p, H.module
    prods = H.all_products()
    cop: dict[int, Tensor] = {i: {} for i in range(len(M))}
    for (a, b), v in prods.items():
        if H.unit in (a, b):
            continue
        sign = -1 if (M.degree(a) * M.degree(b)) % 2 else 1
        for i, c in v.items():
            _tadd(cop[i], {(a, b): 1}, p, sign * c)
    for i in range(len(M)):
        unit_terms = {(H.unit, i): 1} if i == H.unit else {(H.unit, i): 1, (i, H.unit): 1}
        _tadd(cop[i], unit_terms, p)
    dprods: dict[tuple[int, int], Vec] = {}
    for i in range(len(M)):
        for (a, b), c in H.coproducts[i].items():
            sign = -1 if (M.degree(a) * M.degree(b)) % 2 else 1
            dprods[(a, b)] = vadd(dprods.get((a, b), {}), {i: 1}, p, sign * c)
    return HopfAlgebra(M, H.unit, cop, products=dprods,
                       label=label if label is not None else f"dual({H.label})")


# ---------------------------------------------------------------------------
# Symmetric tensor coalgebra and cofree Hopf algebras


def _multisets(V: GradedModule, D: int) -> list[tuple[int, ...]]:
    p = V.p
    for n, d in V.basis:
        if d <= 0:
            raise ValidationError(f"generator {n!r} must have positive degree")
    letters = sorted(range(len(V)), key=lambda i: (V.degree(i), i))
    out: list[tuple[int, ...]] = []

    def rec(k, cur, deg):
        if k == len(letters):
            out.append(tuple(sorted(cur)))
            return
        x = letters[k]
        dx = V.degree(x)
        top = 1 if (p > 2 and dx % 2) else D // dx
        for m in range(0, top + 1):
            if deg + m * dx > D:
                break
            rec(k + 1, cur + [x] * m, deg + m * dx)

    rec(0, [], 0)
    out.sort(key=lambda w: (sum(V.degree(x) for x in w), len(w), w))
    return out


def _word_name(V: GradedModule, w: tuple[int, ...]) -> str:
    if not w:
        return "1"
    return "[" + ",".join(V.name(x) for x in w) + "]"


def _unshuffle_sign(V: GradedModule, w: tuple[int, ...], mask: tuple[bool, ...]) -> int:
    """Sign for moving the letters flagged in mask to the front (odd letters only)."""
    s = 0
    seen_right_odd = 0
    for x, left in zip(w, mask):
        if V.degree(x) % 2:
            if left:
                s += seen_right_odd
            else:
                seen_right_odd += 1
    return -1 if s % 2 else 1


def _split_multiset(w: tuple[int, ...]):
    """All (S, T, mask) with S + T = w as multisets, one per distinct S."""
    distinct = sorted(set(w))
    counts = [w.count(x) for x in distinct]
    for choice in itertools.product(*[range(c + 1) for c in counts]):
        S, T = [], []
        for x, c, k in zip(distinct, counts, choice):
            S += [x] * k
            T += [x] * (c - k)
        # mask over w: first k copies of each letter go left
        used = dict(zip(distinct, choice))
        mask = []
        for x in w:
            if used[x] > 0:
                mask.append(True)
                used[x] -= 1
            else:
                mask.append(False)
        yield tuple(S), tuple(T), tuple(mask)


@dataclass
class _SymData:
    V: GradedModule
    words: list[tuple[int, ...]]
    index: dict[tuple[int, ...], int]
    module: GradedModule
    coproducts: dict[int, Tensor]


def _sym_data(V: GradedModule, D: int) -> _SymData:
    p = V.p
    words = _multisets(V, D)
    index = {w: k for k, w in enumerate(words)}
    module = GradedModule(p, D, tuple((_word_name(V, w), sum(V.degree(x) for x in w)) for w in words))
    cop: dict[int, Tensor] = {}
    for k, w in enumerate(words):
        t: Tensor = {}
        for S, T, mask in _split_multiset(w):
            sign = _unshuffle_sign(V, w, mask) if p > 2 else 1
            _tadd(t, {(index[S], index[T]): 1}, p, sign)
        cop[k] = t
    return _SymData(V, words, index, module, cop)


def symmetric_tensor_coalgebra(V: GradedModule, D: int | None = None) -> HopfAlgebra:
    """S(V): signed multisets of V's basis with the splitting coproduct; no product."""
    D = V.max_degree if D is None else D
    s = _sym_data(V, D)
    return HopfAlgebra(s.module, s.index[()], s.coproducts, label="S(V)")


def quasi_shuffle(S: tuple[int, ...], T: tuple[int, ...], V: GradedModule,
                  fuse: Callable[[int, int], Vec] | None) -> dict[tuple[int, ...], int]:
    """Product of symmetrized words: signed sum over order-compatible merges of S
    and T in which pairs (s, t) may be fused by ``fuse``. Returns sorted output words."""
    p = V.p
    odd = [V.degree(i) % 2 == 1 for i in range(len(V))]
    memo: dict = {}

    def pick(rem, x):
        # remove one copy of x; sign counts odd letters before it
        k = rem.index(x)
        before = sum(1 for y in rem[:k] if odd[y]) if odd[x] else 0
        return rem[:k] + rem[k + 1:], before

    def rec(Srem, Trem, last):
        key = (Srem, Trem, last)
        if key in memo:
            return memo[key]
        if not Srem and not Trem:
            return {(): 1}
        out: dict[tuple[int, ...], int] = {}

        def extend(letter, coef, S2, T2):
            if coef % p == 0:
                return
            for tail, c in rec(S2, T2, letter).items():
                w = (letter,) + tail
                v = (out.get(w, 0) + coef * c) % p
                if v:
                    out[w] = v
                else:
                    out.pop(w, None)

        for x in sorted(set(Srem)):
            if x < last:
                continue
            S2, b = pick(Srem, x)
            extend(x, -1 if b % 2 else 1, S2, Trem)
        for y in sorted(set(Trem)):
            if y < last:
                continue
            T2, b = pick(Trem, y)
            b += sum(1 for z in Srem if odd[z]) if odd[y] else 0
            extend(y, -1 if b % 2 else 1, Srem, T2)
        if fuse is not None:
            for x in sorted(set(Srem)):
                S2, b1 = pick(Srem, x)
                for y in sorted(set(Trem)):
                    T2, b2 = pick(Trem, y)
                    if odd[y]:
                        b2 += sum(1 for z in S2 if odd[z])
                    sign = -1 if (b1 + b2) % 2 else 1
                    for w, c in fuse(x, y).items():
                        if w >= last:
                            extend(w, sign * c, S2, T2)
        memo[key] = out
        return out

    res = rec(tuple(S), tuple(T), -1)
    if p > 2:
        res = {w: c for w, c in res.items()
               if not any(odd[x] and w.count(x) > 1 for x in set(w))}
    return res


def _cofree(V: GradedModule, D: int, fuse: Callable[[int, int], Vec] | None, label: str) -> HopfAlgebra:
    s = _sym_data(V, D)

    def mul(i, j):
        out: Vec = {}
        for w, c in quasi_shuffle(s.words[i], s.words[j], V, fuse).items():
            k = s.index.get(w)
            if k is not None:
                out[k] = (out.get(k, 0) + c) % V.p
        return out

    return HopfAlgebra(s.module, s.index[()], s.coproducts, mul=mul, label=label)


def cof_u(A: GradedAlgebra, D: int | None = None) -> HopfAlgebra:
    """Cofree cocommutative conilpotent Hopf algebra on the augmentation ideal of A."""
    D = A.max_degree if D is None else D
    M = A.module
    if M.dim(0) != 1 or M.degree(A.unit_index) != 0:
        raise ValidationError("cof_u needs a connected algebra: degree 0 must be spanned by the unit "
                              "(a nilpotent degree-0 ideal gives infinite-dimensional degree 0)")
    keep = [i for i in range(len(M)) if i != A.unit_index]
    pos = {k: n for n, k in enumerate(keep)}
    V = GradedModule(A.p, D, tuple(M.basis[k] for k in keep if M.degree(k) <= D))

    def fuse(x, y):
        return {pos[k]: c for k, c in A.mul_basis(keep[x], keep[y]).items() if k in pos and pos[k] < len(V)}

    return _cofree(V, D, fuse, f"cof_u({A.label})")


def trivial_cofree(V: GradedModule, D: int | None = None) -> HopfAlgebra:
    """cof_u of V with zero multiplication: S(V) with the plain shuffle product."""
    D = V.max_degree if D is None else D
    return _cofree(V, D, None, "S(V)")


def exterior_hopf(M: GradedModule) -> HopfAlgebra:
    """Exterior algebra on primitive odd generators (p odd)."""
    if M.p == 2:
        raise ValidationError("exterior_hopf needs p > 2")
    for n, d in M.basis:
        if d % 2 == 0:
            raise ValidationError(f"generator {n!r} has even degree {d}")
    H = _cofree(M, M.max_degree, None, "exterior")
    return H


# ---------------------------------------------------------------------------
# Polynomial Hopf algebras with multiplicative coproducts


class _MonomialIndex:
    def __init__(self, A: GradedAlgebra, gens: Sequence[Generator]):
        self.A, self.gens = A, list(gens)
        self.exps: list[tuple[int, ...]] = []
        D = A.max_degree
        names = {}

        def rec(k, e, deg):
            if k == len(gens):
                names[monomial_name(gens, e)] = tuple(e)
                return
            a = 0
            while deg + a * gens[k].degree <= D and (gens[k].height is None or a < gens[k].height):
                rec(k + 1, e + [a], deg + a * gens[k].degree)
                a += 1

        rec(0, [], 0)
        self.exps = [names[n] for n, _ in A.module.basis]


def polynomial_hopf(A: GradedAlgebra, gens: Sequence[Generator], gen_coproducts: Sequence[Tensor],
                    label: str = "") -> HopfAlgebra:
    """Extend generator coproducts multiplicatively over a monomial algebra."""
    p = A.p
    idx = _MonomialIndex(A, gens)
    H = HopfAlgebra(A.module, A.unit_index, {}, products={k: v for k, v in A.products.items()}, label=label)
    H._mul = A.mul_basis
    cache: dict[tuple[int, ...], Tensor] = {tuple([0] * len(gens)): {(A.unit_index, A.unit_index): 1}}

    def cop(e):
        if e in cache:
            return cache[e]
        k = next(i for i, a in enumerate(e) if a)
        rest = list(e)
        rest[k] -= 1
        out = H.tensor_mul(gen_coproducts[k], cop(tuple(rest)))
        cache[e] = out
        return out

    coproducts = {}
    for i, e in enumerate(idx.exps):
        coproducts[i] = {k: c % p for k, c in cop(e).items() if c % p}
    H.coproducts = coproducts
    return H


def lambda_p(j: int, p: int, n: int | None = None, D: int | None = None) -> HopfAlgebra:
    """k[t_0..t_n], |t_i| = j p^i, with t_m -> S_m(t (x) 1, 1 (x) t) (Witt addition)."""
    check_prime(p)
    if j < 1:
        raise ValidationError("j must be positive")
    if p > 2 and j % 2:
        raise ValidationError("Witt vectors in odd degree are only defined for p = 2")
    if D is None:
        D = j * p ** (n if n is not None else 2)
    top = 0
    while j * p ** (top + 1) <= D:
        top += 1
    n = top if n is None else min(n, top)
    gens = [Generator(f"t{i}", j * p**i) for i in range(n + 1)]
    A = monomial_algebra(p, D, gens, label="lambda")
    idx = _MonomialIndex(A, gens)
    where = {e: k for k, e in enumerate(idx.exps)}
    polys = witt_sum_polys(p, n)
    gen_cops = []
    for m in range(n + 1):
        t: Tensor = {}
        for exps, c in polys.sums[m].to_dict().items():
            a, b = tuple(exps[: n + 1]), tuple(exps[n + 1:])
            _tadd(t, {(where[a], where[b]): 1}, p, int(c))
        gen_cops.append(t)
    return polynomial_hopf(A, gens, gen_cops, label=f"lambda_{p}(j={j})")


def counterexample_pair(p: int, j: int, D: int | None = None) -> tuple[HopfAlgebra, HopfAlgebra]:
    """(H, H'): duals of k[x, y] with |x| = j, |y| = p^2 j, x primitive, and y
    either twisted by x^{pi} (x) x^{p(p-i)} / (i!(p-i)!) or primitive."""
    check_prime(p)
    if p == 2:
        raise ValidationError("the counterexample needs p odd")
    if j % 2:
        raise ValidationError("j must be even")
    D = p * p * j if D is None else D
    if p * p * j > D:
        raise ValidationError("need p^2 j <= D")
    gens = [Generator("x", j), Generator("y", p * p * j)]
    A = monomial_algebra(p, D, gens, label="k[x,y]")
    M = A.module
    one = A.unit_index
    xi = M.index("x")
    yi = M.index("y")
    prim_x = {(xi, one): 1, (one, xi): 1}
    prim_y = {(yi, one): 1, (one, yi): 1}
    twisted = dict(prim_y)
    for i in range(1, p):
        c = pow(factorial(i) * factorial(p - i), -1, p)
        left = M.index(monomial_name(gens, (p * i, 0)))
        right = M.index(monomial_name(gens, (p * (p - i), 0)))
        _tadd(twisted, {(left, right): 1}, p, c)
    Hs = polynomial_hopf(A, gens, [prim_x, twisted], label="H*")
    Hps = polynomial_hopf(A, gens, [prim_x, prim_y], label="H'*")
    return dual(Hs, "H"), dual(Hps, "H'")


# ---------------------------------------------------------------------------
# Cofreeness


def sym_dims(dims: Mapping[int, int], p: int, D: int) -> dict[int, int]:
    """Degreewise dimensions of S(P) for P with the given dimensions."""
    series = [0] * (D + 1)
    series[0] = 1
    for d, n in dims.items():
        for _ in range(n):
            if p > 2 and d % 2:
                for t in range(D, d - 1, -1):
                    series[t] += series[t - d]
            else:
                for t in range(d, D + 1):
                    series[t] += series[t - d]
    return {d: c for d, c in enumerate(series) if c}


def _vec(H: HopfAlgebra, d: int, arr: np.ndarray) -> Vec:
    idx = H.module.in_degree(d)
    return {idx[k]: int(c) % H.p for k, c in enumerate(arr) if int(c) % H.p}


def _arr(H: HopfAlgebra, d: int, v: Mapping[int, int]) -> np.ndarray:
    idx = H.module.in_degree(d)
    pos = {k: n for n, k in enumerate(idx)}
    out = np.zeros(len(idx), dtype=np.int64)
    for k, c in v.items():
        out[pos[k]] = c % H.p
    return out


def _rows(vecs, dim):
    if len(vecs) == 0:
        return np.zeros((0, dim), dtype=np.int64)
    return np.array(vecs, dtype=np.int64).reshape(len(vecs), dim)


@dataclass
class CofreeReport:
    cofree: bool
    criterion: str
    dims: dict[int, int]
    primitive_dims: dict[int, int]
    sym_dims: dict[int, int]
    retraction_found: bool
    failure: str | None = None
    polar_structure: PolarAlgebra | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {
            "cofree": self.cofree,
            "criterion": self.criterion,
            "dims": self.dims,
            "primitive_dims": self.primitive_dims,
            "sym_dims": self.sym_dims,
            "retraction_found": self.retraction_found,
            "failure": self.failure,
        }
        if self.polar_structure is not None:
            out["polar_structure"] = self.polar_structure.to_json()
        return out


def verify_cofree(H: HopfAlgebra, D: int | None = None) -> CofreeReport:
    """Dimension criterion: find a retraction of the p-fold-product structure of H
    onto P(H) (a complement K of P with mu(K, H, ..., H) in K), read off the induced
    p-polar structure on P(H), and compare dim H_d with dim S(P(H))_d."""
    p = H.p
    D = H.max_degree if D is None else min(D, H.max_degree)
    crit = "cofree (dimension criterion with polar retraction onto primitives)"
    dims = {d: n for d, n in H.module.dims().items() if d <= D}
    P = {d: v for d, v in primitive_vectors(H).items() if d <= D}
    pdims = {d: len(v) for d, v in P.items()}
    sdims = sym_dims(pdims, p, D)
    if check_hopf(H, limit=1, full=False):
        return CofreeReport(False, crit, dims, pdims, sdims, False, "not a bicommutative Hopf algebra")

    K: dict[int, np.ndarray] = {}
    failure = None
    for d in sorted(dims):
        if d == 0:
            continue
        dim = dims[d]
        Prow = _rows(P.get(d, []), dim)
        forced = []
        if d % p == 0 and (d // p) in K and K[d // p].shape[0]:
            q = d // p
            hbasis = H.module.in_degree(q)
            for krow in K[q]:
                kv = _vec(H, q, krow)
                for combo in itertools.combinations_with_replacement(hbasis, p - 1):
                    w = H.prod([kv] + [{h: 1} for h in combo])
                    if w:
                        forced.append(_arr(H, d, w))
        J = rref(_rows(forced, dim), p)[0] if forced else _rows([], dim)
        rJ, rP = (rank(J, p) if J.size else 0), Prow.shape[0]
        both = np.vstack([J, Prow]) if (J.size and Prow.size) else (J if J.size else Prow)
        if (rank(both, p) if both.size else 0) < rJ + rP:
            failure = f"p-fold products of the complement reach primitives in degree {d}"
            K[d] = J
            break
        extra = []
        cur = both.copy() if both.size else np.zeros((0, dim), dtype=np.int64)
        r = rJ + rP
        for v in np.eye(dim, dtype=np.int64):
            trial = np.vstack([cur, v])
            if rank(trial, p) > r:
                cur, r = trial, r + 1
                extra.append(v)
        K[d] = np.vstack([J] + [e.reshape(1, -1) for e in extra]) if extra or J.size else _rows([], dim)

    structure = None
    if failure is None:
        structure = _induced_structure(H, P, K, D)
    dims_ok = all(sdims.get(d, 0) == n for d, n in dims.items()) and all(d in dims for d in sdims)
    if failure is None and not dims_ok:
        bad = min(d for d in set(dims) | set(sdims) if dims.get(d, 0) != sdims.get(d, 0))
        failure = f"dim H_{bad} = {dims.get(bad, 0)} but dim S(P)_{bad} = {sdims.get(bad, 0)}"
    return CofreeReport(failure is None, crit, dims, pdims, sdims, structure is not None, failure, structure)


def _induced_structure(H: HopfAlgebra, P: dict[int, list[np.ndarray]], K: dict[int, np.ndarray],
                       D: int) -> PolarAlgebra:
    p = H.p
    basis, where = [], {}
    for d in sorted(P):
        for k, v in enumerate(P[d]):
            where[(d, k)] = len(basis)
            basis.append((_vec_name(H, d, v), d))
    M = GradedModule(p, D, tuple(basis))
    mu: dict[tuple[int, ...], Vec] = {}
    for d in sorted(P):
        if p * d > D or (p * d) not in K:
            continue
        t = p * d
        Pt = P.get(t, [])
        Kt = K[t]
        frame = np.vstack([_rows(Pt, H.module.dim(t)), Kt]) if Kt.size else _rows(Pt, H.module.dim(t))
        inv = _left_coords(frame, p)
        for combo in itertools.combinations_with_replacement(range(len(P[d])), p):
            w = H.prod([_vec(H, d, P[d][c]) for c in combo])
            if not w:
                continue
            coords = (_arr(H, t, w) @ inv) % p
            val = {where[(t, k)]: int(coords[k]) for k in range(len(Pt)) if coords[k]}
            if val:
                mu[tuple(where[(d, c)] for c in combo)] = val
    return PolarAlgebra(M, mu, "P(H)")


def _left_coords(frame: np.ndarray, p: int) -> np.ndarray:
    """Matrix X with v @ X = coordinates of v in the rows of the square ``frame``."""
    n = frame.shape[0]
    aug = np.hstack([frame.T % p, np.eye(n, dtype=np.int64)])
    red, piv = rref(aug, p)
    if list(piv[:n]) != list(range(n)):
        raise ArithmeticError("P + K is not all of H")
    return red[:, n:].T


# ---------------------------------------------------------------------------
# Representability


def convolve(H: HopfAlgebra, gens: Sequence[int], A: GradedAlgebra,
             f: Sequence[Mapping[int, int]], g: Sequence[Mapping[int, int]]) -> list[Vec]:
    """(f * g)(t) = sum f(t')g(t'') for algebra maps f, g: H -> A given on the
    polynomial generators ``gens`` (indices of H)."""
    p = H.p
    exps = _MonomialIndex(_as_algebra(H), [Generator(H.module.name(k), H.degree(k)) for k in gens]).exps

    def evaluate(images, i):
        out = A.one()
        for k, e in enumerate(exps[i]):
            for _ in range(e):
                out = A.mul(out, images[k])
        return out

    res = []
    for k in gens:
        tot: Vec = {}
        for (a, b), c in H.coproducts[k].items():
            tot = vadd(tot, A.mul(evaluate(f, a), evaluate(g, b)), p, c)
        res.append(tot)
    return res


def _as_algebra(H: HopfAlgebra) -> GradedAlgebra:
    return GradedAlgebra(H.module, H.module.name(H.unit), H.all_products(), H.label)
