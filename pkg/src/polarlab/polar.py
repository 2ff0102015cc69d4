"""Graded p-polar algebras: products of p equal-degree elements only."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .graded import (
    GradedAlgebra,
    GradedModule,
    ValidationError,
    Vec,
    tensor_product,
    vadd,
    vclean,
    vscale,
)
from .linalg import SparseEchelon


def sort_sign(items: Sequence[int], odd: Iterable[int] | None, p: int) -> tuple[int, tuple[int, ...]]:
    """Sort a tuple of basis indices, returning the Koszul sign of the sort.

    ``odd`` is the set of indices of odd degree. For p = 2 signs are moot.
    A repeated odd index gives sign 0 when p is odd.
    """
    t = tuple(sorted(items))
    if p == 2 or not odd:
        return 1, t
    odd = odd if isinstance(odd, (set, frozenset)) else set(odd)
    letters = [x for x in items if x in odd]
    if len(set(letters)) != len(letters):
        return 0, t
    inv = sum(1 for a, b in itertools.combinations(letters, 2) if a > b)
    return (-1 if inv % 2 else 1), t


def exterior_ok(t: Sequence[int], odd: set[int], p: int) -> bool:
    if p == 2:
        return True
    letters = [x for x in t if x in odd]
    return len(set(letters)) == len(letters)


@dataclass
class PolarAlgebra:
    """Graded module with symmetric p-fold products on each degree.

    ``mu`` maps sorted p-tuples of basis indices of a common degree j to a
    sparse vector in degree p*j. Evaluation on unsorted tuples applies the
    Koszul sign of the sort.
    """

    module: GradedModule
    mu: dict[tuple[int, ...], Vec] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        M, p = self.module, self.module.p
        self.odd = frozenset(i for i in range(len(M)) if M.degree(i) % 2) if p > 2 else frozenset()
        clean: dict[tuple[int, ...], Vec] = {}
        for args, val in self.mu.items():
            if len(args) != p:
                raise ValidationError(f"mu needs exactly {p} arguments, got {len(args)}")
            degs = {M.degree(i) for i in args}
            if len(degs) != 1:
                raise ValidationError(f"mu arguments {[M.name(i) for i in args]} have different degrees")
            j = degs.pop()
            sign, key = sort_sign(args, self.odd, p)
            if p * j > M.max_degree:
                continue  # lands above the truncation: zero by convention
            for k in val:
                if M.degree(k) != p * j:
                    raise ValidationError(
                        f"mu{tuple(M.name(i) for i in args)} has a component {M.name(k)!r} outside degree {p * j}")
            if sign == 0:
                if vclean(val, p):
                    raise ValidationError(
                        f"mu{tuple(M.name(i) for i in args)} repeats an odd argument and must vanish")
                continue
            v = vscale(val, sign, p)
            if key in clean and clean[key] != v:
                raise ValidationError(f"conflicting values for mu{tuple(M.name(i) for i in key)}")
            if v:
                clean[key] = v
        self.mu = clean

    @property
    def p(self) -> int:
        return self.module.p

    @property
    def max_degree(self) -> int:
        return self.module.max_degree

    def __len__(self):
        return len(self.module)

    def degree(self, i: int) -> int:
        return self.module.degree(i)

    def mu_basis(self, args: Sequence[int]) -> Vec:
        sign, key = sort_sign(args, self.odd, self.p)
        if sign == 0:
            return {}
        v = self.mu.get(key)
        if not v:
            return {}
        return v if sign == 1 else vscale(v, -1, self.p)

    def mu_elements(self, *xs: Mapping[int, int]) -> Vec:
        """Multilinear extension of mu to homogeneous elements of one degree."""
        p = self.p
        if len(xs) != p:
            raise ValueError(f"mu takes {p} arguments")
        out: Vec = {}
        for combo in itertools.product(*(list(x.items()) for x in xs)):
            coef = 1
            for _, c in combo:
                coef = coef * c % p
            val = self.mu_basis([i for i, _ in combo])
            if val:
                out = vadd(out, val, p, coef)
        return out

    def frobenius(self, x: Mapping[int, int]) -> Vec:
        return self.mu_elements(*([x] * self.p))

    def degrees(self) -> list[int]:
        return self.module.degrees()

    def to_json(self) -> dict:
        M = self.module
        return {
            "p": self.p,
            "max_degree": self.max_degree,
            "basis": [{"name": n, "degree": d} for n, d in M.basis],
            "mu": [
                {"args": [M.name(i) for i in args], "value": M.describe(v)}
                for args, v in sorted(self.mu.items())
            ],
        }


def polar_from_json(data: Mapping[str, Any]) -> PolarAlgebra:
    try:
        p = int(data["p"])
        D = int(data["max_degree"])
        basis = [(b["name"], int(b["degree"])) for b in data["basis"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"polar JSON missing field: {exc}") from None
    M = GradedModule(p, D, tuple(basis))
    mu: dict[tuple[int, ...], Vec] = {}
    odd = {i for i in range(len(M)) if M.degree(i) % 2} if p > 2 else set()
    for entry in data.get("mu", []):
        args = [M.index(a) for a in entry["args"]]
        if len(args) != p:
            raise ValidationError(f"mu entry {entry['args']} needs {p} arguments")
        val: Vec = {}
        for t in entry.get("value", []):
            k = M.index(t["basis"])
            val[k] = val.get(k, 0) + int(t["coef"])
        sign, key = sort_sign(args, odd, p)
        if sign == 0:
            if vclean(val, p):
                raise ValidationError(f"mu{tuple(entry['args'])} repeats an odd argument and must vanish")
            continue
        mu[key] = vadd(mu.get(key, {}), vscale(val, sign, p), p)
    return PolarAlgebra(M, mu, data.get("label", ""))


def polarize(A: GradedAlgebra) -> PolarAlgebra:
    """mu(x_1,...,x_p) = x_1 ... x_p computed in A."""
    p, M = A.p, A.module
    odd = {i for i in range(len(M)) if M.degree(i) % 2} if p > 2 else set()
    mu: dict[tuple[int, ...], Vec] = {}
    for j in M.degrees():
        if p * j > M.max_degree:
            continue
        idx = M.in_degree(j)
        for t in itertools.combinations_with_replacement(idx, p):
            if not exterior_ok(t, odd, p):
                continue
            v = A.prod({i: 1} for i in t)
            if v:
                mu[t] = v
    return PolarAlgebra(M, mu, f"pol({A.label})" if A.label else "pol")


def restrict(A: PolarAlgebra, keep: Iterable[int], label: str = "") -> PolarAlgebra:
    """Sub-polar algebra on a subset of basis indices closed under mu."""
    keep = sorted(set(keep))
    new = {old: k for k, old in enumerate(keep)}
    M = GradedModule(A.p, A.max_degree, tuple(A.module.basis[i] for i in keep))
    mu = {}
    for args, v in A.mu.items():
        if all(a in new for a in args):
            if any(k not in new for k in v):
                raise ValidationError("restriction is not closed under mu")
            mu[tuple(new[a] for a in args)] = {new[k]: c for k, c in v.items()}
    return PolarAlgebra(M, mu, label)


def block_of(degree: int, p: int) -> int:
    """The p-typical block label j (p does not divide j) of a positive degree, or 0."""
    if degree == 0:
        return 0
    while degree % p == 0:
        degree //= p
    return degree


def p_typical_split(A: PolarAlgebra) -> tuple[PolarAlgebra, dict[int, PolarAlgebra]]:
    """A = A_0 x prod_{p not dividing j} A_(j) with A_(j) living in degrees j p^i."""
    p, M = A.p, A.module
    groups: dict[int, list[int]] = {}
    for i in range(len(M)):
        groups.setdefault(block_of(M.degree(i), p), []).append(i)
    A0 = restrict(A, groups.pop(0, []), "A_0")
    blocks = {j: restrict(A, idx, f"A_({j})") for j, idx in sorted(groups.items())}
    return A0, blocks


def direct_product(parts: Sequence[PolarAlgebra], label: str = "") -> PolarAlgebra:
    if not parts:
        raise ValueError("need at least one factor")
    p = parts[0].p
    D = max(P.max_degree for P in parts)
    basis: list[tuple[str, int]] = []
    mu: dict[tuple[int, ...], Vec] = {}
    for P in parts:
        off = len(basis)
        basis.extend(P.module.basis)
        for args, v in P.mu.items():
            mu[tuple(a + off for a in args)] = {k + off: c for k, c in v.items()}
    return PolarAlgebra(GradedModule(p, D, tuple(basis)), mu, label)


def same_structure(A: PolarAlgebra, B: PolarAlgebra) -> bool:
    """Equality of structure constants after matching basis names."""
    if sorted(A.module.basis) != sorted(B.module.basis):
        return False

    def named(P):
        M = P.module
        return {
            tuple(sorted(M.name(a) for a in args)): {M.name(k): c for k, c in P.mu_basis(
                sorted(args, key=M.name)).items()}
            for args in P.mu
        }

    return named(A) == named(B)


# ---------------------------------------------------------------------------
# Symmetric algebra on a polar algebra's basis


class SymEnumerator:
    """Monomials of Sym(span of chosen basis elements), as sorted index tuples."""

    def __init__(self, A: PolarAlgebra, gens: Sequence[int], D: int):
        self.A = A
        self.p = A.p
        self.gens = sorted(gens)
        self.D = D
        self.odd = A.odd
        self._by_degree: dict[int, list[tuple[int, ...]]] | None = None

    def by_degree(self) -> dict[int, list[tuple[int, ...]]]:
        if self._by_degree is None:
            deg = self.A.degree
            out: dict[int, list[tuple[int, ...]]] = {0: [()]}
            gens = [g for g in self.gens if 0 < deg(g) <= self.D]

            def rec(start, t, d):
                for k in range(start, len(gens)):
                    g = gens[k]
                    nd = d + deg(g)
                    if nd > self.D:
                        continue
                    if g in self.odd and t and t[-1] == g:
                        continue
                    nt = t + (g,)
                    out.setdefault(nd, []).append(nt)
                    rec(k, nt, nd)

            rec(0, (), 0)
            self._by_degree = out
        return self._by_degree

    def mul(self, s: tuple[int, ...], t: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
        return sort_sign(s + t, self.odd, self.p)


def monomial_label(M: GradedModule, t: Sequence[int]) -> str:
    if not t:
        return "1"
    parts = []
    for i, grp in itertools.groupby(t):
        n = len(list(grp))
        name = M.name(i)
        tok = name if name.isidentifier() else f"[{name}]"
        parts.append(tok if n == 1 else f"{tok}^{n}")
    return "*".join(parts)


class PositiveQuotient:
    """Sym(A_+)/(x_1...x_p - mu(x_1,...,x_p)) degree by degree.

    Columns in each degree list longer monomials first so that the echelon
    form eliminates them in favour of shorter ones.
    """

    def __init__(self, A: PolarAlgebra, D: int | None = None, gens: Sequence[int] | None = None,
                 degrees: Iterable[int] | None = None):
        self.A = A
        self.p = A.p
        self.D = A.max_degree if D is None else min(D, A.max_degree)
        M = A.module
        if gens is None:
            gens = [i for i in range(len(M)) if M.degree(i) > 0]
        self.sym = SymEnumerator(A, gens, self.D)
        self.gen_set = set(self.sym.gens)
        self.wanted = None if degrees is None else set(degrees)
        self._ech: dict[int, SparseEchelon] = {}
        self._cols: dict[int, dict[tuple[int, ...], int]] = {}
        self._monos: dict[int, list[tuple[int, ...]]] = {}
        self._relations: dict[int, list[Vec]] | None = None

    def columns(self, d: int) -> dict[tuple[int, ...], int]:
        if d not in self._cols:
            monos = sorted(self.sym.by_degree().get(d, []), key=lambda t: (-len(t), t))
            self._monos[d] = monos
            self._cols[d] = {t: k for k, t in enumerate(monos)}
        return self._cols[d]

    def monomials(self, d: int) -> list[tuple[int, ...]]:
        self.columns(d)
        return self._monos[d]

    def relations(self) -> dict[int, list[tuple[tuple[int, ...], Vec]]]:
        """Relation generators x_1...x_p - mu(x) as (monomial, mu value) grouped by degree."""
        if self._relations is None:
            A, p, M = self.A, self.p, self.A.module
            rels: dict[int, list] = {}
            for j in sorted({M.degree(g) for g in self.gen_set}):
                if p * j > self.D:
                    continue
                idx = [g for g in M.in_degree(j) if g in self.gen_set]
                for t in itertools.combinations_with_replacement(idx, p):
                    if not exterior_ok(t, A.odd, p):
                        continue
                    val = {k: c for k, c in A.mu_basis(t).items()}
                    rels.setdefault(p * j, []).append((t, val))
            self._relations = rels
        return self._relations

    def echelon(self, d: int) -> SparseEchelon:
        if d in self._ech:
            return self._ech[d]
        p = self.p
        cols = self.columns(d)
        ech = SparseEchelon(p)
        by_deg = self.sym.by_degree()
        for rd, rels in self.relations().items():
            if rd > d:
                continue
            for m in by_deg.get(d - rd, []):
                for t, val in rels:
                    vec: Vec = {}
                    s, mono = self.sym.mul(m, t)
                    if s:
                        vec[cols[mono]] = s % p
                    for k, c in val.items():
                        if k not in self.gen_set:
                            continue
                        s2, mono2 = self.sym.mul(m, (k,))
                        if s2:
                            col = cols[mono2]
                            vec[col] = (vec.get(col, 0) - s2 * c) % p
                    vec = vclean(vec, p)
                    if vec:
                        ech.add(vec)
        self._ech[d] = ech
        return ech

    def reduce_monomial(self, t: tuple[int, ...], coef: int = 1) -> Vec:
        d = sum(self.A.degree(i) for i in t)
        if d > self.D:
            return {}
        cols = self.columns(d)
        return self.echelon(d).reduce({cols[t]: coef})

    def standard_monomials(self, d: int) -> list[tuple[int, ...]]:
        ech = self.echelon(d)
        return [t for t in self.monomials(d) if self.columns(d)[t] not in ech.rows]

    def unit_kernel(self, d: int) -> list[Vec]:
        """Kernel of u: A_d -> hull(A)_d as sparse vectors on A's basis."""
        p = self.p
        idx = [i for i in self.A.module.in_degree(d) if i in self.gen_set]
        if not idx:
            return []
        images = [self.reduce_monomial((i,)) for i in idx]
        # linear dependencies among images: track combinations alongside
        ech = SparseEchelon(p)
        n_cols = len(self.columns(d))
        kernel = []
        for k, (i, img) in enumerate(zip(idx, images)):
            vec = dict(img)
            vec[n_cols + k] = 1  # tag column records the combination
            red = ech.reduce(vec)
            if red and min(red) < n_cols:
                ech.add(red)
            elif red:
                kernel.append({idx[c - n_cols]: v for c, v in red.items()})
        return kernel


class DegreeZeroQuotient:
    """Sym(A_0)/(x_1...x_p - mu(x)) computed in a window of monomial lengths.

    Every monomial of length >= p rewrites to a shorter one, so the quotient
    is spanned by monomials of length < p. The window is widened until the
    quotient dimension is stable twice in a row.
    """

    def __init__(self, A: PolarAlgebra, max_window: int | None = None):
        self.A = A
        self.p = A.p
        self.gens = A.module.in_degree(0)
        self.max_window = max_window or 4 * self.p + 2
        self.window = 0
        self.cols: dict[tuple[int, ...], int] = {}
        self.ech = SparseEchelon(self.p)
        self._solve()

    def _build(self, L: int):
        p, A = self.p, self.A
        monos = []
        for n in range(L, -1, -1):
            monos.extend(itertools.combinations_with_replacement(self.gens, n))
        cols = {t: k for k, t in enumerate(monos)}
        ech = SparseEchelon(p)
        for t in itertools.combinations_with_replacement(self.gens, p):
            val = A.mu_basis(t)
            for n in range(0, L - p + 1):
                for m in itertools.combinations_with_replacement(self.gens, n):
                    vec = {cols[tuple(sorted(m + t))]: 1}
                    for k, c in val.items():
                        col = cols[tuple(sorted(m + (k,)))]
                        vec[col] = (vec.get(col, 0) - c) % p
                    vec = vclean(vec, p)
                    if vec:
                        ech.add(vec)
        return cols, ech

    def _solve(self):
        p = self.p
        if not self.gens:
            self.window = 0
            self.cols = {(): 0}
            return
        L = 2 * p - 1
        history = []
        while True:
            cols, ech = self._build(L)
            dim = len(cols) - len(ech)
            history.append(dim)
            self.window, self.cols, self.ech = L, cols, ech
            if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
                break
            if L >= self.max_window:
                break
            L += 1
        self.stable = len(history) >= 3 and history[-1] == history[-2] == history[-3]

    def standard_monomials(self) -> list[tuple[int, ...]]:
        return [t for t, c in self.cols.items() if c not in self.ech.rows]

    def reduce_monomial(self, t: tuple[int, ...]) -> Vec:
        t = tuple(sorted(t))
        if t not in self.cols:
            raise ValueError("monomial longer than the computation window")
        return self.ech.reduce({self.cols[t]: 1})


@dataclass
class Hull:
    algebra: GradedAlgebra
    unit_map: dict[int, Vec]  # basis index of A -> element of the hull
    degree_zero_stable: bool = True


def _quotient_algebra(M: GradedModule, p: int, D: int, standard: dict[int, list[tuple[int, ...]]],
                      reduce, multiply, cols_of) -> tuple[GradedAlgebra, dict[tuple[int, ...], int]]:
    basis = []
    index: dict[tuple[int, ...], int] = {}
    for d in sorted(standard):
        for t in standard[d]:
            index[t] = len(basis)
            basis.append((monomial_label(M, t), d))
    prods: dict[tuple[int, int], Vec] = {}
    inverses: dict[int, dict[int, tuple[int, ...]]] = {}
    for s, i in index.items():
        for t, j in index.items():
            sign, st = multiply(s, t)
            if not sign:
                continue
            red = reduce(st, sign % p)
            if red is None:
                continue
            cols = cols_of(st)
            inv = inverses.get(id(cols))
            if inv is None:
                inv = inverses[id(cols)] = {c: m for m, c in cols.items()}
            out = {index[inv[c]]: v for c, v in red.items()}
            if out:
                prods[(i, j)] = out
    unit = monomial_label(M, ())
    return GradedAlgebra(GradedModule(p, D, tuple(basis)), unit, prods, "hull"), index


def hull(A: PolarAlgebra, D: int | None = None) -> Hull:
    """The enveloping algebra Sym(A)/(x_1...x_p - mu(x_1,...,x_p)) in degrees <= D."""
    p, M = A.p, A.module
    D = A.max_degree if D is None else min(D, A.max_degree)
    pos = PositiveQuotient(A, D)
    std = {d: pos.standard_monomials(d) for d in range(0, D + 1) if pos.monomials(d)}

    def reduce_pos(t, coef):
        d = sum(M.degree(i) for i in t)
        if d > D:
            return None
        cols = pos.columns(d)
        return pos.echelon(d).reduce({cols[t]: coef})

    def cols_pos(t):
        return pos.columns(sum(M.degree(i) for i in t))

    plus, idx_plus = _quotient_algebra(M, p, D, std, reduce_pos, pos.sym.mul, cols_pos)

    zero = DegreeZeroQuotient(A)
    std0 = {0: zero.standard_monomials()}

    def reduce_zero(t, coef):
        return vscale(zero.reduce_monomial(t), coef, p)

    zmul = lambda s, t: (1, tuple(sorted(s + t)))  # noqa: E731
    zalg, idx_zero = _quotient_algebra(M, p, 0, std0, reduce_zero, zmul, lambda t: zero.cols)

    unit_map: dict[int, Vec] = {}
    if len(zalg) == 1:
        H = plus
        for i in range(len(M)):
            d = M.degree(i)
            if d == 0:
                unit_map[i] = {}
            elif d <= D:
                red = pos.reduce_monomial((i,))
                inv = {c: m for m, c in pos.columns(d).items()}
                unit_map[i] = {idx_plus[inv[c]]: v for c, v in red.items()}
    else:
        H = tensor_product(zalg, plus, D)
        n_plus = len(plus)
        pair_index = {}
        k = 0
        pairs = [(a, b) for a in range(len(zalg)) for b in range(n_plus) if plus.degree(b) <= D]
        pairs.sort(key=lambda ab: (plus.degree(ab[1]), ab))
        pair_index = {ab: k for k, ab in enumerate(pairs)}
        unit0 = zalg.unit_index
        unitp = plus.unit_index
        inv0 = {c: m for m, c in zero.cols.items()}
        for i in range(len(M)):
            d = M.degree(i)
            if d == 0:
                red = zero.reduce_monomial((i,))
                unit_map[i] = {pair_index[(idx_zero[inv0[c]], unitp)]: v for c, v in red.items()}
            elif d <= D:
                red = pos.reduce_monomial((i,))
                inv = {c: m for m, c in pos.columns(d).items()}
                unit_map[i] = {pair_index[(unit0, idx_plus[inv[c]])]: v for c, v in red.items()}
    return Hull(H, unit_map, getattr(zero, "stable", True))


# ---------------------------------------------------------------------------
# ASSOC checks and the p-polarity decision


def _swap_variants(X: tuple[int, ...], Y: tuple[int, ...]):
    """Ordered representatives: X with a moved last, Y with b moved first, and the swap."""
    for ai in sorted(set(range(len(X))), key=lambda k: X[k]):
        if ai and X[ai] == X[ai - 1]:
            continue
        a = X[ai]
        Xa = X[:ai] + X[ai + 1:] + (a,)
        for bi in range(len(Y)):
            if bi and Y[bi] == Y[bi - 1]:
                continue
            b = Y[bi]
            Yb = (b,) + Y[:bi] + Y[bi + 1:]
            yield Xa, Yb, Xa[:-1] + (b,), (a,) + Yb[1:]


def assoc_value_zero(A: PolarAlgebra, xs: Sequence[int], ys: Sequence[int]) -> Vec:
    inner = A.mu_basis(xs)
    if not inner:
        return {}
    return A.mu_elements(inner, *({y: 1} for y in ys))


def assoc_value(A: PolarAlgebra, x1: Sequence[int], x2: Sequence[int], ys: Sequence[int]) -> Vec:
    u = A.mu_basis(x1)
    if not u:
        return {}
    v = A.mu_basis(x2)
    if not v:
        return {}
    return A.mu_elements(u, v, *({y: 1} for y in ys))


def check_assoc(A: PolarAlgebra, limit: int | None = None) -> list[dict]:
    """Violations of the associativity axioms, checked on generating transpositions.

    Degree 0: mu(mu(x_1..x_p), y_2..y_p) must be invariant under x_p <-> y_2.
    Degree j > 0: mu(mu(x_1..x_p), mu(x_{p+1}..x_{2p}), y_3..y_p) must change by
    (-1)^j under x_p <-> x_{p+1}.
    """
    p, M = A.p, A.module
    report: list[dict] = []
    zero = M.in_degree(0)
    if zero:
        for X in itertools.combinations_with_replacement(zero, p):
            for Y in itertools.combinations_with_replacement(zero, p - 1):
                for Xo, Yo, Xs, Ys in _swap_variants(X, Y):
                    lhs = assoc_value_zero(A, Xo, Yo)
                    rhs = assoc_value_zero(A, Xs, Ys)
                    if lhs != rhs:
                        report.append({
                            "kind": "assoc_degree0",
                            "x": [M.name(i) for i in Xo],
                            "y": [M.name(i) for i in Yo],
                            "swap": [M.name(Xo[-1]), M.name(Yo[0])],
                        })
                        if limit and len(report) >= limit:
                            return report
    for j in M.degrees():
        if j == 0 or p * p * j > M.max_degree:
            continue
        xs = M.in_degree(j)
        ys = M.in_degree(p * j)
        sign = -1 if j % 2 else 1
        tuples = [t for t in itertools.combinations_with_replacement(xs, p) if exterior_ok(t, A.odd, p)]
        ytuples = [t for t in itertools.combinations_with_replacement(ys, p - 2) if exterior_ok(t, A.odd, p)]
        for X1 in tuples:
            for X2 in tuples:
                for Y in ytuples:
                    for Xo, Zo, Xs, Zs in _swap_variants(X1, X2):
                        lhs = assoc_value(A, Xs, Zs, Y)
                        rhs = vscale(assoc_value(A, Xo, Zo, Y), sign, p)
                        if lhs != rhs:
                            report.append({
                                "kind": "assoc",
                                "degree": j,
                                "x1": [M.name(i) for i in Xo],
                                "x2": [M.name(i) for i in Zo],
                                "y": [M.name(i) for i in Y],
                                "swap": [M.name(Xo[-1]), M.name(Zo[0])],
                            })
                            if limit and len(report) >= limit:
                                return report
    return report


def polarity_report(A: PolarAlgebra, D: int | None = None) -> dict:
    """Degree-0 ASSOC plus injectivity of the unit map in each positive degree <= D."""
    M = A.module
    D = A.max_degree if D is None else min(D, A.max_degree)
    A0, blocks = p_typical_split(A)
    zero_violations = check_assoc(A0, limit=1) if len(A0) else []
    failures = []
    for j, B in blocks.items():
        degs = sorted({B.degree(i) for i in range(len(B)) if B.degree(i) <= D})
        if not degs:
            continue
        q = PositiveQuotient(B, D)
        for d in degs:
            for v in q.unit_kernel(d):
                failures.append({"degree": d, "kernel": B.module.describe(v)})
    return {
        "p_polar": not zero_violations and not failures,
        "degree0_assoc_ok": not zero_violations,
        "kernel": failures,
        "certified_up_to_degree": D,
    }


def is_p_polar(A: PolarAlgebra, D: int | None = None) -> bool:
    """True iff u: A -> pol(hull(A)) is injective in degrees <= D."""
    return polarity_report(A, D)["p_polar"]


# ---------------------------------------------------------------------------
# Free p-polar algebras


def free_polar(M: GradedModule, D: int | None = None) -> PolarAlgebra:
    """Free p-polar algebra on M, truncated at D.

    On the block of degrees j p^i it is the part of Sym(M_(j)) in degrees
    j p^N, with mu given by multiplication.
    """
    p = M.p
    D = M.max_degree if D is None else D
    for n, d in M.basis:
        if d == 0:
            raise ValidationError(f"free_polar: degree-0 generator {n!r} makes degree 0 infinite")
    groups: dict[int, list[int]] = {}
    for i in range(len(M)):
        groups.setdefault(block_of(M.degree(i), p), []).append(i)
    parts = []
    for j, gens in sorted(groups.items()):
        parts.append(_free_block(M, gens, j, D))
    if not parts:
        return PolarAlgebra(GradedModule(p, D, ()), {}, "free")
    out = direct_product(parts, "free")
    return PolarAlgebra(GradedModule(p, D, out.module.basis), out.mu, "free")


def _free_block(M: GradedModule, gens: Sequence[int], j: int, D: int) -> PolarAlgebra:
    p = M.p
    carrier = PolarAlgebra(M, {})
    sym = SymEnumerator(carrier, gens, D)
    by_deg = sym.by_degree()
    degs = []
    d = j
    while d <= D:
        degs.append(d)
        d *= p
    basis = []
    index: dict[tuple[int, ...], int] = {}
    for d in degs:
        for t in sorted(by_deg.get(d, [])):
            index[t] = len(basis)
            basis.append((monomial_label(M, t), d))
    mu: dict[tuple[int, ...], Vec] = {}
    for d in degs:
        if p * d > D:
            continue
        monos = sorted(by_deg.get(d, []))
        for combo in itertools.combinations_with_replacement(range(len(monos)), p):
            ts = [monos[c] for c in combo]
            flat = tuple(x for t in ts for x in t)
            sign, prod = sort_sign(flat, carrier.odd, p)
            if sign == 0:
                continue
            mu[tuple(index[t] for t in ts)] = {index[prod]: sign % p}
    return PolarAlgebra(GradedModule(p, D, tuple(basis)), mu, f"free_({j})")
