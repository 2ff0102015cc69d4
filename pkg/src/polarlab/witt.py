"""p-typical Witt vectors over graded p-polar algebras, plus unipotent co-Witt vectors.

The universal polynomials are computed over the integers with python-flint
and reduced mod p for evaluation. Evaluation in a p-polar algebra follows a
fixed bracketing: a monomial of weight p^m is split into p sub-monomials of
weight p^(m-1) and combined with mu.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence, Union

import flint

from .graded import GradedAlgebra, ValidationError, Vec, vadd, vscale
from .linalg import IntPoly, check_prime
from .polar import PolarAlgebra, is_p_polar

Carrier = Union[PolarAlgebra, GradedAlgebra]

MAX_LENGTH = 4
MAX_MONOMIALS = 2_000_000


class WittResourceError(RuntimeError):
    """The requested universal polynomials exceed the configured size limits."""


class NotPolarError(ValueError):
    """The carrier's mu is not realized by any commutative algebra."""


def ghost_poly(xs: Sequence, p: int, m: int):
    """w_m(x) = sum_{i<=m} p^i x_i^(p^(m-i)); works for flint polys and ints."""
    total = 0
    for i in range(m + 1):
        total = total + p**i * xs[i] ** (p ** (m - i))
    return total


@lru_cache(maxsize=None)
def monomial_count(p: int, n: int, nvars_per_weight: int = 2) -> int:
    """Number of monomials of weight p^n when each weight p^i (i <= n) has
    ``nvars_per_weight`` variables. Upper bound for the size of S_n."""
    target = p**n
    ways = [0] * (target + 1)
    ways[0] = 1
    for i in range(n + 1):
        w = p**i
        for _ in range(nvars_per_weight):
            for t in range(w, target + 1):
                ways[t] += ways[t - w]
    return ways[target]


def _names(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(n + 1)]


@dataclass
class WittPolynomialSet:
    """Universal addition polynomials S_0..S_n in a_0..a_n, b_0..b_n over Z."""

    p: int
    n: int
    sums: list  # flint fmpz_mpoly
    ctx: object = field(repr=False, default=None)

    def as_intpolys(self) -> list[IntPoly]:
        return [IntPoly.from_flint(s) for s in self.sums]

    def ghost_identity(self) -> bool:
        """ghost_m(S) == ghost_m(a) + ghost_m(b) exactly, for every m <= n."""
        gens = self.ctx.gens()
        a, b = gens[: self.n + 1], gens[self.n + 1:]
        for m in range(self.n + 1):
            if ghost_poly(self.sums, self.p, m) != ghost_poly(a, self.p, m) + ghost_poly(b, self.p, m):
                return False
        return True


def _check_size(p: int, n: int, max_length: int, max_monomials: int, nvars: int = 2):
    if n > max_length:
        raise WittResourceError(f"length {n} exceeds the configured maximum {max_length}")
    est = monomial_count(p, n, nvars)
    if est > max_monomials:
        raise WittResourceError(
            f"S_{n} for p={p} may have up to {est} monomials (limit {max_monomials}); "
            "raise max_monomials to attempt it")


def _recursion(p: int, n: int, target: Callable[[int], object], ctx) -> list:
    """Solve w_m(X) = target(m) for X_0..X_n with exact division by p^m."""
    out = []
    for m in range(n + 1):
        num = target(m)
        for i in range(m):
            num = num - p**i * out[i] ** (p ** (m - i))
        try:
            out.append(num / p**m)
        except Exception as exc:  # flint DomainError: inexact division
            raise ArithmeticError(f"inexact division by {p}^{m} in the Witt recursion") from exc
    return out


_lock = threading.Lock()
_cache: dict[tuple, object] = {}


def _cached(key, build):
    with _lock:
        if key in _cache:
            return _cache[key]
    value = build()
    with _lock:
        return _cache.setdefault(key, value)


def witt_sum_polys(p: int, n: int, max_length: int = MAX_LENGTH,
                   max_monomials: int = MAX_MONOMIALS) -> WittPolynomialSet:
    check_prime(p)
    _check_size(p, n, max_length, max_monomials)

    def build():
        ctx = flint.fmpz_mpoly_ctx.get(tuple(_names("a", n) + _names("b", n)), "lex")
        gens = ctx.gens()
        a, b = gens[: n + 1], gens[n + 1:]
        sums = _recursion(p, n, lambda m: ghost_poly(a, p, m) + ghost_poly(b, p, m), ctx)
        return WittPolynomialSet(p, n, sums, ctx)

    return _cached(("sum", p, n), build)


def witt_diff_polys(p: int, n: int, max_length: int = MAX_LENGTH,
                    max_monomials: int = MAX_MONOMIALS) -> WittPolynomialSet:
    """D_m with ghost(D) = ghost(a) - ghost(b)."""
    check_prime(p)
    _check_size(p, n, max_length, max_monomials)

    def build():
        ctx = flint.fmpz_mpoly_ctx.get(tuple(_names("a", n) + _names("b", n)), "lex")
        gens = ctx.gens()
        a, b = gens[: n + 1], gens[n + 1:]
        diffs = _recursion(p, n, lambda m: ghost_poly(a, p, m) - ghost_poly(b, p, m), ctx)
        return WittPolynomialSet(p, n, diffs, ctx)

    return _cached(("diff", p, n), build)


def frobenius_polys(p: int, n: int, max_length: int = MAX_LENGTH + 1,
                    max_monomials: int = MAX_MONOMIALS) -> WittPolynomialSet:
    """F_0..F_n in a_0..a_{n+1} with w_m(F(a)) = w_{m+1}(a)."""
    check_prime(p)
    _check_size(p, n + 1, max_length, max_monomials, nvars=1)

    def build():
        ctx = flint.fmpz_mpoly_ctx.get(tuple(_names("a", n + 1)), "lex")
        a = ctx.gens()
        fr = _recursion(p, n, lambda m: ghost_poly(a, p, m + 1), ctx)
        return WittPolynomialSet(p, n, fr, ctx)

    return _cached(("frob", p, n), build)


def ghost(entries: Sequence, p: int) -> list:
    """Ghost components of a Witt vector with entries in a torsion-free ring.

    Entries may be ints, IntPolys or flint polynomials. Carriers of
    characteristic p are rejected: the ghost map is not injective there.
    """
    for e in entries:
        if isinstance(e, (PolarAlgebra, GradedAlgebra, dict)):
            raise ValidationError("ghost needs a torsion-free carrier (integers or integer polynomials)")
    return [ghost_poly(list(entries), p, m) for m in range(len(entries))]


# ---------------------------------------------------------------------------
# Evaluation plans


@dataclass
class _Plan:
    """Per-polynomial evaluation data reduced mod p.

    ``terms[m]`` lists (coefficient mod p, monomial id); ``nodes`` maps a
    monomial id to either ('var', index) or ('mu', child ids).
    """

    nvars: int
    weights: list[int]
    terms: list[list[tuple[int, int]]]
    nodes: list[tuple]
    exps: list[tuple[int, ...]]
    groups: list[dict[int, list[tuple[int, int]]]] = field(default_factory=list)  # support mask -> terms


def _split_bins(exps: tuple[int, ...], weights: list[int], p: int) -> list[tuple[int, ...]]:
    total = sum(e * w for e, w in zip(exps, weights))
    cap = total // p
    bins = [[0] * len(exps) for _ in range(p)]
    room = [cap] * p
    # first fit, heaviest variables first, whole runs of one variable at a time
    for v in sorted((v for v, e in enumerate(exps) if e), key=lambda v: -weights[v]):
        w, left = weights[v], exps[v]
        for b in range(p):
            take = min(left, room[b] // w)
            if take:
                bins[b][v] += take
                room[b] -= take * w
                left -= take
            if not left:
                break
        if left:  # cannot happen for p-power weights
            raise ArithmeticError("monomial does not split into equal-weight groups")
    return [tuple(b) for b in bins]


def _make_plan(polys: Sequence, p: int, weights: list[int]) -> _Plan:
    nvars = len(weights)
    ids: dict[tuple[int, ...], int] = {}
    nodes: list[tuple] = []
    exps_list: list[tuple[int, ...]] = []
    masks: list[int] = []

    def node(exps):
        if exps in ids:
            return ids[exps]
        nz = [(v, e) for v, e in enumerate(exps) if e]
        if len(nz) == 1 and nz[0][1] == 1:
            spec = ("var", nz[0][0])
        else:
            spec = ("mu", tuple(node(b) for b in _split_bins(exps, weights, p)))
        ids[exps] = len(nodes)
        nodes.append(spec)
        exps_list.append(exps)
        masks.append(sum(1 << v for v, e in nz))
        return ids[exps]

    terms = []
    for poly in polys:
        row = []
        for e, c in poly.to_dict().items():
            c = int(c) % p
            if c:
                row.append((c, node(tuple(int(x) for x in e))))
        terms.append(row)
    groups = []
    for row in terms:
        g: dict[int, list[tuple[int, int]]] = {}
        for c, nid in row:
            g.setdefault(masks[nid], []).append((c, nid))
        groups.append(g)
    return _Plan(nvars, weights, terms, nodes, exps_list, groups)


def _sum_plan(p: int, n: int, diff: bool = False) -> _Plan:
    def build():
        polys = (witt_diff_polys if diff else witt_sum_polys)(p, n).sums
        w = [p**i for i in range(n + 1)] * 2
        return _make_plan(polys, p, w)

    return _cached(("plan_diff" if diff else "plan_sum", p, n), build)


def _frob_plan(p: int, n: int) -> _Plan:
    def build():
        polys = frobenius_polys(p, n).sums
        return _make_plan(polys, p, [p**i for i in range(n + 2)])

    return _cached(("plan_frob", p, n), build)


class Evaluator:
    """Evaluates reduced Witt polynomials on carrier elements.

    PolarAlgebra carriers use the mu-bracketing of each monomial; a
    GradedAlgebra carrier uses its binary product instead.
    """

    def __init__(self, carrier: Carrier, verify: bool = False):
        self.carrier = carrier
        self.p = carrier.p
        if verify and isinstance(carrier, PolarAlgebra) and not is_p_polar(carrier):
            raise NotPolarError("carrier fails the p-polarity test; Witt sums would depend on bracketing")

    def run(self, plan: _Plan, values: Sequence[Vec], rows: Sequence[int] | None = None) -> list[Vec]:
        p = self.p
        zero = {v for v, x in enumerate(values) if not x}
        zmask = sum(1 << v for v in zero)
        memo: dict[int, Vec] = {}
        binary = isinstance(self.carrier, GradedAlgebra)

        def ev(nid: int) -> Vec:
            if nid in memo:
                return memo[nid]
            exps = plan.exps[nid]
            if any(exps[v] for v in zero):
                out: Vec = {}
            elif binary:
                out = self._binary(exps, values)
            else:
                spec = plan.nodes[nid]
                if spec[0] == "var":
                    out = values[spec[1]]
                else:
                    parts = [ev(c) for c in spec[1]]
                    out = {} if any(not x for x in parts) else self.carrier.mu_elements(*parts)
            memo[nid] = out
            return out

        result = []
        for m in (range(len(plan.terms)) if rows is None else rows):
            acc: Vec = {}
            for mask, row in plan.groups[m].items():
                if mask & zmask:
                    continue
                for c, nid in row:
                    v = ev(nid)
                    if v:
                        acc = vadd(acc, v, p, c)
            result.append(acc)
        return result

    def _binary(self, exps: tuple[int, ...], values: Sequence[Vec]) -> Vec:
        A = self.carrier
        out = A.one()
        for v, e in enumerate(exps):
            if e:
                out = A.mul(out, A.power(values[v], e))
                if not out:
                    return {}
        return out


# ---------------------------------------------------------------------------
# Witt vectors


@dataclass
class WittVector:
    carrier: Carrier
    degree: int
    entries: list[Vec]

    @property
    def length(self) -> int:
        return len(self.entries) - 1

    @property
    def p(self) -> int:
        return self.carrier.p

    def __post_init__(self):
        p = self.p
        j = self.degree
        if j < 0:
            raise ValidationError("Witt vectors live in nonnegative degrees")
        if p > 2 and j % 2:
            raise ValidationError("Witt vectors of odd degree need p = 2 (no graded-commutative Witt theory)")
        clean = []
        M = self.carrier.module
        for i, e in enumerate(self.entries):
            d = j * p**i
            e = {k: c % p for k, c in e.items() if c % p}
            for k in e:
                if M.degree(k) != d:
                    raise ValidationError(f"entry {i} must lie in degree {d}, got {M.name(k)!r}")
            clean.append(e)
        self.entries = clean

    def __eq__(self, other):
        return (isinstance(other, WittVector) and self.carrier is other.carrier
                and self.degree == other.degree and self.entries == other.entries)

    def is_zero(self) -> bool:
        return not any(self.entries)

    def to_json(self) -> list[dict]:
        M = self.carrier.module
        return [{M.name(k): c for k, c in sorted(e.items())} for e in self.entries]


def zero_vector(carrier: Carrier, degree: int, n: int) -> WittVector:
    return WittVector(carrier, degree, [{} for _ in range(n + 1)])


def _same_shape(u: WittVector, v: WittVector):
    if u.carrier is not v.carrier or u.degree != v.degree or u.length != v.length:
        raise ValidationError("Witt vectors must share carrier, degree and length")


def witt_add(u: WittVector, v: WittVector, verify: bool = False) -> WittVector:
    _same_shape(u, v)
    n, p = u.length, u.p
    plan = _sum_plan(p, n)
    out = Evaluator(u.carrier, verify).run(plan, u.entries + v.entries)
    return WittVector(u.carrier, u.degree, out)


def witt_sub(u: WittVector, v: WittVector, verify: bool = False) -> WittVector:
    _same_shape(u, v)
    if u.p > 2:
        # odd p: -(b_0, b_1, ...) = (-b_0, -b_1, ...) since every ghost power is odd
        neg = WittVector(v.carrier, v.degree, [vscale(e, -1, v.p) for e in v.entries])
        return witt_add(u, neg, verify)
    plan = _sum_plan(u.p, u.length, diff=True)
    out = Evaluator(u.carrier, verify).run(plan, u.entries + v.entries)
    return WittVector(u.carrier, u.degree, out)


def witt_neg(u: WittVector) -> WittVector:
    return witt_sub(zero_vector(u.carrier, u.degree, u.length), u)


def witt_multiple(u: WittVector, k: int) -> WittVector:
    """k*u by double-and-add; negative k allowed."""
    if k < 0:
        return witt_multiple(witt_neg(u), -k)
    result = zero_vector(u.carrier, u.degree, u.length)
    base = u
    while k:
        if k & 1:
            result = witt_add(result, base)
        k >>= 1
        if k:
            base = witt_add(base, base)
    return result


def teichmuller(carrier: Carrier, a: Mapping[int, int], n: int, degree: int | None = None) -> WittVector:
    a = {k: c % carrier.p for k, c in a.items() if c % carrier.p}
    if degree is None:
        degs = {carrier.module.degree(k) for k in a}
        if len(degs) != 1:
            raise ValidationError("teichmuller needs a homogeneous element (or an explicit degree)")
        degree = degs.pop()
    return WittVector(carrier, degree, [dict(a)] + [{} for _ in range(n)])


def verschiebung(v: WittVector) -> WittVector:
    """V(a_0,...,a_n) = (0,a_0,...,a_n), from degree pj to degree j."""
    p = v.p
    if v.degree % p:
        raise ValidationError(f"V maps degree p*j to j; degree {v.degree} is not divisible by {p}")
    return WittVector(v.carrier, v.degree // p, [{}] + [dict(e) for e in v.entries])


def frobenius(v: WittVector) -> WittVector:
    """F: W_{n+1}(A)_j -> W_n(A)_{pj} via the universal Frobenius polynomials."""
    n = v.length - 1
    if n < 0:
        raise ValidationError("Frobenius needs length >= 1 (it shortens the vector)")
    plan = _frob_plan(v.p, n)
    out = Evaluator(v.carrier).run(plan, v.entries)
    return WittVector(v.carrier, v.degree * v.p, out)


def random_witt_vector(carrier: Carrier, degree: int, n: int, rng) -> WittVector:
    p = carrier.p
    M = carrier.module
    entries = []
    for i in range(n + 1):
        idx = M.in_degree(degree * p**i)
        entries.append({k: int(c) for k in idx if (c := int(rng.integers(0, p)))})
    return WittVector(carrier, degree, entries)


def all_witt_vectors(carrier: Carrier, degree: int, n: int):
    import itertools

    p = carrier.p
    M = carrier.module
    slots = [(i, k) for i in range(n + 1) for k in M.in_degree(degree * p**i)]
    for coeffs in itertools.product(range(p), repeat=len(slots)):
        entries = [{} for _ in range(n + 1)]
        for (i, k), c in zip(slots, coeffs):
            if c:
                entries[i][k] = c
        yield WittVector(carrier, degree, entries)


# ---------------------------------------------------------------------------
# Unipotent co-Witt vectors


@dataclass
class CoWittDegree:
    """CW^u(A)_j realized as Witt vectors of length ``length`` in base degree ``base``.

    Entries are ordered (a_{-l}, ..., a_0) with a_{-i} in degree j/p^i.
    """

    degree: int
    base: int
    length: int

    def entry_degrees(self, p: int) -> list[int]:
        return [self.base * p**i for i in range(self.length + 1)]


class CoWitt:
    """The graded group CW^u(A) in degrees <= D with its F and V operators."""

    def __init__(self, carrier: Carrier, n_max: int | None = None, max_degree: int | None = None):
        self.carrier = carrier
        self.p = p = carrier.p
        self.D = carrier.max_degree if max_degree is None else min(max_degree, carrier.max_degree)
        self.n_max = n_max
        M = carrier.module
        self.slots: dict[int, CoWittDegree] = {}
        zero_dim = M.dim(0)
        if zero_dim:
            if n_max is None:
                if not self._degree_zero_nilpotent():
                    raise ValidationError(
                        "degree-0 part has non-nilpotent p-th powers; pass n_max to truncate the colimit")
            else:
                self.slots[0] = CoWittDegree(0, 0, n_max)
        for j in range(1, self.D + 1):
            if p > 2 and j % 2:
                continue
            l, a = 0, j
            while a % p == 0:
                a //= p
                l += 1
            # leading entries in empty degrees are always zero; V is additive, so drop them
            while l and not M.dim(a):
                a, l = a * p, l - 1
            slot = CoWittDegree(j, a, l)
            if any(M.dim(d) for d in slot.entry_degrees(p)):
                self.slots[j] = slot
        self.skipped_degree_zero = bool(zero_dim) and n_max is None

    def _degree_zero_nilpotent(self) -> bool:
        A, M = self.carrier, self.carrier.module
        idx = M.in_degree(0)
        for k in idx:
            x: Vec = {k: 1}
            for _ in range(len(idx) + 1):
                x = self._pth_power(x)
                if not x:
                    break
            if x:
                return False
        return True

    def _pth_power(self, x: Vec) -> Vec:
        A = self.carrier
        if isinstance(A, PolarAlgebra):
            return A.frobenius(x)
        return A.power(x, self.p)

    def degrees(self) -> list[int]:
        return sorted(self.slots)

    def as_witt(self, j: int, entries: Sequence[Vec]) -> WittVector:
        slot = self.slots[j]
        return WittVector(self.carrier, slot.base, [dict(e) for e in entries])

    def zero(self, j: int) -> list[Vec]:
        return [{} for _ in range(self.slots[j].length + 1)]

    def add(self, j: int, x: Sequence[Vec], y: Sequence[Vec]) -> list[Vec]:
        return witt_add(self.as_witt(j, x), self.as_witt(j, y)).entries

    def sub(self, j: int, x: Sequence[Vec], y: Sequence[Vec]) -> list[Vec]:
        return witt_sub(self.as_witt(j, x), self.as_witt(j, y)).entries

    def multiple(self, j: int, x: Sequence[Vec], k: int) -> list[Vec]:
        return witt_multiple(self.as_witt(j, x), k).entries

    def _full(self, j: int, x: Sequence[Vec]) -> list[Vec]:
        """Pad x with the trimmed leading zeros so entries start in degree j/p^v(j)."""
        a, l = j, 0
        while a % self.p == 0:
            a //= self.p
            l += 1
        return [{} for _ in range(l + 1 - len(x))] + [dict(e) for e in x]

    def _trim(self, j: int, full: list[Vec]) -> list[Vec]:
        slot = self.slots[j]
        return full[len(full) - slot.length - 1:]

    def F(self, j: int, x: Sequence[Vec]) -> tuple[int, list[Vec]] | None:
        """F: CW_j -> CW_{pj}; None when pj leaves the computed range."""
        if j == 0:
            return 0, [self._pth_power(e) for e in x]
        pj = self.p * j
        if pj not in self.slots:
            if pj > self.D:
                return None
            return pj, []
        return pj, self._trim(pj, [{}] + [self._pth_power(e) for e in self._full(j, x)])

    def V(self, j: int, x: Sequence[Vec]) -> tuple[int, list[Vec]] | None:
        """V: CW_j -> CW_{j/p}; None when p does not divide j."""
        if j == 0:
            return 0, [{}] + [dict(e) for e in x[:-1]]
        if j % self.p:
            return None
        target = j // self.p
        if target not in self.slots:
            return target, []
        return target, self._trim(target, self._full(j, x)[:-1])

    def elements(self, j: int):
        slot = self.slots[j]
        for w in all_witt_vectors(self.carrier, slot.base, slot.length):
            yield w.entries


def cowitt_u(A: Carrier, n_max: int | None = None, max_degree: int | None = None) -> CoWitt:
    return CoWitt(A, n_max, max_degree)
