"""Dyer-Lashof words at odd primes: degrees, Adem normal forms, instability,
Cartan expansion below the top operation, admissible bases.

A word is a tuple of (eps, r) pairs, outermost first: ((1, 3), (0, 2)) is
bQ^3 Q^2, applied to the generator right to left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping, Sequence

from .graded import GradedAlgebra, ValidationError, Vec
from .linalg import check_prime

Op = tuple[int, int]
Word = tuple[Op, ...]

INF = None  # loop parameter n = infinity


def std_binom(n: int, k: int, p: int) -> int:
    """C(n, k) mod p with C(n, k) = 0 unless 0 <= k <= n."""
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k) % p


@dataclass(frozen=True, order=True)
class DLMonomial:
    word: Word
    gen: str
    q: int  # degree of the generator

    def degrees(self, p: int) -> list[int]:
        """Degrees after each operation, innermost first (starting with q)."""
        out = [self.q]
        for eps, r in reversed(self.word):
            out.append(out[-1] + 2 * r * (p - 1) - eps)
        return out

    def degree(self, p: int) -> int:
        return self.degrees(p)[-1]

    def in_range(self, p: int, n: int | None) -> bool:
        """Every op satisfies 2r <= (current degree) + n (and r >= 1 under b)."""
        ds = self.degrees(p)
        for (eps, r), d in zip(reversed(self.word), ds):
            if r < 0 or (eps and r < 1):
                return False
            if n is not None and 2 * r > d + n:
                return False
        return True

    def text(self) -> str:
        ops = " ".join(("bQ^" if e else "Q^") + str(r) for e, r in self.word)
        return f"{ops} {self.gen}".strip()


def dl_degree(m: DLMonomial, p: int, n: int | None = INF) -> dict:
    return {"degree": m.degree(p), "in_range": m.in_range(p, n)}


@dataclass
class DLExpression:
    p: int
    terms: dict[DLMonomial, int] = field(default_factory=dict)
    n: int | None = INF

    def __post_init__(self):
        if self.p == 2:
            raise ValidationError("the Dyer-Lashof engine covers odd primes only")
        check_prime(self.p)
        self.terms = {m: c % self.p for m, c in self.terms.items() if c % self.p}

    def add(self, m: DLMonomial, c: int) -> None:
        v = (self.terms.get(m, 0) + c) % self.p
        if v:
            self.terms[m] = v
        else:
            self.terms.pop(m, None)

    def sorted_terms(self) -> list[tuple[DLMonomial, int]]:
        return sorted(self.terms.items())

    def degrees(self) -> set[int]:
        return {m.degree(self.p) for m in self.terms}

    def __eq__(self, other):
        return isinstance(other, DLExpression) and self.p == other.p and self.terms == other.terms

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": "inf" if self.n is None else self.n,
            "terms": [{"coef": c, "word": m.text(), "ops": [list(o) for o in m.word],
                       "generator": m.gen, "degree": m.degree(self.p)}
                      for m, c in self.sorted_terms()],
        }

    def text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(m.text() if c == 1 else f"{c}*({m.text()})" for m, c in self.sorted_terms())


_TOKEN = re.compile(r"^(?:(?:b|β)(?:\^([01]))?)?Q\^(\d+)$")
_BETA = re.compile(r"^(?:b|β)(?:\^([01]))?$")


def parse_word(text: str) -> Word:
    """'bQ^3 Q^1', 'b^1 Q^3 Q^1' or 'βQ^3 Q^1' (outermost first)."""
    ops: list[Op] = []
    pending = None
    for tok in text.split():
        mb = _BETA.match(tok)
        if mb:
            if pending is not None:
                raise ValidationError(f"two Bocksteins in a row before {tok!r}")
            pending = 1 if mb.group(1) in (None, "1") else 0
            continue
        mq = _TOKEN.match(tok)
        if not mq:
            raise ValidationError(f"cannot parse operation {tok!r}")
        eps = 1 if tok[0] in "bβ" and not tok.startswith(("b^0", "β^0")) else 0
        if pending is not None:
            if tok[0] in "bβ":
                raise ValidationError(f"two Bocksteins in a row at {tok!r}")
            eps = pending
            pending = None
        ops.append((eps, int(mq.group(2))))
    if pending is not None:
        raise ValidationError("dangling Bockstein")
    return tuple(ops)


# ---------------------------------------------------------------------------
# Adem relations


def admissible_pair(outer: Op, inner: Op, p: int) -> bool:
    """Q^r (b^e Q^s): admissible iff r <= ps - e."""
    return outer[1] <= p * inner[1] - inner[0]


def is_admissible(word: Word, p: int) -> bool:
    return all(admissible_pair(word[k], word[k + 1], p) for k in range(len(word) - 1))


def adem_pair(outer: Op, inner: Op, p: int, signs: str = "clm") -> dict[tuple[Op, Op], int]:
    """Rewrite one inadmissible pair b^e Q^r b^f Q^s as a combination of pairs."""
    (e, r), (f, s) = outer, inner

    def sgn(i):
        if signs == "none":
            return 1
        return -1 if (r + i) % 2 else 1

    out: dict[tuple[Op, Op], int] = {}

    def put(a: Op, b: Op, c: int):
        if a[0] > 1 or a[1] < 0 or b[1] < 0:
            return
        v = (out.get((a, b), 0) + c) % p
        if v:
            out[(a, b)] = v
        else:
            out.pop((a, b), None)

    if f == 0:
        if r <= p * s:
            raise ValueError("pair is admissible")
        for i in range(0, r + s + 1):
            c = std_binom((p - 1) * (i - s) - 1, p * i - r, p)
            if c:
                put((e, r + s - i), (0, i), sgn(i) * c)
    else:
        if r < p * s:
            raise ValueError("pair is admissible")
        for i in range(0, r + s + 1):
            if e == 0:
                c = std_binom((p - 1) * (i - s), p * i - r, p)
                if c:
                    put((1, r + s - i), (0, i), sgn(i) * c)
            c = std_binom((p - 1) * (i - s) - 1, p * i - r - 1, p)
            if c:
                put((e, r + s - i), (1, i), -sgn(i) * c)
    return out


def _first_bad(word: Word, p: int, strategy: str) -> int | None:
    idx = range(len(word) - 1)
    if strategy == "rightmost":
        idx = reversed(idx)
    for k in idx:
        if not admissible_pair(word[k], word[k + 1], p):
            return k
    return None


def adem_rewrite(expr: DLExpression, strategy: str = "leftmost", signs: str = "clm",
                 max_steps: int = 1_000_000) -> DLExpression:
    """Normal form: apply Adem relations to inadmissible adjacent pairs until none remain."""
    p = expr.p
    if strategy not in ("leftmost", "rightmost"):
        raise ValidationError(f"unknown strategy {strategy!r}")
    done = DLExpression(p, {}, expr.n)
    todo = dict(expr.terms)
    steps = 0
    while todo:
        m, c = todo.popitem()
        k = _first_bad(m.word, p, strategy)
        if k is None:
            done.add(m, c)
            continue
        steps += 1
        if steps > max_steps:
            raise RuntimeError("Adem rewriting did not terminate within the step budget")
        for (a, b), d in adem_pair(m.word[k], m.word[k + 1], p, signs).items():
            w = m.word[:k] + (a, b) + m.word[k + 2:]
            nm = DLMonomial(w, m.gen, m.q)
            v = (todo.get(nm, 0) + c * d) % p
            if v:
                todo[nm] = v
            else:
                todo.pop(nm, None)
    return done


# ---------------------------------------------------------------------------
# Instability


def _unstable_position(m: DLMonomial, p: int) -> tuple[int, str] | None:
    """Position (index from the outside) of an op killed by instability, else of the
    innermost op sitting exactly on the line (a p-th power), else None."""
    ds = m.degrees(p)
    L = len(m.word)
    power = None
    for t, ((eps, r), d) in enumerate(zip(reversed(m.word), ds)):
        k = L - 1 - t
        if 2 * r < d or (eps == 1 and 2 * r == d):
            return k, "zero"
        if eps == 0 and 2 * r == d and power is None:
            power = k
    return (power, "power") if power is not None else None


def apply_instability(expr: DLExpression, A: GradedAlgebra | None = None) -> DLExpression:
    """Zero operations below the instability line; when A is given and the generator
    names a basis element of A, an op exactly on the line becomes the p-th power in A and
    the rest of the word acts on (the basis expansion of) that power."""
    p = expr.p
    out = DLExpression(p, {}, expr.n)
    todo = dict(expr.terms)
    while todo:
        m, c = todo.popitem()
        pos = _unstable_position(m, p)
        if pos is None:
            out.add(m, c)
            continue
        k, kind = pos
        if kind == "zero":
            continue
        if A is None:
            out.add(m, c)
            continue
        # innermost Q^r with 2r = |x| where x is the class under it
        inner = DLMonomial(m.word[k + 1:], m.gen, m.q)
        if inner.word:
            # the class below is itself a DL word: keep symbolic
            out.add(m, c)
            continue
        x = A.module.index(m.gen)
        power = A.power({x: 1}, p)
        rest = m.word[:k]
        if len(power) > 1 and rest:
            top = rest[-1]
            if expr.n is not None and 2 * top[1] == A.degree(x) * p + expr.n:
                raise ValidationError("the top operation is not additive; out of scope")
        for b, cb in power.items():
            nm = DLMonomial(rest, A.module.name(b), A.degree(b))
            v = (todo.get(nm, 0) + c * cb) % p
            if v:
                todo[nm] = v
            else:
                todo.pop(nm, None)
    return out


# ---------------------------------------------------------------------------
# Cartan formula


@dataclass(frozen=True)
class Bound:
    """A named class of a given degree; the unit is Bound('1', 0)."""

    name: str
    degree: int


def _op_value(x: Bound, eps: int, r: int, p: int) -> DLMonomial | str | None:
    """b^eps Q^r x after instability: None (zero), 'power', 'unit' or a monomial."""
    if x.name == "1":
        return "unit" if (r == 0 and eps == 0) else None
    if eps == 0 and 2 * r < x.degree:
        return None
    if eps == 1 and 2 * r <= x.degree:
        return None
    if eps == 0 and 2 * r == x.degree:
        return "power"
    return DLMonomial(((eps, r),), x.name, x.degree)


def cartan_expand(x: Bound, y: Bound, r: int, p: int, beta: bool = False,
                  n: int | None = INF) -> list[dict]:
    """Q^r(xy) = sum Q^i x Q^j y and bQ^r(xy) = sum (bQ^i x Q^j y + Q^i x bQ^j y) in the
    stable range 2r < |xy| + n. Terms: {"coef", "left", "right", "degree"} with factors
    given as words, 'x^p' for p-th powers or '1'."""
    if p == 2:
        raise ValidationError("the Dyer-Lashof engine covers odd primes only")
    q = x.degree + y.degree
    if n is not None and 2 * r >= q + n:
        raise ValidationError("top operation 2r = q + n needs the Gamma correction term: out of scope")
    if beta and r < 1:
        raise ValidationError("bQ^r needs r >= 1")
    pairs = []
    for i in range(r + 1):
        j = r - i
        if beta:
            pairs += [((1, i), (0, j)), ((0, i), (1, j))]
        else:
            pairs.append(((0, i), (0, j)))
    out: dict[tuple[str, str], int] = {}
    degs: dict[tuple[str, str], int] = {}

    def render(b: Bound, eps: int, s: int):
        v = _op_value(b, eps, s, p)
        if v is None:
            return None
        if v == "unit":
            return "1", 0
        if v == "power":
            return f"{b.name}^{p}", p * b.degree
        return v.text(), v.degree(p)

    for (e1, i), (e2, j) in pairs:
        a = render(x, e1, i)
        b = render(y, e2, j)
        if a is None or b is None:
            continue
        key = (a[0], b[0])
        out[key] = (out.get(key, 0) + 1) % p
        degs[key] = a[1] + b[1]
    return [{"coef": c, "left": k[0], "right": k[1], "degree": degs[k]}
            for k, c in sorted(out.items()) if c]


# ---------------------------------------------------------------------------
# Admissible basis


def _allowed(eps: int, r: int, d: int, n: int | None) -> bool:
    if eps == 1 and r < 1:
        return False
    if 2 * r <= d:  # killed (below the line) or a p-th power (on it)
        return False
    return n is None or 2 * r <= d + n


def admissible_basis(q: int, n: int | None, p: int, Dmax: int) -> tuple[list[DLMonomial], dict[int, int]]:
    """Admissible words b^e1 Q^r1 ... b^ek Q^rk x with 2r > (degree acted on), inside the
    range 2r <= degree + n, of degree <= Dmax. Returns the words and degree -> count."""
    check_prime(p)
    if p == 2:
        raise ValidationError("the Dyer-Lashof engine covers odd primes only")
    out: list[DLMonomial] = []

    def grow(word: Word, d: int):
        out.append(DLMonomial(word, "x", q))
        inner = word[0] if word else None
        r = 0
        while True:
            for eps in (0, 1):
                nd = d + 2 * r * (p - 1) - eps
                if nd > Dmax:
                    continue
                if not _allowed(eps, r, d, n):
                    continue
                if inner is not None and not admissible_pair((eps, r), inner, p):
                    continue
                grow(((eps, r),) + word, nd)
            r += 1
            if d + 2 * r * (p - 1) - 1 > Dmax:
                break

    if q <= Dmax:
        grow((), q)
    out = sorted(set(out), key=lambda m: (m.degree(p), len(m.word), m.word))
    series: dict[int, int] = {}
    for m in out:
        series[m.degree(p)] = series.get(m.degree(p), 0) + 1
    return out, dict(sorted(series.items()))


def monomial(text: str, gen: str = "x", q: int = 0) -> DLMonomial:
    return DLMonomial(parse_word(text), gen, q)


def expression(p: int, terms: Iterable[tuple[DLMonomial, int]] | Mapping[DLMonomial, int],
               n: int | None = INF) -> DLExpression:
    items = terms.items() if isinstance(terms, Mapping) else terms
    e = DLExpression(p, {}, n)
    for m, c in items:
        e.add(m, c)
    return e
