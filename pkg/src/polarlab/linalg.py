"""Exact arithmetic: F_p scalars, integer polynomials, dense linear algebra mod p."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p**0.5) + 1))


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"p must be a prime, got {p!r}")
    return p


@dataclass(frozen=True)
class Fp:
    """An element of the prime field F_p."""

    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, Fp):
            if other.p != self.p:
                raise ValueError(f"mixing F_{self.p} and F_{other.p}")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Fp(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Fp(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Fp(o - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else Fp(self.value * o, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return Fp(-self.value, self.p)

    def __pow__(self, e: int):
        return Fp(pow(self.value, e, self.p), self.p)

    def inverse(self) -> Fp:
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return Fp(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * Fp(o, self.p).inverse()

    def __eq__(self, other):
        if isinstance(other, Fp):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return (self.value - other) % self.p == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


def binom_mod_p(m: int, n: int, p: int) -> int:
    """Generalized binomial coefficient m(m-1)...(m-n+1)/n! reduced mod p.

    The top ``m`` may be negative (falling-factorial convention); ``n`` must be
    a natural number.
    """
    if n < 0:
        raise ValueError("binom_mod_p requires n >= 0")
    num = 1
    for t in range(n):
        num *= m - t
        if num == 0:
            return 0
    return (num // factorial(n)) % p


# ---------------------------------------------------------------------------
# Integer polynomials


class IntPoly:
    """Multivariate polynomial with arbitrary-precision integer coefficients.

    ``terms`` maps exponent tuples (aligned with ``variables``) to nonzero ints.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple[int, ...], int] | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != n:
                raise ValueError(f"exponent vector {exps} does not match {n} variables")
            if c:
                clean[exps] = int(c)
        self.terms = clean

    @classmethod
    def gens(cls, variables: Sequence[str]) -> list[IntPoly]:
        n = len(variables)
        out = []
        for i in range(n):
            e = [0] * n
            e[i] = 1
            out.append(cls(variables, {tuple(e): 1}))
        return out

    @classmethod
    def constant(cls, variables: Sequence[str], c: int) -> IntPoly:
        return cls(variables, {(0,) * len(variables): c})

    def _lift(self, other) -> IntPoly:
        if isinstance(other, IntPoly):
            if other.variables != self.variables:
                raise ValueError("polynomials live in different variable sets")
            return other
        if isinstance(other, int):
            return IntPoly.constant(self.variables, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return IntPoly(self.variables, out)

    __radd__ = __add__

    def __neg__(self):
        return IntPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPoly(self.variables, {e: c * other for e, c in self.terms.items()})
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return IntPoly(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = IntPoly.constant(self.variables, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def exact_div(self, d: int) -> IntPoly:
        out = {}
        for e, c in self.terms.items():
            q, r = divmod(c, d)
            if r:
                raise ArithmeticError(f"coefficient {c} of {e} not divisible by {d}")
            out[e] = q
        return IntPoly(self.variables, out)

    def mod(self, p: int) -> IntPoly:
        return IntPoly(self.variables, {e: c % p for e, c in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, int):
            other = IntPoly.constant(self.variables, other)
        if not isinstance(other, IntPoly):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def weighted_degrees(self, weights: Sequence[int]) -> set[int]:
        return {sum(w * e for w, e in zip(weights, exps)) for exps in self.terms}

    def to_flint(self, ctx=None):
        import flint

        if ctx is None:
            ctx = flint.fmpz_mpoly_ctx.get(self.variables, "lex")
        return ctx.from_dict(self.terms)

    @classmethod
    def from_flint(cls, poly) -> IntPoly:
        names = poly.context().names()
        return cls(names, {tuple(int(x) for x in e): int(c) for e, c in poly.to_dict().items()})

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, reverse=True):
            c = self.terms[exps]
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, exps) if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def poly_eval(f: IntPoly, assignment: Mapping[str, Any], one: Any = None) -> Any:
    """Evaluate ``f`` by substituting ring elements for its variables.

    The target ring only needs ``+``, ``*``, integer scaling and ``**``.
    Integer coefficients are pushed in via ``coef * value``, so reduction
    through the target characteristic happens in the target ring.
    """
    missing = [v for v in f.variables if v not in assignment]
    used = {v for exps in f.terms for v, e in zip(f.variables, exps) if e}
    unassigned = sorted(used & set(missing))
    if unassigned:
        raise KeyError(f"unassigned variables: {unassigned}")
    values = [assignment.get(v) for v in f.variables]
    total = None
    for exps, c in f.terms.items():
        term = None
        for v, e in zip(values, exps):
            if e:
                factor = v**e
                term = factor if term is None else term * factor
        if term is None:
            if one is None:
                raise ValueError("constant term needs the target ring's unit via `one`")
            term = one
        term = c * term
        total = term if total is None else total + term
    if total is None:
        return 0 * (one if one is not None else next(iter(assignment.values())))
    return total


# ---------------------------------------------------------------------------
# Dense linear algebra over F_p


def as_matrix(rows, p: int, cols: int | None = None) -> np.ndarray:
    m = np.array(rows, dtype=np.int64)
    if m.ndim == 1:
        m = m.reshape(0 if m.size == 0 else 1, -1)
    if m.size == 0 and cols is not None:
        m = m.reshape(m.shape[0] if m.ndim == 2 else 0, cols)
    return m % p


def rref(m: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p and the pivot columns."""
    a = np.array(m, dtype=np.int64) % p
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        nzr = np.nonzero(col)[0]
        if nzr.size:
            a[nzr] = (a[nzr] - np.outer(col[nzr], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(m: np.ndarray, p: int) -> int:
    if m.size == 0:
        return 0
    return len(rref(m, p)[1])


def rank_kernel(m: np.ndarray, p: int) -> tuple[int, list[list[int]]]:
    """Rank of ``m`` and a basis of its right kernel {v : m v = 0} over F_p."""
    m = np.asarray(m, dtype=np.int64)
    cols = m.shape[1]
    if m.shape[0] == 0:
        basis = []
        for i in range(cols):
            v = [0] * cols
            v[i] = 1
            basis.append(v)
        return 0, basis
    red, pivots = rref(m, p)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [0] * cols
        v[f] = 1
        for row, pc in enumerate(pivots):
            v[pc] = int(-red[row, f]) % p
        basis.append(v)
    return len(pivots), basis


class RowSpace:
    """Incrementally maintained row space over F_p, kept in reduced echelon form.

    Used for quotient computations: ``reduce`` returns the canonical
    representative of a vector modulo the span.
    """

    def __init__(self, dim: int, p: int):
        self.dim = dim
        self.p = p
        self.rows: dict[int, np.ndarray] = {}  # pivot column -> row with 1 at pivot

    def reduce(self, v) -> np.ndarray:
        v = np.array(v, dtype=np.int64) % self.p
        for c, row in self.rows.items():
            if v[c]:
                v = (v - v[c] * row) % self.p
        return v

    def add(self, v) -> bool:
        v = self.reduce(v)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        c = int(nz[0])
        v = (v * pow(int(v[c]), -1, self.p)) % self.p
        for k, row in self.rows.items():
            if row[c]:
                self.rows[k] = (row - row[c] * v) % self.p
        self.rows[c] = v
        return True

    def __len__(self):
        return len(self.rows)

    @property
    def pivots(self) -> list[int]:
        return sorted(self.rows)


def solve(m: np.ndarray, b, p: int) -> list[int] | None:
    """One solution x of m x = b over F_p, or None when inconsistent."""
    m = np.asarray(m, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1) % p
    aug = np.hstack([m, b])
    red, pivots = rref(aug, p)
    cols = m.shape[1]
    if cols in pivots:
        return None
    x = [0] * cols
    for row, c in enumerate(pivots):
        x[c] = int(red[row, cols])
    return x


def matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % p


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def random_invertible(n: int, p: int, rng) -> np.ndarray:
    while True:
        m = rng.integers(0, p, size=(n, n))
        if rank(m, p) == n:
            return m


def multisets(items: Sequence[Any], k: int) -> Iterable[tuple]:
    return itertools.combinations_with_replacement(items, k)


class SparseEchelon:
    """Span of sparse F_p-vectors (dicts column -> coef) in echelon form.

    Each stored row has its smallest column as pivot with coefficient 1, so
    the columns listed first are the ones eliminated by ``reduce``.
    """

    def __init__(self, p: int):
        self.p = p
        self.rows: dict[int, dict[int, int]] = {}

    def reduce(self, v: Mapping[int, int]) -> dict[int, int]:
        import heapq

        p = self.p
        v = {k: c % p for k, c in v.items() if c % p}
        heap = [k for k in v if k in self.rows]
        heapq.heapify(heap)
        while heap:
            c = heapq.heappop(heap)
            coef = v.get(c)
            if not coef:
                continue
            for k, r in self.rows[c].items():
                val = (v.get(k, 0) - coef * r) % p
                if val:
                    if k not in v and k in self.rows:
                        heapq.heappush(heap, k)
                    v[k] = val
                else:
                    v.pop(k, None)
        return v

    def add(self, v: Mapping[int, int]) -> bool:
        v = self.reduce(v)
        if not v:
            return False
        c = min(v)
        inv = pow(v[c], -1, self.p)
        self.rows[c] = {k: (x * inv) % self.p for k, x in v.items()}
        return True

    def __len__(self):
        return len(self.rows)

    def __contains__(self, v) -> bool:
        return not self.reduce(v)


# ---------------------------------------------------------------------------
# Integer Smith normal form


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return (D, U, W) with U*m*W = D diagonal, U and W unimodular, d_i | d_{i+1}.

    Entries are Python ints; diagonal entries are nonnegative.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    a = [[int(x) for x in r] for r in m]
    U = [[int(i == j) for j in range(rows)] for i in range(rows)]
    W = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in W:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, c):  # row dst += c * row src
        if c:
            a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
            U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        if c:
            for r in a:
                r[dst] += c * r[src]
            for r in W:
                r[dst] += c * r[src]

    t = 0
    while t < min(rows, cols):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        done = False
        while not done:
            done = True
            for i in range(t + 1, rows):
                q = a[i][t] // a[t][t]
                add_row(t, i, -q)
                if a[i][t]:
                    swap_rows(t, i)
                    done = False
            for j in range(t + 1, cols):
                q = a[t][j] // a[t][t]
                add_col(t, j, -q)
                if a[t][j]:
                    swap_cols(t, j)
                    done = False
            if done:
                # enforce divisibility of the rest of the block
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if a[i][j] % a[t][t]:
                            add_row(i, t, 1)
                            done = False
                            break
                    if not done:
                        break
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return a, U, W


def int_matrix_inverse(m: Sequence[Sequence[int]]) -> list[list[int]]:
    """Inverse of a unimodular integer matrix."""
    from fractions import Fraction

    n = len(m)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(m)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    out = [[x for x in r[n:]] for r in a]
    if any(x.denominator != 1 for r in out for x in r):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in r] for r in out]


def int_matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> list[list[int]]:
    inner = len(b)
    cols = len(b[0]) if inner else 0
    return [[sum(r[k] * b[k][j] for k in range(inner)) for j in range(cols)] for r in a]
