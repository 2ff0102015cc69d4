"""Finite graded Dieudonné modules over F_p: abelian p-groups with F and V.

Each degree n carries Z/p^{e_1} + ... + Z/p^{e_r}. Maps are integer
matrices whose column k is the image of the k-th cyclic generator.
F at degree n maps M_n -> M_{pn}; V at degree n maps M_{pn} -> M_n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .graded import ValidationError, Vec
from .linalg import check_prime, int_matmul, int_matrix_inverse, smith_normal_form
from .witt import CoWitt, Carrier, WittVector, cowitt_u, witt_add, witt_multiple, witt_sub

Matrix = list[list[int]]


def _zeros(r: int, c: int) -> Matrix:
    return [[0] * c for _ in range(r)]


@dataclass
class DieudonneModule:
    p: int
    exponents: dict[int, list[int]]  # degree -> [e_1, ..., e_r] with orders p^e
    F: dict[int, Matrix] = field(default_factory=dict)
    V: dict[int, Matrix] = field(default_factory=dict)
    max_degree: int | None = None

    def __post_init__(self):
        check_prime(self.p)
        self.exponents = {int(n): [int(e) for e in es] for n, es in self.exponents.items() if es}
        for n, es in self.exponents.items():
            if n < 0:
                raise ValidationError("Dieudonné modules are nonnegatively graded")
            if any(e < 1 for e in es):
                raise ValidationError(f"degree {n}: cyclic orders must be p^e with e >= 1")
        self.F = {int(n): [list(map(int, r)) for r in m] for n, m in self.F.items()}
        self.V = {int(n): [list(map(int, r)) for r in m] for n, m in self.V.items()}

    # shapes -----------------------------------------------------------
    def rank(self, n: int) -> int:
        return len(self.exponents.get(n, []))

    def orders(self, n: int) -> list[int]:
        return [self.p**e for e in self.exponents.get(n, [])]

    def order(self, n: int) -> int:
        out = 1
        for o in self.orders(n):
            out *= o
        return out

    def total_order(self) -> int:
        out = 1
        for n in self.exponents:
            out *= self.order(n)
        return out

    def degrees(self) -> list[int]:
        return sorted(self.exponents)

    def in_range(self, n: int) -> bool:
        return self.max_degree is None or n <= self.max_degree

    def f_matrix(self, n: int) -> Matrix | None:
        """F: M_n -> M_{pn}; None if pn is beyond the truncation."""
        target = self.p * n
        if not self.in_range(target):
            return None
        m = self.F.get(n)
        if m is None or not m:
            return _zeros(self.rank(target), self.rank(n))
        return m

    def v_matrix(self, n: int) -> Matrix | None:
        """V: M_{pn} -> M_n; None if pn is beyond the truncation."""
        source = self.p * n
        if not self.in_range(source):
            return None
        m = self.V.get(n)
        if m is None or not m:
            return _zeros(self.rank(n), self.rank(source))
        return m

    def reduce(self, n: int, vec: Sequence[int]) -> list[int]:
        return [int(x) % o for x, o in zip(vec, self.orders(n))]

    def apply(self, m: Matrix, target: int, vec: Sequence[int]) -> list[int]:
        out = [sum(r[k] * vec[k] for k in range(len(vec))) for r in m]
        return self.reduce(target, out)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"p": self.p, "degrees": {}}
        if self.max_degree is not None:
            out["max_degree"] = self.max_degree
        for n in sorted(set(self.exponents) | set(self.F) | set(self.V)):
            entry: dict[str, Any] = {"orders": self.orders(n)}
            if n in self.F and self.F[n] and any(any(r) for r in self.F[n]):
                entry["F"] = self.F[n]
            if n in self.V and self.V[n] and any(any(r) for r in self.V[n]):
                entry["V"] = self.V[n]
            out["degrees"][str(n)] = entry
        return out


def _exponent_of(order: int, p: int) -> int:
    e = 0
    while order % p == 0:
        order //= p
        e += 1
    if order != 1:
        raise ValidationError(f"cyclic order must be a power of p, got {order * p**e}")
    return e


def module_from_json(data: Mapping[str, Any], p: int | None = None) -> DieudonneModule:
    """Accepts {"p", "max_degree"?, "degrees": {...}} or the bare degree map plus p."""
    if "degrees" in data:
        p = data.get("p", p)
        p = None if p is None else int(p)
        D = data.get("max_degree")
        body = data["degrees"]
    else:
        body = {k: v for k, v in data.items() if k not in ("p", "max_degree")}
        p = int(data.get("p", p)) if (p or "p" in data) else None
        D = data.get("max_degree")
    if p is None:
        raise ValidationError("Dieudonné module JSON needs p")
    exps, F, V = {}, {}, {}
    for key, entry in body.items():
        try:
            n = int(key)
        except ValueError:
            raise ValidationError(f"degree key {key!r} is not an integer") from None
        exps[n] = [_exponent_of(int(o), p) for o in entry.get("orders", []) if int(o) != 1]
        if "F" in entry:
            F[n] = entry["F"]
        if "V" in entry:
            V[n] = entry["V"]
    M = DieudonneModule(p, exps, F, V, D if D is None else int(D))
    for n, m in list(M.F.items()):
        _check_shape(M, m, M.rank(p * n), M.rank(n), f"F at degree {n}")
    for n, m in list(M.V.items()):
        _check_shape(M, m, M.rank(n), M.rank(p * n), f"V at degree {n}")
    return M


def _check_shape(M, m, rows, cols, what):
    if rows == 0 or cols == 0:
        if any(any(r) for r in m):
            raise ValidationError(f"{what}: nonzero matrix between a zero group")
        return
    if len(m) != rows or any(len(r) != cols for r in m):
        raise ValidationError(f"{what}: expected a {rows}x{cols} matrix")


# ---------------------------------------------------------------------------
# Validity


def _compose(M: DieudonneModule, outer: Matrix, inner: Matrix, target: int) -> Matrix:
    prod = int_matmul(outer, inner) if outer and inner else _zeros(len(outer), len(inner[0]) if inner else 0)
    orders = M.orders(target)
    return [[x % orders[i] for x in row] for i, row in enumerate(prod)]


def _is_scalar(M: DieudonneModule, m: Matrix, n: int, c: int) -> bool:
    orders = M.orders(n)
    for i, row in enumerate(m):
        for j, x in enumerate(row):
            if (x - (c if i == j else 0)) % orders[i]:
                return False
    return True


def check_dieudonne(M: DieudonneModule) -> list[dict]:
    """Well-definedness, FV = p, VF = p, and V nilpotent on degree 0."""
    p = M.p
    report: list[dict] = []
    degrees = sorted(set(M.exponents) | {p * n for n in M.exponents if M.in_range(p * n)})
    for n in M.degrees():
        for name, m, src, dst in (("F", M.f_matrix(n), n, p * n), ("V", M.v_matrix(n), p * n, n)):
            if m is None:
                continue
            src_orders, dst_orders = M.orders(src), M.orders(dst)
            for k, o in enumerate(src_orders):
                if any((o * m[i][k]) % dst_orders[i] for i in range(len(dst_orders))):
                    report.append({"kind": "ill_defined", "map": name, "degree": n, "generator": k})
    for n in degrees:
        Fm, Vm = M.f_matrix(n), M.v_matrix(n)
        if Fm is None or Vm is None:
            continue
        if M.rank(n):
            if not _is_scalar(M, _compose(M, Vm, Fm, n), n, p):
                report.append({"kind": "VF", "degree": n, "detail": "V∘F != p on M_n"})
        if M.rank(p * n):
            if not _is_scalar(M, _compose(M, Fm, Vm, p * n), p * n, p):
                report.append({"kind": "FV", "degree": p * n, "detail": "F∘V != p on M_pn"})
    if M.rank(0):
        Vm = M.v_matrix(0)
        power = [[int(i == j) for j in range(M.rank(0))] for i in range(M.rank(0))]
        for _ in range(sum(M.exponents[0]) + 1):
            power = _compose(M, Vm, power, 0)
        if any(any(r) for r in power):
            report.append({"kind": "unipotence", "degree": 0, "detail": "V is not nilpotent on M_0"})
    return report


# ---------------------------------------------------------------------------
# Co-Witt vectors as a Dieudonné module


@dataclass
class _DegreeData:
    j: int
    gens: list[tuple[int, int]]  # (level i, basis index g) for generator V^i[g]
    exps: list[int]
    W: Matrix  # x-coordinates (row vector) times W gives cyclic coordinates
    gen_x: list[list[int]]  # x-coordinates of each cyclic generator (rows of W^{-1})
    keep: list[int]  # SNF positions with nontrivial order


class _CoWittPresenter:
    def __init__(self, cw: CoWitt):
        self.cw = cw
        self.p = cw.p
        self.carrier = cw.carrier
        self.data: dict[int, _DegreeData] = {}

    def _basis_vector(self, j: int, i: int, g: int) -> list[Vec]:
        x = self.cw.zero(j)
        x[i] = {g: 1}
        return x

    def peel(self, j: int, x: Sequence[Vec], gens: list[tuple[int, int]]) -> list[int]:
        """Digits c with x = sum c_{i,g} V^i[g] (levels counted from the deepest entry)."""
        pos = {ig: k for k, ig in enumerate(gens)}
        coords = [0] * len(gens)
        cur = [dict(e) for e in x]
        for i in range(len(cur)):
            entry = cur[i]
            for g, c in sorted(entry.items()):
                coords[pos[(i, g)]] = c
                cur = self.cw.sub(j, cur, self.cw.multiple(j, self._basis_vector(j, i, g), c))
            if cur[i]:
                raise ArithmeticError("peeling failed to clear an entry")
        return coords

    def element(self, j: int, xcoords: Sequence[int]) -> list[Vec]:
        d = self.data[j]
        acc = self.cw.zero(j)
        for (i, g), c in zip(d.gens, xcoords):
            if c:
                acc = self.cw.add(j, acc, self.cw.multiple(j, self._basis_vector(j, i, g), c))
        return acc

    def degree_data(self, j: int) -> _DegreeData:
        if j in self.data:
            return self.data[j]
        p, cw = self.p, self.cw
        slot = cw.slots[j]
        M = self.carrier.module
        gens = [(i, g) for i, d in enumerate(slot.entry_degrees(p)) for g in M.in_degree(d)]
        N = len(gens)
        rel = _zeros(N, N)
        for r, (i, g) in enumerate(gens):
            rel[r][r] = p
            if i + 1 <= slot.length:
                fg = cw._pth_power({g: 1})
                y = cw.zero(j)
                y[i + 1] = fg
                # p*V^i[g] = V^{i+1}[g^p]
                digits = self.peel(j, y, gens)
                for k, c in enumerate(digits):
                    rel[r][k] -= c
        if N:
            D, U, W = smith_normal_form(rel)
            Winv = int_matrix_inverse(W)
            diag = [D[k][k] for k in range(N)]
        else:
            W, Winv, diag = [], [], []
        keep = [k for k, d in enumerate(diag) if abs(d) != 1]
        exps = [_exponent_of(abs(diag[k]), p) for k in keep]
        dd = _DegreeData(j, gens, exps, W, [Winv[k] for k in keep], keep)
        self.data[j] = dd
        return dd

    def cyclic_coords(self, j: int, x: Sequence[Vec]) -> list[int]:
        d = self.degree_data(j)
        if not d.keep:
            return []
        xc = self.peel(j, x, d.gens)
        full = [sum(xc[r] * d.W[r][k] for r in range(len(xc))) for k in range(len(xc))]
        return [full[k] % self.p**e for k, e in zip(d.keep, d.exps)]


def cowitt_dieudonne(A: Carrier, n_max: int | None = None, max_degree: int | None = None) -> DieudonneModule:
    """CW^u(A) with its Frobenius and Verschiebung, as a Dieudonné module."""
    cw = cowitt_u(A, n_max, max_degree)
    pres = _CoWittPresenter(cw)
    p = cw.p
    exps: dict[int, list[int]] = {}
    for j in cw.degrees():
        d = pres.degree_data(j)
        if d.exps:
            exps[j] = d.exps
    Fm: dict[int, Matrix] = {}
    Vm: dict[int, Matrix] = {}
    for j in exps:
        d = pres.degree_data(j)
        gens_elems = [pres.element(j, gx) for gx in d.gen_x]
        res = [cw.F(j, x) for x in gens_elems]
        if res and res[0] is not None and res[0][0] in exps:
            t = res[0][0]
            cols = [pres.cyclic_coords(t, y) for _, y in res]
            Fm[j] = [[cols[c][r] for c in range(len(cols))] for r in range(len(exps[t]))]
    for j in exps:
        src = p * j if j else 0
        if src not in exps or (j and src > cw.D):
            continue
        d = pres.degree_data(src)
        gens_elems = [pres.element(src, gx) for gx in d.gen_x]
        res = [cw.V(src, x) for x in gens_elems]
        cols = [pres.cyclic_coords(j, y) for _, y in res]
        Vm[j] = [[cols[c][r] for c in range(len(cols))] for r in range(len(exps[j]))]
    return DieudonneModule(p, exps, Fm, Vm, cw.D)


# ---------------------------------------------------------------------------
# Invariants and isomorphism testing


def _words(L: int):
    for n in range(1, L + 1):
        yield from ("".join(w) for w in itertools.product("FV", repeat=n))


def word_map(M: DieudonneModule, word: str, n: int) -> tuple[int, Matrix] | None:
    """The composite map of a word (rightmost letter applied first) starting in degree n."""
    p = M.p
    cur = n
    mat = [[int(i == j) for j in range(M.rank(n))] for i in range(M.rank(n))]
    for letter in reversed(word):
        if letter == "F":
            m = M.f_matrix(cur)
            nxt = p * cur
        else:
            if cur % p and cur:
                return None
            nxt = cur // p
            m = M.v_matrix(nxt)
        if m is None:
            return None
        if not M.rank(cur) or not M.rank(nxt):
            mat = _zeros(M.rank(nxt), M.rank(n))
        else:
            mat = _compose(M, m, mat, nxt) if mat and mat[0] else _zeros(M.rank(nxt), M.rank(n))
        cur = nxt
    return cur, mat


def image_order(M: DieudonneModule, target: int, mat: Matrix) -> int:
    orders = M.orders(target)
    if not orders:
        return 1
    cols = len(mat[0]) if mat else 0
    aug = [list(mat[i]) + [orders[i] if k == i else 0 for k in range(len(orders))] for i in range(len(orders))]
    D, _, _ = smith_normal_form(aug)
    quotient = 1
    for i in range(len(orders)):
        quotient *= abs(D[i][i])
    del cols
    return M.order(target) // quotient


def fingerprint(M: DieudonneModule, L: int = 3) -> dict[str, Any]:
    """Orders of images and kernels of all {F,V}-words of length <= L, per degree."""
    if L < 1:
        raise ValueError("fingerprint needs L >= 1")
    table: dict[str, Any] = {"orders": {str(n): M.orders(n) for n in M.degrees()}, "words": {}}
    for n in M.degrees():
        for w in _words(L):
            res = word_map(M, w, n)
            if res is None:
                continue
            target, mat = res
            im = image_order(M, target, mat)
            table["words"][f"{w}@{n}"] = {"image": im, "kernel": M.order(n) // im}
    return table


def fingerprint_diff(a: dict, b: dict) -> list[str]:
    rows = []
    if a["orders"] != b["orders"]:
        for n in sorted(set(a["orders"]) | set(b["orders"]), key=int):
            if a["orders"].get(n) != b["orders"].get(n):
                rows.append(f"orders@{n}")
    for key in sorted(set(a["words"]) | set(b["words"])):
        if a["words"].get(key) != b["words"].get(key):
            rows.append(key)
    return rows


@dataclass
class IsoResult:
    verdict: str  # "yes" | "no" | "inconclusive"
    witness: dict[int, Matrix] | None = None
    differing: list[str] = field(default_factory=list)
    reason: str = ""


def _elements(M: DieudonneModule, n: int):
    return itertools.product(*(range(o) for o in M.orders(n)))


def _element_order(M: DieudonneModule, n: int, v: Sequence[int]) -> int:
    out = 1
    for x, o in zip(v, M.orders(n)):
        if x % o:
            from math import gcd

            out = max(out, o // gcd(x, o))
    return out


def _chains(M: DieudonneModule) -> list[list[int]]:
    p = M.p
    seen, chains = set(), []
    for n in M.degrees():
        if n in seen:
            continue
        base = n
        if n:
            while base % p == 0:
                base //= p
        chain, d = [], base
        if n == 0:
            chain = [0]
        else:
            while M.in_range(d) and (d <= max(M.degrees())):
                if M.rank(d):
                    chain.append(d)
                d *= p
        seen.update(chain)
        chains.append(chain)
    return chains


def is_isomorphic(M: DieudonneModule, N: DieudonneModule, L: int = 3, bound_exp: int = 24,
                  node_budget: int = 200_000) -> IsoResult:
    if M.p != N.p:
        return IsoResult("no", reason="different primes")
    fa, fb = fingerprint(M, L), fingerprint(N, L)
    diff = fingerprint_diff(fa, fb)
    if diff:
        return IsoResult("no", differing=diff, reason="fingerprints differ")
    p = M.p
    if M.total_order() > p**bound_exp:
        return IsoResult("inconclusive", reason=f"total order exceeds p^{bound_exp}")
    budget = [node_budget]
    witness: dict[int, Matrix] = {}
    for chain in _chains(M):
        found = _search_chain(M, N, chain, 0, witness, budget)
        if found is None:
            return IsoResult("inconclusive", reason="search budget exhausted")
        if not found:
            return IsoResult("no", reason=f"no F,V-equivariant isomorphism on degrees {chain}")
    return IsoResult("yes", witness=witness)


def _map_ok(M, N, n, phi, witness) -> bool:
    """F/V commutation with already chosen degrees, and self-maps in degree 0."""
    p = M.p
    checks = []
    if n == 0:
        checks.append((0, 0))
    else:
        if n % p == 0 and (n // p) in witness:
            checks.append((n // p, n))
    for low, high in checks:
        plow = witness[low] if low != n else phi
        phigh = phi
        # F: phi_high F_M = F_N phi_low
        FM, FN = M.f_matrix(low), N.f_matrix(low)
        if FM is not None and M.rank(low) and M.rank(high):
            lhs = _compose(N, phigh, FM, high)
            rhs = _compose(N, FN, plow, high)
            if lhs != rhs:
                return False
        VM, VN = M.v_matrix(low), N.v_matrix(low)
        if VM is not None and M.rank(low) and M.rank(high):
            lhs = _compose(N, plow, VM, low)
            rhs = _compose(N, VN, phigh, low)
            if lhs != rhs:
                return False
    return True


def _search_chain(M, N, chain, pos, witness, budget):
    if pos == len(chain):
        return True
    n = chain[pos]
    for phi in _degree_isos(M, N, n, budget, witness):
        if phi is None:
            return None
        if _map_ok(M, N, n, phi, witness):
            witness[n] = phi
            res = _search_chain(M, N, chain, pos + 1, witness, budget)
            if res:
                return True
            if res is None:
                return None
            del witness[n]
    return False


def _solve_congruences(eqs, nvars):
    """Solve sum_k a_k x_k = b (mod m) for a list of (a, b, m) over Z.

    Returns (x0, gens): one solution and generators of the homogeneous
    solutions, or None when the system is inconsistent."""
    if not eqs:
        return [0] * nvars, [[int(i == k) for i in range(nvars)] for k in range(nvars)]
    ne = len(eqs)
    A = [list(a) + [m if e == i else 0 for e in range(ne)] for i, (a, _, m) in enumerate(eqs)]
    b = [rhs for _, rhs, _ in eqs]
    D, U, W = smith_normal_form(A)
    c = [sum(u * x for u, x in zip(row, b)) for row in U]
    cols = nvars + ne
    y = [0] * cols
    free = []
    for k in range(cols):
        d = D[k][k] if k < ne else 0
        ck = c[k] if k < ne else 0
        if d:
            if ck % d:
                return None
            y[k] = ck // d
        else:
            if ck:
                return None
            free.append(k)
    x0 = [sum(W[i][k] * y[k] for k in range(cols)) for i in range(nvars)]
    gens = [[W[i][k] for i in range(nvars)] for k in free]
    return x0, gens


def _constrained_isos(M, N, n, low, plow, budget):
    """Isomorphisms on degree n compatible with F and V against a fixed phi on low."""
    om, on = M.orders(n), N.orders(n)
    r, s = len(om), len(on)
    nvars = s * r  # unknown m[i][c] sits at i * r + c
    eqs = []
    for i in range(s):
        for c in range(r):
            a = [0] * nvars
            a[i * r + c] = om[c]
            eqs.append((a, 0, on[i]))
    FM, FN = M.f_matrix(low), N.f_matrix(low)
    lr = M.rank(low)
    if FM is not None and FN is not None:
        for j in range(lr):
            e = [int(k == j) for k in range(lr)]
            rhs = N.apply(FN, n, N.apply(plow, low, e))
            for i in range(s):
                a = [0] * nvars
                for c in range(r):
                    a[i * r + c] = FM[c][j]
                eqs.append((a, rhs[i], on[i]))
    VM, VN = M.v_matrix(low), N.v_matrix(low)
    if VM is not None and VN is not None:
        olow = N.orders(low)
        for c in range(r):
            e = [int(k == c) for k in range(r)]
            rhs = N.apply(plow, low, M.apply(VM, low, e))
            for t in range(len(olow)):
                a = [0] * nvars
                for i in range(s):
                    a[i * r + c] = VN[t][i]
                eqs.append((a, rhs[t], olow[t]))
    sol = _solve_congruences(eqs, nvars)
    if sol is None:
        return
    x0, gens = sol
    box = [on[k // r] for k in range(nvars)]
    red = lambda v: tuple(x % m for x, m in zip(v, box))
    gens = [g for g in {red(g) for g in gens} if any(g)]
    def iso_at(k):
        x = red([a + b for a, b in zip(x0, k)])
        mat = [[x[i * r + c] for c in range(r)] for i in range(s)]
        return mat if image_order(N, n, mat) == N.order(n) else None

    zero = tuple([0] * nvars)
    group, frontier = {zero}, [zero]
    if (mat := iso_at(zero)) is not None:
        yield mat
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = red([a + b for a, b in zip(v, g)])
                if w in group:
                    continue
                budget[0] -= 1
                if budget[0] <= 0:
                    yield None
                    return
                group.add(w)
                nxt.append(w)
                if (mat := iso_at(w)) is not None:
                    yield mat
        frontier = nxt


def _degree_isos(M, N, n, budget, witness=None):
    """Group isomorphisms M_n -> N_n as matrices (generator images as columns).

    If phi is already fixed on degree n/p, F and V make the remaining choice
    an affine problem, solved exactly. Otherwise every candidate is tried."""
    p = M.p
    orders = M.orders(n)
    r = len(orders)
    if M.order(n) != N.order(n):
        return
    low = n // p if n and n % p == 0 else None
    if witness is not None and low is not None and low in witness and M.rank(low):
        yield from _constrained_isos(M, N, n, low, witness[low], budget)
        return
    elems = list(_elements(N, n))
    candidates = [[v for v in elems if o % _element_order(N, n, v) == 0] for o in orders]
    chosen: list[tuple[int, ...]] = []

    def rec(k):
        if k == r:
            mat = [[chosen[c][i] for c in range(r)] for i in range(len(N.orders(n)))]
            if image_order(N, n, mat) == N.order(n):
                yield mat
            return
        for v in candidates[k]:
            budget[0] -= 1
            if budget[0] <= 0:
                yield None
                return
            chosen.append(v)
            yield from rec(k + 1)
            chosen.pop()

    yield from rec(0)


# ---------------------------------------------------------------------------
# Literals and re-encodings


def gl_example_module(p: int, D: int) -> DieudonneModule:
    """Z/p <-> Z/p^2 <-> Z/p^2 <-> ... in degrees 2, 2p, 2p^2, ... (F = p rightwards, V = 1 leftwards)."""
    exps: dict[int, list[int]] = {}
    F: dict[int, Matrix] = {}
    V: dict[int, Matrix] = {}
    d, first = 2, True
    while d <= D:
        exps[d] = [1 if first else 2]
        first = False
        d *= p
    for n in exps:
        if p * n in exps:
            F[n] = [[p]]
            V[n] = [[1]]
    return DieudonneModule(p, exps, F, V, D)


def conjugate(M: DieudonneModule, changes: Mapping[int, tuple[Matrix, Matrix]]) -> DieudonneModule:
    """Re-encode M along automorphisms P_n (with inverses) of each degree: new = P F P^{-1}."""
    p = M.p

    def P(n):
        r = M.rank(n)
        ident = [[int(i == j) for j in range(r)] for i in range(r)]
        return changes.get(n, (ident, ident))

    F, V = {}, {}
    for n in M.degrees():
        Fm = M.f_matrix(n)
        if Fm is not None and M.rank(p * n):
            F[n] = _compose(M, P(p * n)[0], _compose(M, Fm, P(n)[1], p * n), p * n)
        Vm = M.v_matrix(n)
        if Vm is not None and M.rank(p * n):
            V[n] = _compose(M, P(n)[0], _compose(M, Vm, P(p * n)[1], n), n)
    return DieudonneModule(p, dict(M.exponents), F, V, M.max_degree)


def random_automorphism(M: DieudonneModule, n: int, rng, steps: int = 6) -> tuple[Matrix, Matrix]:
    """A random automorphism of M_n built from elementary moves, with its inverse."""
    p = M.p
    es = M.exponents.get(n, [])
    r = len(es)
    P = [[int(i == j) for j in range(r)] for i in range(r)]
    Pinv = [[int(i == j) for j in range(r)] for i in range(r)]
    orders = M.orders(n)
    for _ in range(steps):
        if not r:
            break
        kind = int(rng.integers(0, 2)) if r > 1 else 0
        if kind == 0:
            k = int(rng.integers(0, r))
            u = int(rng.integers(1, p))
            uinv = pow(u, -1, p**es[k])
            E = [[(u if (i == j == k) else int(i == j)) for j in range(r)] for i in range(r)]
            Einv = [[(uinv if (i == j == k) else int(i == j)) for j in range(r)] for i in range(r)]
        else:
            k, m = (int(x) for x in rng.choice(r, size=2, replace=False))
            c = int(rng.integers(1, p)) * p ** max(0, es[m] - es[k])
            # generator k -> g_k + c g_m; needs order(c g_m) | order(g_k)
            E = [[int(i == j) for j in range(r)] for i in range(r)]
            Einv = [[int(i == j) for j in range(r)] for i in range(r)]
            E[m][k] = c
            Einv[m][k] = -c
        P = [[x % orders[i] for x in row] for i, row in enumerate(int_matmul(E, P))]
        Pinv = [[x % orders[i] for x in row] for i, row in enumerate(int_matmul(Pinv, Einv))]
    return P, Pinv
