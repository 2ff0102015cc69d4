"""F-modules (k-linear F: M_q -> M_pq) and their interval decomposition.

Every finite-type F-module splits into chains x, Fx, ..., F^m x living in
degrees d, dp, ..., dp^m. Multiplicities come from ranks of composites of F;
an explicit chain basis is built separately as a witness.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .graded import GradedModule, ValidationError, Vec
from .linalg import rank, rank_kernel, rref
from .polar import PolarAlgebra, block_of


def _mat(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


@dataclass
class FModule:
    """Positively graded module with F: M_q -> M_{pq} as matrices (rows: target basis)."""

    module: GradedModule
    F: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        M, p = self.module, self.module.p
        for n, d in M.basis:
            if d == 0:
                raise ValidationError(f"F-modules are positively graded; {n!r} has degree 0")
        clean = {}
        for q, m in self.F.items():
            m = np.asarray(m, dtype=np.int64) % p
            rows, cols = M.dim(p * q) if p * q <= M.max_degree else 0, M.dim(q)
            if m.size == 0:
                continue
            if m.shape != (rows, cols):
                raise ValidationError(f"F at degree {q} must be {rows}x{cols}, got {m.shape}")
            if p > 2 and q % 2 and m.any():
                raise ValidationError(f"F must vanish on odd degree {q} when p is odd")
            if m.any():
                clean[q] = m
        self.F = clean

    @property
    def p(self) -> int:
        return self.module.p

    @property
    def max_degree(self) -> int:
        return self.module.max_degree

    def f_matrix(self, q: int) -> np.ndarray:
        M = self.module
        t = self.p * q
        rows = M.dim(t) if t <= M.max_degree else 0
        return self.F.get(q, _mat(rows, M.dim(q)))

    def composite(self, q: int, k: int) -> np.ndarray:
        """F^k: M_q -> M_{q p^k}."""
        M, p = self.module, self.p
        out = np.eye(M.dim(q), dtype=np.int64)
        cur = q
        for _ in range(k):
            out = (self.f_matrix(cur) @ out) % p
            cur *= p
        return out

    def apply(self, q: int, v: np.ndarray) -> np.ndarray:
        return (self.f_matrix(q) @ v) % self.p

    def to_json(self) -> dict:
        M = self.module
        Fmap = {}
        for q, m in sorted(self.F.items()):
            src, dst = M.in_degree(q), M.in_degree(self.p * q)
            for c, k in enumerate(src):
                col = [{"coef": int(m[r, c]), "basis": M.name(dst[r])} for r in range(len(dst)) if m[r, c]]
                if col:
                    Fmap[M.name(k)] = col
        return {
            "p": self.p,
            "max_degree": M.max_degree,
            "basis": [{"name": n, "degree": d} for n, d in M.basis],
            "F": Fmap,
        }


@dataclass
class VModule:
    """Dual picture: V: M_{pq} -> M_q as matrices (rows: basis of M_q)."""

    module: GradedModule
    V: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.module.p

    def to_json(self) -> dict:
        M = self.module
        Vmap = {}
        for q, m in sorted(self.V.items()):
            src, dst = M.in_degree(self.p * q), M.in_degree(q)
            for c, k in enumerate(src):
                col = [{"coef": int(m[r, c]), "basis": M.name(dst[r])} for r in range(len(dst)) if m[r, c]]
                if col:
                    Vmap[M.name(k)] = col
        return {
            "p": self.p,
            "max_degree": M.max_degree,
            "basis": [{"name": n, "degree": d} for n, d in M.basis],
            "V": Vmap,
        }


def _read_map(data: Mapping[str, Any], M: GradedModule, key: str, up: bool) -> dict[int, np.ndarray]:
    p = M.p
    out: dict[int, np.ndarray] = {}
    for src_name, terms in data.get(key, {}).items():
        k = M.index(src_name)
        d = M.degree(k)
        if up:
            q, src_deg, dst_deg = d, d, p * d
        else:
            if d % p:
                raise ValidationError(f"V is only defined on degrees divisible by p; {src_name!r} has degree {d}")
            q, src_deg, dst_deg = d // p, d, d // p
        src, dst = M.in_degree(src_deg), M.in_degree(dst_deg)
        m = out.setdefault(q, _mat(len(dst), len(src)))
        for t in terms:
            tgt = M.index(t["basis"])
            if M.degree(tgt) != dst_deg:
                raise ValidationError(f"{key}({src_name}) has a term {t['basis']!r} outside degree {dst_deg}")
            m[dst.index(tgt), src.index(k)] += int(t["coef"])
    return {q: m % p for q, m in out.items()}


def fmodule_from_json(data: Mapping[str, Any]) -> FModule | VModule:
    try:
        p = int(data["p"])
        D = int(data["max_degree"])
        basis = [(b["name"], int(b["degree"])) for b in data["basis"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"F-module JSON missing field: {exc}") from None
    M = GradedModule(p, D, tuple(basis))
    if "V" in data and "F" not in data:
        return VModule(M, _read_map(data, M, "V", up=False))
    return FModule(M, _read_map(data, M, "F", up=True))


def u_f(A: PolarAlgebra) -> FModule:
    """Forget a p-polar algebra to its F-module F(x) = mu(x,...,x), positive degrees only."""
    p = A.p
    keep = [i for i in range(len(A)) if A.degree(i) > 0]
    M = GradedModule(p, A.max_degree, tuple(A.module.basis[i] for i in keep))
    F: dict[int, np.ndarray] = {}
    for q in M.degrees():
        if p * q > M.max_degree:
            continue
        src, dst = M.in_degree(q), M.in_degree(p * q)
        m = _mat(len(dst), len(src))
        for c, k in enumerate(src):
            image = A.frobenius({keep[k]: 1})
            for idx, coef in image.items():
                m[dst.index(keep.index(idx)), c] = coef
        F[q] = m
    return FModule(M, F)


def dualize(M: FModule | VModule) -> FModule | VModule:
    """Transpose the structure maps: F-modules become V-modules and back."""
    if isinstance(M, FModule):
        return VModule(M.module, {q: m.T.copy() for q, m in M.F.items()})
    return FModule(M.module, {q: m.T.copy() for q, m in M.V.items()})


# ---------------------------------------------------------------------------
# Barcodes


@dataclass(frozen=True, order=True)
class Bar:
    degree: int  # degree of the chain head
    length: int  # number of F steps along the chain
    ambiguous: bool = False  # chain reaches the truncation; finite vs infinite undecidable

    def degrees(self, p: int) -> list[int]:
        return [self.degree * p**i for i in range(self.length + 1)]

    def to_json(self) -> dict:
        return {"degree": self.degree, "length": self.length, "ambiguous": self.ambiguous}


@dataclass
class Barcode:
    p: int
    max_degree: int
    bars: list[Bar]

    def __post_init__(self):
        self.bars = sorted(self.bars)

    def dims(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for b in self.bars:
            for d in b.degrees(self.p):
                out[d] = out.get(d, 0) + 1
        return dict(sorted(out.items()))

    def total_dim(self) -> int:
        return sum(b.length + 1 for b in self.bars)

    def to_json(self) -> dict:
        return {"p": self.p, "max_degree": self.max_degree, "bars": [b.to_json() for b in self.bars]}


def _chains_of(M: GradedModule) -> dict[int, list[int]]:
    """Block label -> chain degrees j, jp, jp^2, ... up to the truncation."""
    p, D = M.p, M.max_degree
    out: dict[int, list[int]] = {}
    for d in M.degrees():
        j = block_of(d, p)
        if j in out:
            continue
        chain, q = [], j
        while q <= D:
            chain.append(q)
            q *= p
        out[j] = chain
    return dict(sorted(out.items()))


def rank_profile(M: FModule) -> dict[tuple[int, int], int]:
    """r(q, q') = rank of F^k: M_q -> M_q' for every chain pair q <= q' = q p^k."""
    out = {}
    for chain in _chains_of(M.module).values():
        for a, q in enumerate(chain):
            for b in range(a, len(chain)):
                m = M.composite(q, b - a)
                out[(q, chain[b])] = rank(m, M.p) if m.size else 0
    return out


def _as_fmodule(M: FModule | VModule) -> FModule:
    if isinstance(M, VModule):
        # V-module ranks equal those of the transposed F-module
        return FModule(M.module, {q: m.T.copy() for q, m in M.V.items()})
    return M


def decompose(M: FModule | VModule) -> Barcode:
    """Interval multiplicities by rank inclusion-exclusion along each p-chain."""
    F = _as_fmodule(M)
    p = F.p
    prof = rank_profile(F)
    bars: list[Bar] = []
    for chain in _chains_of(F.module).values():
        n = len(chain)

        def r(a, b):
            if a < 0 or b >= n or a > b:
                return 0
            return prof[(chain[a], chain[b])]

        for a in range(n):
            for b in range(a, n):
                mult = r(a, b) - r(a - 1, b) - r(a, b + 1) + r(a - 1, b + 1)
                if mult < 0:
                    raise ArithmeticError("negative interval multiplicity")
                ambiguous = b == n - 1 and not (p > 2 and chain[a] % 2)
                bars.extend([Bar(chain[a], b - a, ambiguous)] * mult)
    return Barcode(p, F.max_degree, bars)


def reconstruct(bc: Barcode) -> FModule:
    """The direct sum of chain modules described by a barcode."""
    p, D = bc.p, bc.max_degree
    basis = []
    for k, b in enumerate(bc.bars):
        for i, d in enumerate(b.degrees(p)):
            basis.append((f"c{k}_{i}", d))
    M = GradedModule(p, D, tuple(basis))
    F: dict[int, np.ndarray] = {}
    for k, b in enumerate(bc.bars):
        for i, d in enumerate(b.degrees(p)[:-1]):
            src, dst = M.in_degree(d), M.in_degree(d * p)
            m = F.setdefault(d, _mat(len(dst), len(src)))
            m[dst.index(M.index(f"c{k}_{i + 1}")), src.index(M.index(f"c{k}_{i}"))] = 1
    return FModule(M, F)


def same_rank_profile(A: FModule, B: FModule) -> bool:
    if A.module.dims() != B.module.dims():
        return False
    pa, pb = rank_profile(A), rank_profile(B)
    keys = set(pa) | set(pb)
    return all(pa.get(k, 0) == pb.get(k, 0) for k in keys)


# ---------------------------------------------------------------------------
# Explicit chain basis (witness)


def _span_rows(vectors: Sequence[np.ndarray], dim: int) -> np.ndarray:
    if not vectors:
        return np.zeros((0, dim), dtype=np.int64)
    return np.array(vectors, dtype=np.int64).reshape(len(vectors), dim)


def _kernel_rows(m: np.ndarray, dim: int, p: int) -> np.ndarray:
    if m.shape[0] == 0:
        return np.eye(dim, dtype=np.int64)
    _, ker = rank_kernel(m, p)
    return _span_rows([np.array(v) for v in ker], dim)


def _intersect(U: np.ndarray, W: np.ndarray, p: int) -> np.ndarray:
    dim = U.shape[1]
    if U.shape[0] == 0 or W.shape[0] == 0:
        return np.zeros((0, dim), dtype=np.int64)
    stacked = np.vstack([U, (-W) % p]).T % p
    _, ker = rank_kernel(stacked, p)
    vecs = [(np.array(k[: U.shape[0]]) @ U) % p for k in ker]
    if not vecs:
        return np.zeros((0, dim), dtype=np.int64)
    red, _ = rref(np.array(vecs), p)
    return red


def _extend(base: np.ndarray, target: np.ndarray, p: int) -> list[np.ndarray]:
    """Vectors of ``target`` completing ``base`` to a basis of base + target."""
    chosen = []
    cur = base.copy()
    r = rank(cur, p) if cur.size else 0
    for v in target:
        trial = np.vstack([cur, v]) if cur.size else v.reshape(1, -1)
        rr = rank(trial, p)
        if rr > r:
            chosen.append(v % p)
            cur, r = trial, rr
    return chosen


@dataclass
class ChainBasis:
    """Chain heads with their lengths; F^i(head) over all chains is a basis."""

    heads: list[tuple[int, np.ndarray, int]]  # (degree, vector in M_degree, length)


def chain_basis(M: FModule) -> ChainBasis:
    """Jordan-chain basis: heads of length l+1 at degree q span a complement of
    ker F^l + (im F cap ker F^{l+1}) inside ker F^{l+1}."""
    p, G = M.p, M.module
    heads = []
    for chain in _chains_of(G).values():
        n = len(chain)
        for a, q in enumerate(chain):
            dim = G.dim(q)
            if not dim:
                continue
            if a > 0 and G.dim(chain[a - 1]):
                img = (M.f_matrix(chain[a - 1]) % p).T  # rows span im F in M_q
                img = rref(img, p)[0] if img.size else np.zeros((0, dim), dtype=np.int64)
            else:
                img = np.zeros((0, dim), dtype=np.int64)
            kernels = []
            for ell in range(0, n - a + 1):
                if a + ell >= n:
                    kernels.append(np.eye(dim, dtype=np.int64))
                else:
                    kernels.append(_kernel_rows(M.composite(q, ell), dim, p))
            for ell in range(0, n - a):
                K_next = kernels[ell + 1]
                base_parts = [kernels[ell], _intersect(img, K_next, p)]
                base = np.vstack([b for b in base_parts if b.size]) if any(b.size for b in base_parts) \
                    else np.zeros((0, dim), dtype=np.int64)
                base = rref(base, p)[0] if base.size else base
                for v in _extend(base, K_next, p):
                    heads.append((q, v, ell))
    return ChainBasis(heads)


def verify_chain_basis(M: FModule, cb: ChainBasis) -> bool:
    p, G = M.p, M.module
    per_degree: dict[int, list[np.ndarray]] = {}
    for q, v, ell in cb.heads:
        cur, d = v.copy(), q
        for i in range(ell + 1):
            if not cur.any():
                return False
            per_degree.setdefault(d, []).append(cur)
            if i < ell:
                cur = M.apply(d, cur)
                d *= p
        nxt = M.apply(d, cur) if d * p <= G.max_degree else np.zeros(0, dtype=np.int64)
        if nxt.size and nxt.any():
            return False
    for d in G.degrees():
        vecs = per_degree.get(d, [])
        if len(vecs) != G.dim(d) or rank(np.array(vecs), p) != G.dim(d):
            return False
    return True


def barcode_from_chain_basis(M: FModule, cb: ChainBasis) -> Barcode:
    p = M.p
    bars = []
    for q, _, ell in cb.heads:
        top = q * p**ell
        ambiguous = top * p > M.max_degree and not (p > 2 and q % 2)
        bars.append(Bar(q, ell, ambiguous))
    return Barcode(p, M.max_degree, bars)


# ---------------------------------------------------------------------------
# Lifting to p-polar algebras


def lift_to_polar(M: FModule) -> PolarAlgebra:
    """A p-polar structure on M's basis with mu(x,...,x) = F(x).

    Built as the product of the polar structures on the chains of a chain
    basis (mu(y_i,...,y_i) = y_{i+1}, all mixed products zero) and written in
    M's own basis. Depends on the chosen chain basis: not functorial.
    """
    import itertools

    p, G = M.p, M.module
    cb = chain_basis(M)
    if any(b.ambiguous for b in barcode_from_chain_basis(M, cb).bars):
        warnings.warn("chains reaching the truncation are lifted as finite chains", stacklevel=2)
    # chain vectors per degree, with the index of their successor
    chain_vecs: dict[int, list[np.ndarray]] = {}
    successor: dict[tuple[int, int], tuple[int, int] | None] = {}
    for q, v, ell in cb.heads:
        cur, d = v.copy(), q
        prev = None
        for i in range(ell + 1):
            chain_vecs.setdefault(d, []).append(cur)
            pos = (d, len(chain_vecs[d]) - 1)
            if prev is not None:
                successor[prev] = pos
            successor.setdefault(pos, None)
            prev = pos
            if i < ell:
                cur = M.apply(d, cur)
                d *= p
    mu: dict[tuple[int, ...], Vec] = {}
    for d, vecs in chain_vecs.items():
        if p * d > G.max_degree:
            continue
        idx = G.in_degree(d)
        tgt = G.in_degree(p * d)
        B = np.array(vecs, dtype=np.int64)  # rows: chain vectors in M's coordinates
        inv = _inverse_mod(B.T, p)  # coordinates of M's basis vectors in the chain basis
        for combo in itertools.combinations_with_replacement(range(len(idx)), p):
            out = np.zeros(len(tgt), dtype=np.int64)
            for y in range(len(vecs)):
                coef = 1
                for c in combo:
                    coef = coef * int(inv[y, c]) % p
                if not coef:
                    continue
                succ = successor.get((d, y))
                if succ is None:
                    continue
                out = (out + coef * chain_vecs[succ[0]][succ[1]]) % p
            if out.any():
                mu[tuple(idx[c] for c in combo)] = {tgt[r]: int(out[r]) for r in range(len(tgt)) if out[r]}
    return PolarAlgebra(G, mu, "lift")


def _inverse_mod(m: np.ndarray, p: int) -> np.ndarray:
    n = m.shape[0]
    aug = np.hstack([m % p, np.eye(n, dtype=np.int64)])
    red, piv = rref(aug, p)
    if piv[:n] != list(range(n)):
        raise ArithmeticError("chain basis is not a basis")
    return red[:, n:]


# ---------------------------------------------------------------------------
# Random instances


def random_fmodule(p: int, rng, max_dim: int = 20, D: int | None = None, density: float = 0.5) -> FModule:
    """Random F-module with at most ``max_dim`` basis elements in positive degrees."""
    if D is None:
        D = 2 * p**3
    degrees = [d for d in range(1, D + 1)]
    total = int(rng.integers(1, max_dim + 1))
    # favour a few chains so F is interesting
    heads = [d for d in degrees if block_of(d, p) == d and (p == 2 or d % 2 == 0)]
    basis = []
    for k in range(total):
        if rng.random() < 0.85 and heads:
            j = int(rng.choice(heads[: max(1, min(len(heads), 4))]))
            chain = []
            q = j
            while q <= D:
                chain.append(q)
                q *= p
            d = int(rng.choice(chain))
        else:
            d = int(rng.choice(degrees))
        basis.append((f"e{k}", d))
    G = GradedModule(p, D, tuple(basis))
    F = {}
    for q in G.degrees():
        if p * q > D or (p > 2 and q % 2):
            continue
        rows, cols = G.dim(p * q), G.dim(q)
        if rows and cols:
            m = rng.integers(0, p, size=(rows, cols))
            mask = rng.random(size=(rows, cols)) < density
            F[q] = (m * mask).astype(np.int64)
    return FModule(G, F)


def random_conjugate(M: FModule, rng) -> FModule:
    """Same module in a random graded basis: F_q -> P_{pq} F_q P_q^{-1}."""
    from .linalg import random_invertible

    p, G = M.p, M.module
    P = {q: random_invertible(G.dim(q), p, rng) for q in G.degrees()}
    F = {}
    for q, m in M.F.items():
        F[q] = (P[p * q] @ m @ _inverse_mod(P[q], p)) % p
    return FModule(G, F)
