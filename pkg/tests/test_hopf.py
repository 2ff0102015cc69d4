import itertools

import numpy as np
import pytest

from polarlab.graded import (GradedModule, ValidationError, polynomial, standard_presets, truncate,
                             vadd)
from polarlab.hopf import (check_hopf, cof_u, convolve, counterexample_pair, dual, exterior_hopf,
                           hopf_from_json, lambda_p, primitive_vectors, primitives, quasi_shuffle,
                           symmetric_tensor_coalgebra, trivial_cofree, verify_cofree)
from polarlab.witt import WittVector, witt_add


def _connected_presets(p, D):
    for name, B in standard_presets(p).items():
        if B.module.dim(0) == 1:
            yield name, truncate(B, min(D, B.max_degree))


@pytest.mark.parametrize("p", [2, 3])
def test_cof_u_of_presets(p):
    for name, B in _connected_presets(p, 12):
        H = cof_u(B)
        assert check_hopf(H) == [], name
        reduced = {d: n for d, n in B.module.dims().items() if d}
        assert primitives(H).dims() == reduced, name
        assert verify_cofree(H).cofree, name


def test_cof_u_dims_are_partition_counts():
    p, D = 3, 16
    H = cof_u(polynomial(p, D, ("x", 2)))
    # parts are the degrees 2, 4, 6, ... of the reduced polynomial ring
    for d in range(0, D + 1, 2):
        assert H.module.dim(d) == _npart(d // 2), d


def _npart(m, largest=None):
    largest = m if largest is None else largest
    if m == 0:
        return 1
    return sum(_npart(m - k, k) for k in range(1, min(m, largest) + 1))


def test_cof_u_rejects_disconnected_algebra():
    with pytest.raises(ValidationError):
        cof_u(standard_presets(3)["mixed_deg0"])


def test_symmetric_coalgebra_examples():
    V = GradedModule(3, 12, (("x", 2),))
    S = symmetric_tensor_coalgebra(V)
    assert S.module.dims() == {d: 1 for d in range(0, 13, 2)}
    W = GradedModule(3, 12, (("e", 3),))
    assert symmetric_tensor_coalgebra(W).module.dims() == {0: 1, 3: 1}
    U = GradedModule(3, 10, (("x", 2), ("e", 3), ("y", 4)))
    assert primitives(symmetric_tensor_coalgebra(U)).dims() == U.dims()


def test_exterior_hopf():
    M = GradedModule(3, 6, (("a", 3), ("b", 3)))
    H = exterior_hopf(M)
    assert H.module.dims() == {0: 1, 3: 2, 6: 1}
    assert check_hopf(H) == []
    assert primitives(H).dims() == {3: 2}
    with pytest.raises(ValidationError):
        exterior_hopf(GradedModule(3, 6, (("x", 2),)))
    with pytest.raises(ValidationError):
        exterior_hopf(GradedModule(2, 6, (("a", 3),)))


def test_trivial_cofree_passes():
    V = GradedModule(3, 12, (("x", 2), ("y", 4)))
    H = trivial_cofree(V)
    assert check_hopf(H) == []
    assert verify_cofree(H).cofree


def _tensor(H, names):
    M = H.module
    return {(M.index(a), M.index(b)): c for (a, b), c in names.items()}


def test_lambda_generator_coproducts():
    H = lambda_p(2, 2, D=16)
    one = "1"
    assert H.coproducts[H.module.index("t0")] == _tensor(H, {("t0", one): 1, (one, "t0"): 1})
    # S_1 for p = 2 is a1 + b1 - a0 b0, and -1 = 1 mod 2
    assert H.coproducts[H.module.index("t1")] == _tensor(H, {("t1", one): 1, (one, "t1"): 1, ("t0", "t0"): 1})
    for p in (2, 3):
        assert check_hopf(lambda_p(2, p, D=2 * p**3)) == []


@pytest.mark.parametrize("p", [2, 3])
def test_lambda_primitives_are_powers_of_t0(p):
    j, D = 2, 2 * p**3
    H = lambda_p(j, p, D=D)
    P = primitive_vectors(H)
    assert {d: len(v) for d, v in P.items()} == {j * p**k: 1 for k in range(4)}
    A = polynomial(p, D, ("t0", j), ("t1", j * p), ("t2", j * p * p), ("t3", j * p**3))
    assert [b for b in H.module.basis] == [b for b in A.module.basis]
    for k in range(4):
        d = j * p**k
        (vec,) = P[d]
        nz = [H.module.in_degree(d)[i] for i, c in enumerate(vec) if c % p]
        assert [H.module.name(i) for i in nz] == ["t0" if k == 0 else f"t0^{p**k}"]


def _algebra_maps(A, j, p):
    """Images of (t0, t1) in A_j x A_{jp}, as pairs of vectors."""
    for v0 in itertools.product(range(p), repeat=A.module.dim(j)):
        for v1 in itertools.product(range(p), repeat=A.module.dim(j * p)):
            a = {k: c for k, c in zip(A.module.in_degree(j), v0) if c}
            b = {k: c for k, c in zip(A.module.in_degree(j * p), v1) if c}
            yield [a, b]


@pytest.mark.parametrize("p,gens", [(3, (("x", 2), ("y", 6))), (2, (("x", 2), ("y", 4))),
                                    (2, (("x", 1), ("y", 2)))])
def test_lambda_represents_witt_vectors(p, gens):
    j = gens[0][1]
    A = polynomial(p, j * p, *gens)
    assert max(A.module.dims().values()) <= 3
    H = lambda_p(j, p, n=1, D=j * p)
    g = [H.module.index("t0"), H.module.index("t1")]
    maps = list(_algebra_maps(A, j, p))
    assert len(maps) == p ** (A.module.dim(j) + A.module.dim(j * p))
    for f, h in itertools.product(maps, repeat=2):
        got = convolve(H, g, A, f, h)
        want = witt_add(WittVector(A, j, f), WittVector(A, j, h)).entries
        assert got == want


def _hoffman(u, v, fuse, p):
    if not u:
        return {tuple(v): 1}
    if not v:
        return {tuple(u): 1}
    out = {}

    def put(prefix, rest, c):
        for w, d in rest.items():
            key = prefix + w
            out[key] = (out.get(key, 0) + c * d) % p

    put((u[0],), _hoffman(u[1:], v, fuse, p), 1)
    put((v[0],), _hoffman(u, v[1:], fuse, p), 1)
    for z, c in fuse(u[0], v[0]).items():
        put((z,), _hoffman(u[1:], v[1:], fuse, p), c)
    return {w: c for w, c in out.items() if c}


def _orbit_product(S, T, fuse, p):
    tot = {}
    for u in sorted(set(itertools.permutations(S))):
        for v in sorted(set(itertools.permutations(T))):
            for w, c in _hoffman(tuple(u), tuple(v), fuse, p).items():
                tot[w] = (tot.get(w, 0) + c) % p
    # a symmetric tensor is determined by its coefficients on sorted words
    return {w: c for w, c in tot.items() if c and list(w) == sorted(w)}


@pytest.mark.parametrize("p", [2, 3, 5])
def test_quasi_shuffle_against_tensor_words(p):
    A = polynomial(p, 16, ("x", 2), ("y", 4))
    M = A.module
    keep = [i for i in range(len(M)) if i != A.unit_index]
    pos = {k: n for n, k in enumerate(keep)}
    V = GradedModule(p, 16, tuple(M.basis[k] for k in keep))

    def fuse(a, b):
        return {pos[k]: c for k, c in A.mul_basis(keep[a], keep[b]).items()}

    rng = np.random.default_rng(p)
    letters = list(range(len(V)))
    for _ in range(25):
        S = tuple(sorted(int(x) for x in rng.choice(letters, size=int(rng.integers(1, 4)))))
        T = tuple(sorted(int(x) for x in rng.choice(letters, size=int(rng.integers(1, 3)))))
        assert quasi_shuffle(S, T, V, fuse) == _orbit_product(S, T, fuse, p)
        assert quasi_shuffle(S, T, V, None) == _orbit_product(S, T, lambda a, b: {}, p)


def test_counterexample_pair():
    p, j = 3, 2
    H, Hp = counterexample_pair(p, j)
    assert H.module.dims() == Hp.module.dims()
    assert check_hopf(H) == [] and check_hopf(Hp) == []
    d = p * p * j
    assert len(primitive_vectors(dual(H)).get(d, [])) == 1
    assert len(primitive_vectors(dual(Hp)).get(d, [])) == 2
    assert not verify_cofree(H).cofree
    assert verify_cofree(Hp).cofree
    with pytest.raises(ValidationError):
        counterexample_pair(2, 2)


def test_double_dual_and_json():
    H = lambda_p(2, 3, D=18)
    DD = dual(dual(H))
    assert DD.coproducts == H.coproducts
    assert DD.all_products() == H.all_products()
    for G in (H, cof_u(polynomial(3, 8, ("x", 2))), exterior_hopf(GradedModule(3, 6, (("a", 3), ("b", 3))))):
        back = hopf_from_json(G.to_json())
        assert back.module.basis == G.module.basis
        assert back.coproducts == G.coproducts
        assert back.all_products() == G.all_products()


def test_convolution_unit_is_counit():
    p, j = 3, 2
    A = polynomial(p, 6, ("x", 2), ("y", 6))
    H = lambda_p(j, p, n=1, D=6)
    g = [H.module.index("t0"), H.module.index("t1")]
    zero = [{}, {}]
    for f in _algebra_maps(A, j, p):
        assert convolve(H, g, A, f, zero) == [vadd({}, x, p) for x in f]
