import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarlab.graded import GradedModule, ValidationError, ground_field, polynomial, standard_presets
from polarlab.linalg import IntPoly
from polarlab.polar import PolarAlgebra, free_polar, polarize
from polarlab.witt import (Evaluator, NotPolarError, WittResourceError, WittVector, _sum_plan, cowitt_u,
                           frobenius, frobenius_polys, ghost, ghost_poly, monomial_count, random_witt_vector,
                           teichmuller, verschiebung, witt_add, witt_diff_polys, witt_multiple, witt_neg,
                           witt_sub, witt_sum_polys, zero_vector)


def intpoly_sums(p, n):
    """S_0..S_n from the ghost recursion, in pure-Python integer polynomials."""
    names = [f"a{i}" for i in range(n + 1)] + [f"b{i}" for i in range(n + 1)]
    gens = IntPoly.gens(names)
    a, b = gens[: n + 1], gens[n + 1:]
    out = []
    for m in range(n + 1):
        num = IntPoly.constant(names, 0)
        for i in range(m + 1):
            num = num + p**i * (a[i] ** (p ** (m - i)) + b[i] ** (p ** (m - i)))
        for i in range(m):
            num = num - p**i * out[i] ** (p ** (m - i))
        out.append(num.exact_div(p**m))
    return out


@pytest.mark.parametrize("p,n", [(2, 0), (2, 1), (2, 2), (2, 3), (3, 0), (3, 1), (3, 2), (5, 1)])
def test_sum_polynomials_match_pure_python(p, n):
    flint_side = witt_sum_polys(p, n).as_intpolys()
    for got, want in zip(flint_side, intpoly_sums(p, n)):
        assert got.terms == want.terms


@pytest.mark.parametrize("p", [2, 3, 5])
def test_s1_closed_form(p):
    a0, a1, b0, b1 = IntPoly.gens(["a0", "a1", "b0", "b1"])
    want = a1 + b1 + (a0**p + b0**p - (a0 + b0) ** p).exact_div(p)
    got = witt_sum_polys(p, 1).as_intpolys()[1]
    assert got.terms == want.terms


@pytest.mark.parametrize("p,n", [(2, 2), (3, 2), (5, 1)])
def test_diff_and_frobenius_ghost_identities(p, n):
    D = witt_diff_polys(p, n)
    gens = D.ctx.gens()
    a, b = gens[: n + 1], gens[n + 1:]
    for m in range(n + 1):
        assert ghost_poly(D.sums, p, m) == ghost_poly(a, p, m) - ghost_poly(b, p, m)
    F = frobenius_polys(p, n)
    x = F.ctx.gens()
    for m in range(n + 1):
        assert ghost_poly(F.sums, p, m) == ghost_poly(x, p, m + 1)


@given(st.sampled_from([2, 3, 5]), st.lists(st.integers(-20, 20), min_size=3, max_size=3),
       st.lists(st.integers(-20, 20), min_size=3, max_size=3))
@settings(max_examples=40, deadline=None)
def test_ghost_is_additive_on_integers(p, a, b):
    n = 2
    S = witt_sum_polys(p, n)
    vals = a + b
    s = [int(f(*vals)) for f in S.sums]
    assert [x + y for x, y in zip(ghost(a, p), ghost(b, p))] == ghost(s, p)


def test_ghost_rejects_char_p_carriers():
    with pytest.raises(ValidationError):
        ghost([{0: 1}], 3)


def test_resource_guard():
    assert monomial_count(5, 4) > 2_000_000
    with pytest.raises(WittResourceError):
        witt_sum_polys(5, 4)
    with pytest.raises(WittResourceError):
        witt_sum_polys(2, 5)


CARRIERS = [(p, name) for p in (2, 3, 5) for name in ("poly_x2", "poly_x2_y4", "monomial_quotient")]


@pytest.mark.parametrize("p,name", CARRIERS)
def test_group_axioms_random(p, name):
    A = polarize(standard_presets(p)[name])
    rng = np.random.default_rng(p * 100 + len(name))
    for _ in range(10):
        n = int(rng.integers(0, 3))
        d = 2 * int(rng.integers(1, 3))
        u, v, w = (random_witt_vector(A, d, n, rng) for _ in range(3))
        assert witt_add(u, v) == witt_add(v, u)
        assert witt_add(witt_add(u, v), w) == witt_add(u, witt_add(v, w))
        assert witt_sub(witt_add(u, v), v) == u
        assert witt_add(u, witt_neg(u)).is_zero()
        assert witt_add(u, zero_vector(A, d, n)) == u


@pytest.mark.parametrize("p", [3, 5])
def test_odd_prime_subtraction_matches_difference_polynomials(p):
    A = polarize(standard_presets(p)["poly_x2_y4"])
    rng = np.random.default_rng(p)
    for n in (1, 2):
        plan = _sum_plan(p, n, diff=True)
        for _ in range(10):
            u = random_witt_vector(A, 2, n, rng)
            v = random_witt_vector(A, 2, n, rng)
            direct = Evaluator(A).run(plan, u.entries + v.entries)
            assert witt_sub(u, v).entries == direct


def test_binary_and_polar_carriers_agree():
    B = polynomial(3, 36, ("x", 2), ("y", 2))
    A = polarize(B)
    rng = np.random.default_rng(1)
    for _ in range(10):
        u = random_witt_vector(A, 2, 2, rng)
        v = random_witt_vector(A, 2, 2, rng)
        ub, vb = WittVector(B, 2, u.entries), WittVector(B, 2, v.entries)
        assert witt_add(u, v).entries == witt_add(ub, vb).entries
        assert frobenius(u).entries == frobenius(ub).entries


def test_teichmuller_frobenius():
    A = polarize(polynomial(3, 54, ("x", 2)))
    x = A.module.index("x")
    t = teichmuller(A, {x: 1}, 2)
    # F[x] = [x^p]
    assert frobenius(t) == teichmuller(A, A.frobenius({x: 1}), 1)
    # V[x^p] = p[x] in W_2(A)_2, i.e. VF = p on Teichmuller elements
    assert verschiebung(teichmuller(A, A.frobenius({x: 1}), 1)) == witt_multiple(t, 3)


def test_shape_errors():
    A = polarize(polynomial(3, 18, ("x", 2)))
    with pytest.raises(ValidationError):
        WittVector(A, 1, [{}])
    with pytest.raises(ValidationError):
        WittVector(A, 2, [{1: 1}, {1: 1}])  # entry 1 must lie in degree 6
    with pytest.raises(ValidationError):
        witt_add(zero_vector(A, 2, 1), zero_vector(A, 2, 2))
    with pytest.raises(ValidationError):
        verschiebung(zero_vector(A, 2, 1))
    with pytest.raises(ValidationError):
        frobenius(zero_vector(A, 2, 0))


def test_verify_flags_non_polar_carrier():
    M = GradedModule(2, 0, (("1", 0), ("t", 0)))
    bad = PolarAlgebra(M, {(0, 0): {1: 1}, (1, 1): {0: 1}, (0, 1): {1: 1}})
    u = zero_vector(bad, 0, 1)
    with pytest.raises(NotPolarError):
        witt_add(u, u, verify=True)


def test_cowitt_slots_skip_empty_leading_degrees():
    A = free_polar(GradedModule(2, 32, (("x", 2),)), 32)
    cw = cowitt_u(A)
    s = cw.slots[32]
    assert (s.base, s.length) == (2, 4)
    assert 1 not in cw.slots and 3 not in cw.slots


def test_cowitt_degree_zero_needs_n_max():
    A = polarize(ground_field(3))
    with pytest.raises(ValidationError):
        cowitt_u(A)
    assert cowitt_u(A, n_max=2).slots[0].length == 2
