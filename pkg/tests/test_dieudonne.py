import itertools

import numpy as np
import pytest

from polarlab.dieudonne import (DieudonneModule, _solve_congruences, check_dieudonne, conjugate, cowitt_dieudonne,
                                gl_example_module, is_isomorphic, module_from_json, random_automorphism)
from polarlab.graded import GradedModule, ValidationError, polynomial, standard_presets
from polarlab.polar import free_polar, polarize


@pytest.mark.parametrize("p", [2, 3])
def test_cowitt_modules_satisfy_the_axioms(p):
    for name, B in standard_presets(p).items():
        M = cowitt_dieudonne(polarize(B), n_max=2)
        assert check_dieudonne(M) == [], name


def test_gl_example_is_a_dieudonne_module():
    for p in (2, 3, 5):
        assert check_dieudonne(gl_example_module(p, 2 * p**3)) == []


def test_cowitt_of_polynomial_ring():
    # W(k[u]) in degree 2m: cyclic of order p^(number of entries in range)
    p, D = 3, 54
    M = cowitt_dieudonne(polarize(polynomial(p, D, ("u", 2))), n_max=1)
    assert M.orders(2) == [3]
    assert M.orders(6) == [9]
    assert M.orders(18) == [27]
    assert M.orders(54) == [81]
    assert M.orders(4) == [3] and M.orders(12) == [9]


def test_check_catches_broken_relations():
    M = DieudonneModule(3, {2: [2], 6: [2]}, {2: [[1]]}, {2: [[1]]}, 6)
    kinds = {v["kind"] for v in check_dieudonne(M)}
    assert "VF" in kinds or "FV" in kinds
    ill = DieudonneModule(3, {2: [1], 6: [2]}, {2: [[1]]}, {2: [[3]]}, 6)
    assert any(v["kind"] == "ill_defined" for v in check_dieudonne(ill))


def test_json_round_trip():
    M = cowitt_dieudonne(free_polar(GradedModule(3, 54, (("x", 2),)), 54))
    assert module_from_json(M.to_json()).to_json() == M.to_json()
    with pytest.raises(ValidationError):
        module_from_json({"degrees": {"2": {"orders": [3]}}})
    with pytest.raises(ValidationError):
        module_from_json({"p": 3, "degrees": {"two": {"orders": [3]}}})


def _commutes(M, N, witness):
    p = M.p
    for n in M.degrees():
        for tgt, Mm, Nm in ((p * n, M.f_matrix(n), N.f_matrix(n)),):
            if Mm is None or not M.rank(tgt):
                continue
            for k in range(M.rank(n)):
                e = [int(i == k) for i in range(M.rank(n))]
                lhs = N.apply(Nm, tgt, N.apply(witness[n], n, e))
                rhs = N.apply(witness[tgt], tgt, M.apply(Mm, tgt, e))
                if lhs != rhs:
                    return False
        Vm, Vn = M.v_matrix(n), N.v_matrix(n)
        if Vm is not None and M.rank(p * n):
            for k in range(M.rank(p * n)):
                e = [int(i == k) for i in range(M.rank(p * n))]
                lhs = N.apply(Vn, n, N.apply(witness[p * n], p * n, e))
                rhs = N.apply(witness[n], n, M.apply(Vm, n, e))
                if lhs != rhs:
                    return False
    return True


@pytest.mark.parametrize("seed", range(8))
def test_conjugates_are_isomorphic_with_valid_witness(seed):
    rng = np.random.default_rng(seed)
    p = (2, 3)[seed % 2]
    B = standard_presets(p)[("poly_x2", "poly_x2_y4", "monomial_quotient")[seed % 3]]
    M = cowitt_dieudonne(polarize(B), n_max=1)
    changes = {n: random_automorphism(M, n, rng) for n in M.degrees()}
    N = conjugate(M, changes)
    assert check_dieudonne(N) == []
    res = is_isomorphic(M, N, bound_exp=32)
    assert res.verdict == "yes"
    assert _commutes(M, N, res.witness)


def test_bound_makes_search_inconclusive():
    M = cowitt_dieudonne(polarize(polynomial(3, 54, ("u", 2))), n_max=1)
    assert is_isomorphic(M, M, bound_exp=2).verdict == "inconclusive"


def test_different_orders_are_not_isomorphic():
    M = cowitt_dieudonne(polarize(polynomial(3, 36, ("u", 2))), n_max=1)
    N = cowitt_dieudonne(polarize(polynomial(3, 36, ("u", 2), ("v", 4))), n_max=1)
    res = is_isomorphic(M, N)
    assert res.verdict == "no" and res.differing


# brute-force oracle on two-degree modules -------------------------------------


def _isos(M, N, n):
    """All group isomorphisms M_n -> N_n as matrices (columns = images of generators)."""
    om, on = M.orders(n), N.orders(n)
    if sorted(om) != sorted(on):
        return []
    r = len(om)
    out = []
    for entries in itertools.product(*(range(on[i]) for i in range(r) for _ in range(r))):
        m = [list(entries[i * r:(i + 1) * r]) for i in range(r)]
        if any((om[j] * m[i][j]) % on[i] for i in range(r) for j in range(r)):
            continue
        image = {tuple(N.apply(m, n, list(v))) for v in itertools.product(*(range(o) for o in om))}
        if len(image) == N.order(n):
            out.append(m)
    return out


def _brute_isomorphic(M, N):
    a, b = M.degrees()
    for pa in _isos(M, N, a):
        for pb in _isos(M, N, b):
            if _commutes(M, N, {a: pa, b: pb}):
                return True
    return False


def _random_module(p, rng):
    while True:
        ea = sorted(int(x) for x in rng.integers(1, 3, size=int(rng.integers(1, 3))))
        eb = sorted(int(x) for x in rng.integers(1, 3, size=int(rng.integers(1, 3))))
        F = [[int(x) for x in row] for row in rng.integers(0, p * p, size=(len(eb), len(ea)))]
        V = [[int(x) for x in row] for row in rng.integers(0, p * p, size=(len(ea), len(eb)))]
        M = DieudonneModule(p, {2: ea, 2 * p: eb}, {2: F}, {2: V}, 2 * p)
        if not check_dieudonne(M):
            return M


def test_is_isomorphic_agrees_with_brute_force():
    rng = np.random.default_rng(2024)
    yes = no = 0
    for _ in range(40):
        M = _random_module(2, rng)
        N = _random_module(2, rng)
        if M.exponents != N.exponents:
            continue
        truth = _brute_isomorphic(M, N)
        verdict = is_isomorphic(M, N).verdict
        assert verdict == ("yes" if truth else "no")
        yes += truth
        no += not truth
    assert yes and no


def test_congruence_solver_matches_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(30):
        nv = int(rng.integers(1, 4))
        eqs = [([int(x) for x in rng.integers(-5, 6, size=nv)], int(rng.integers(0, 9)), int(rng.choice([2, 4, 8, 9])))
               for _ in range(int(rng.integers(1, 4)))]
        box = 72
        truth = {x for x in itertools.product(range(box), repeat=nv)
                 if all((sum(a * v for a, v in zip(c, x)) - b) % m == 0 for c, b, m in eqs)}
        sol = _solve_congruences(eqs, nv)
        if sol is None:
            assert not truth
            continue
        x0, gens = sol
        group, frontier = {tuple([0] * nv)}, [tuple([0] * nv)]
        while frontier:
            frontier = [w for v in frontier for g in gens
                        for w in [tuple((a + b) % box for a, b in zip(v, g))] if w not in group and not group.add(w)]
        assert {tuple((a + b) % box for a, b in zip(x0, k)) for k in group} == truth
