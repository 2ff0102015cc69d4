import itertools

import numpy as np
import pytest

from polarlab.graded import GradedModule, ValidationError, polynomial, standard_presets
from polarlab.polar import (PolarAlgebra, block_of, check_assoc, direct_product, free_polar, hull,
                            is_p_polar, p_typical_split, polar_from_json, polarity_report, polarize,
                            same_structure)


def test_polarize_is_the_p_fold_product():
    B = polynomial(3, 24, ("x", 2), ("y", 4))
    A = polarize(B)
    M = B.module
    for d in (2, 4):
        idx = M.in_degree(d)
        for t in itertools.combinations_with_replacement(idx, 3):
            assert A.mu_basis(t) == B.prod({i: 1} for i in t)


def test_odd_repeats_vanish():
    M = GradedModule(3, 9, (("e", 3), ("f", 3), ("g", 9)))
    with pytest.raises(ValidationError):
        PolarAlgebra(M, {(0, 0, 1): {2: 1}})
    A = PolarAlgebra(M, {(0, 1, 1): {}})
    assert A.mu_basis((0, 0, 0)) == {}


def test_mu_degree_checked():
    M = GradedModule(3, 12, (("x", 2), ("y", 4), ("z", 6)))
    with pytest.raises(ValidationError):
        PolarAlgebra(M, {(0, 0, 0): {1: 1}})
    with pytest.raises(ValidationError):
        PolarAlgebra(M, {(0, 0): {2: 1}})


def test_hull_relation_holds():
    A = polarize(polynomial(3, 12, ("x", 2), ("y", 2)))
    H = hull(A)
    alg = H.algebra
    M = A.module
    for d in M.degrees():
        if d == 0 or 3 * d > 12:
            continue
        for t in itertools.combinations_with_replacement(M.in_degree(d), 3):
            lhs = alg.prod(H.unit_map[i] for i in t)
            rhs = {}
            for k, c in A.mu_basis(t).items():
                for b, cb in H.unit_map[k].items():
                    rhs[b] = (rhs.get(b, 0) + c * cb) % 3
            assert lhs == {k: v for k, v in rhs.items() if v}


@pytest.mark.parametrize("p", [2, 3, 5])
def test_presets_polarize_to_polar_algebras(p):
    for name, B in standard_presets(p).items():
        A = polarize(B)
        assert check_assoc(A) == [], name
        rep = polarity_report(A)
        assert rep["p_polar"] and rep["kernel"] == [], name


def test_free_polar_dims():
    p = 3
    A = free_polar(GradedModule(p, 54, (("x", 2), ("y", 2))), 54)
    # degree 2p^k: monomials of degree p^k in two variables
    assert A.module.dims() == {2: 2, 6: 4, 18: 10, 54: 28}
    small = free_polar(GradedModule(p, 18, (("x", 2), ("y", 2))), 18)
    assert is_p_polar(small) and not check_assoc(small)
    B = free_polar(GradedModule(2, 24, (("z", 1), ("w", 3))), 24)
    assert B.module.dims() == {1: 1, 2: 1, 3: 1, 4: 1, 6: 1, 8: 1, 12: 1, 16: 1, 24: 1}


def test_free_polar_rejects_degree_zero():
    with pytest.raises(ValidationError):
        free_polar(GradedModule(3, 6, (("t", 0),)))


def test_split_recombines():
    A = polarize(polynomial(3, 36, ("x", 2), ("y", 4)))
    A0, blocks = p_typical_split(A)
    assert all(j % 3 for j in blocks)
    for j, B in blocks.items():
        assert {block_of(d, 3) for d in B.module.degrees()} == {j}
    again = direct_product([A0, *blocks.values()])
    assert same_structure(again, A)
    assert sum(len(B) for B in blocks.values()) + len(A0) == len(A)


def test_json_round_trip():
    for B in standard_presets(3).values():
        A = polarize(B)
        C = polar_from_json(A.to_json())
        assert C.mu == A.mu and C.module.basis == A.module.basis


def test_failing_assoc_is_never_p_polar():
    # p-polar implies ASSOC; perturb mu and compare the two decision procedures
    rng = np.random.default_rng(7)
    seen = 0
    for p in (2, 3):
        for name in ("poly_x2", "monomial_quotient", "mixed_deg0"):
            A = polarize(standard_presets(p)[name])
            M = A.module
            for _ in range(15):
                d = int(rng.choice([d for d in M.degrees() if d % 2 == 0 and M.dim(p * d)]))
                args = tuple(sorted(int(a) for a in rng.choice(M.in_degree(d), size=p)))
                mu = dict(A.mu)
                target = M.in_degree(p * d)
                mu[args] = {int(target[rng.integers(len(target))]): int(rng.integers(1, p))}
                Ap = PolarAlgebra(M, mu)
                if check_assoc(Ap):
                    seen += 1
                    assert not is_p_polar(Ap), name
    assert seen >= 5


def test_degree_zero_assoc_failure_reported():
    M = GradedModule(2, 0, (("1", 0), ("t", 0)))
    # mu(t,t) = 1 but mu(1,1) = t: (t t) 1 = 1*1 = t while t (t 1) = t*t = 1
    A = PolarAlgebra(M, {(0, 0): {1: 1}, (1, 1): {0: 1}, (0, 1): {1: 1}})
    rep = polarity_report(A)
    assert not rep["degree0_assoc_ok"] and not rep["p_polar"]
