import itertools
from math import comb

import pytest

from polarlab.graded import (GradedModule, ValidationError, algebra_from_json, check_algebra, dual_algebra,
                             ground_field, make_preset, polynomial, shift, standard_presets,
                             tensor_product, truncate)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_presets_are_algebras(p):
    for name, A in standard_presets(p).items():
        assert check_algebra(A) == [], name


def test_polynomial_products():
    A = polynomial(3, 12, ("x", 2), ("y", 4, 2))
    x, y = A.module.element({"x": 1}), A.module.element({"y": 1})
    assert A.module.describe(A.mul(A.mul(x, x), y)) == [{"coef": 1, "basis": "x^2*y"}]
    assert A.mul(y, y) == {}  # y^2 = 0
    assert A.power(x, 7) == {}  # degree 14 > 12
    assert A.module.dims() == {0: 1, 2: 1, 4: 2, 6: 2, 8: 2, 10: 2, 12: 2}


def test_graded_commutativity_signs():
    A = make_preset("tensor_product", p=3, max_degree=8, factors=[
        {"preset": "exterior", "max_degree": 8, "generators": [{"name": "e", "degree": 1}, {"name": "f", "degree": 3}]},
        {"preset": "truncated_polynomial", "max_degree": 8, "generators": [{"name": "x", "degree": 2}]}])
    M = A.module
    for i, j in itertools.product(range(len(M)), repeat=2):
        sign = -1 if M.degree(i) % 2 and M.degree(j) % 2 else 1
        ab = A.mul_basis(i, j)
        ba = {k: (sign * c) % 3 for k, c in A.mul_basis(j, i).items()}
        assert ab == ba
    e, f = M.element({"e|1": 1}), M.element({"f|1": 1})
    assert A.mul(e, e) == {}
    assert A.mul(e, f) == {k: (-c) % 3 for k, c in A.mul(f, e).items()}


def test_tensor_dims_convolve():
    A = polynomial(2, 10, ("x", 1))
    B = polynomial(2, 10, ("y", 3, 2))
    T = tensor_product(A, B)
    want = {}
    for (d1, n1), (d2, n2) in itertools.product(A.module.dims().items(), B.module.dims().items()):
        if d1 + d2 <= 10:
            want[d1 + d2] = want.get(d1 + d2, 0) + n1 * n2
    assert T.module.dims() == want
    assert check_algebra(T) == []


def test_dual_of_polynomial_coalgebra_is_divided_powers():
    p, D = 5, 16
    basis = [(f"x{n}", 2 * n) for n in range(D // 2 + 1)]
    cop = {f"x{n}": {(f"x{k}", f"x{n - k}"): comb(n, k) for k in range(n + 1)} for n in range(D // 2 + 1)}
    A = dual_algebra(p, D, basis, cop)
    assert check_algebra(A) == []
    for a, b in itertools.product(range(D // 2 + 1), repeat=2):
        got = A.mul_basis(a, b)
        if a + b <= D // 2 and comb(a + b, a) % p:
            assert got == {a + b: comb(a + b, a) % p}
        else:
            assert got == {}


def test_json_round_trip():
    for A in standard_presets(3).values():
        B = algebra_from_json(A.to_json())
        assert B.module.basis == A.module.basis
        assert B.products == A.products


def test_preset_json():
    A = algebra_from_json({"preset": "truncated_polynomial", "p": 3, "max_degree": 6,
                           "generators": [{"name": "x", "degree": 2, "height": 2}]})
    assert A.module.dims() == {0: 1, 2: 1}


def test_validation_errors():
    with pytest.raises(ValidationError):
        algebra_from_json({"p": 3, "basis": []})
    with pytest.raises(ValidationError):
        make_preset("no_such_kind", p=3, max_degree=4)
    with pytest.raises(ValidationError):
        make_preset("quotient_monomial_ideal", p=3, max_degree=4,
                    generators=[{"name": "x", "degree": 2}], relations=[{"z": 1}])
    with pytest.raises(ValidationError):
        algebra_from_json({"p": 3, "max_degree": 4, "unit": "1",
                           "basis": [{"name": "1", "degree": 0}, {"name": "x", "degree": 2}],
                           "products": [{"left": "x", "right": "x", "value": [{"coef": 1, "basis": "x"}]}]})


def test_check_algebra_finds_broken_associativity():
    data = {"p": 3, "max_degree": 6, "unit": "1",
            "basis": [{"name": "1", "degree": 0}, {"name": "x", "degree": 2},
                      {"name": "y", "degree": 4}, {"name": "z", "degree": 6}],
            "products": [{"left": "x", "right": "x", "value": [{"coef": 1, "basis": "y"}]},
                         {"left": "x", "right": "y", "value": [{"coef": 1, "basis": "z"}]},
                         {"left": "y", "right": "x", "value": [{"coef": 2, "basis": "z"}]}]}
    kinds = {v["kind"] for v in check_algebra(algebra_from_json(data))}
    assert kinds


def test_small_helpers():
    M = GradedModule(3, 6, (("a", 0), ("b", 2)))
    # Frobenius twists: M(1)_n = M_{pn}, M(-1)_{pn} = M_n
    assert shift(M, 1).dims() == {0: 1}
    assert shift(M, -1).dims() == {0: 1, 6: 1}
    assert ground_field(5).module.dims() == {0: 1}
    T = truncate(polynomial(3, 12, ("x", 2)), 6)
    assert T.max_degree == 6 and T.module.dims() == {0: 1, 2: 1, 4: 1, 6: 1}
