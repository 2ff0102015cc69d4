import warnings

import numpy as np
import pytest

from polarlab.fmodule import (Bar, FModule, VModule, barcode_from_chain_basis, chain_basis, decompose,
                              dualize, fmodule_from_json, lift_to_polar, random_conjugate, random_fmodule,
                              rank_profile, reconstruct, same_rank_profile, u_f, verify_chain_basis)
from polarlab.graded import GradedModule, ValidationError, polynomial, standard_presets
from polarlab.polar import is_p_polar, polarize


def test_polynomial_on_degree_one_class():
    M = u_f(polarize(polynomial(2, 12, ("z", 1))))
    bars = decompose(M).bars
    assert bars == sorted([Bar(1, 3, True), Bar(3, 2, True), Bar(5, 1, True),
                           Bar(7, 0, True), Bar(9, 0, True), Bar(11, 0, True)])


def test_truncated_polynomial_has_finite_bars():
    M = u_f(polarize(standard_presets(2)["trunc_x2_h4"]))  # x in degree 2, x^4 = 0, D = 12
    assert decompose(M).bars == [Bar(2, 1, False), Bar(6, 0, False)]


def test_odd_degree_singletons_are_not_ambiguous_for_odd_p():
    M = u_f(polarize(standard_presets(3)["exterior_x3"]))
    assert decompose(M).bars == [Bar(3, 0, False)]


@pytest.mark.parametrize("seed", range(30))
def test_barcode_invariants(seed):
    p = (2, 3, 5)[seed % 3]
    rng = np.random.default_rng(seed)
    M = random_fmodule(p, rng, max_dim=12)
    bc = decompose(M)
    assert bc.total_dim() == len(M.module)
    assert decompose(random_conjugate(M, rng)).bars == bc.bars
    assert decompose(dualize(M)).bars == bc.bars
    assert same_rank_profile(reconstruct(bc), M)
    cb = chain_basis(M)
    assert verify_chain_basis(M, cb)
    assert barcode_from_chain_basis(M, cb).bars == bc.bars


def test_rank_profile_of_reconstruction_is_diagonal_count():
    M = u_f(polarize(polynomial(3, 54, ("x", 2))))
    prof = rank_profile(M)
    assert prof[(2, 54)] == 1
    assert prof[(4, 36)] == 1
    assert all(v <= 1 for v in prof.values())


def test_lift_round_trip_and_warning():
    M = u_f(polarize(polynomial(3, 18, ("x", 2))))
    with pytest.warns(UserWarning):
        A = lift_to_polar(M)
    assert is_p_polar(A)
    back = u_f(A)
    for q, m in M.F.items():
        assert (back.f_matrix(q) == m).all()


def test_lift_of_finite_module_does_not_warn():
    M = u_f(polarize(standard_presets(2)["trunc_x2_h4"]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        A = lift_to_polar(M)
    assert decompose(u_f(A)).bars == decompose(M).bars


def test_json_round_trip():
    rng = np.random.default_rng(3)
    M = random_fmodule(3, rng, max_dim=10)
    N = fmodule_from_json(M.to_json())
    assert isinstance(N, FModule)
    assert N.module.basis == M.module.basis
    assert set(N.F) == set(M.F) and all((N.F[q] == M.F[q]).all() for q in M.F)
    V = dualize(M)
    W = fmodule_from_json(V.to_json())
    assert isinstance(W, VModule)
    assert all((W.V[q] == V.V[q]).all() for q in V.V)


def test_validation():
    with pytest.raises(ValidationError):
        FModule(GradedModule(2, 4, (("a", 0),)), {})
    M = GradedModule(3, 18, (("x", 2), ("y", 6), ("e", 3), ("f", 9)))
    with pytest.raises(ValidationError):
        FModule(M, {2: np.array([[1, 1]])})
    with pytest.raises(ValidationError):
        FModule(M, {3: np.array([[1]])})
    assert FModule(M, {2: np.array([[2]])}).F[2].tolist() == [[2]]
