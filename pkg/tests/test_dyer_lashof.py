import itertools

import numpy as np
import pytest

from polarlab.dyer_lashof import (Bound, DLMonomial, adem_pair, adem_rewrite, admissible_basis, apply_instability,
                                  cartan_expand, dl_degree, expression, is_admissible, monomial, parse_word)
from polarlab.graded import ValidationError, polynomial


def falling_binom(n, k, p):
    """C(n, k) mod p from the falling factorial, zero outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0
    num = den = 1
    for t in range(k):
        num *= n - t
        den *= t + 1
    return (num // den) % p


def expr(p, text, q=2, n=None):
    return expression(p, [(monomial(text, q=q), 1)], n)


def test_parse_word():
    assert parse_word("bQ^3 Q^1") == ((1, 3), (0, 1))
    assert parse_word("b^1 Q^3 Q^1") == ((1, 3), (0, 1))
    assert parse_word("βQ^2") == ((1, 2),)
    assert parse_word("b^0 Q^3") == ((0, 3),)
    assert parse_word("") == ()
    for bad in ("Q3", "b b Q^1", "Q^1 b", "bQ^1 x"):
        with pytest.raises(ValidationError):
            parse_word(bad)


def test_degrees():
    assert dl_degree(monomial("Q^3", q=4), 3)["degree"] == 16
    assert dl_degree(monomial("bQ^3", q=4), 3)["degree"] == 15
    assert dl_degree(monomial("Q^2", q=4), 3, n=0)["in_range"]
    assert not dl_degree(monomial("Q^3", q=4), 3, n=0)["in_range"]
    assert dl_degree(monomial("Q^3", q=4), 3, n=2)["in_range"]


def test_odd_primes_only():
    with pytest.raises(ValidationError):
        expression(2, [])
    with pytest.raises(ValidationError):
        admissible_basis(2, None, 2, 10)
    with pytest.raises(ValidationError):
        cartan_expand(Bound("x", 2), Bound("y", 2), 3, 2)


def test_worked_relations():
    p = 3
    got = adem_rewrite(expr(p, "Q^6 Q^1"))
    assert got == expression(p, [(monomial("Q^5 Q^2", q=2), 1), (monomial("Q^4 Q^3", q=2), 2)])
    assert adem_rewrite(expr(p, "Q^3 bQ^1")) == expr(p, "bQ^3 Q^1")
    assert adem_rewrite(expr(p, "Q^7 Q^2")).terms == {}
    same = expr(p, "bQ^4 Q^2")
    assert adem_rewrite(same) == same


@pytest.mark.parametrize("p", [3, 5, 7])
def test_coefficients_match_outer_index_form(p):
    # Q^r Q^s = sum_i +- C((p-1)(r-i)-1, i-ps-1) Q^i Q^{r+s-i}, with i the outer index
    for s in range(0, 5):
        for r in range(p * s + 1, p * s + 12):
            got = adem_pair((0, r), (0, s), p, signs="none")
            want = {}
            for i in range(0, r + s + 1):
                c = falling_binom((p - 1) * (r - i) - 1, i - p * s - 1, p)
                if c:
                    want[((0, i), (0, r + s - i))] = c
            assert got == want, (r, s)


def test_admissible_pairs_are_refused():
    with pytest.raises(ValueError):
        adem_pair((0, 3), (0, 1), 3)
    with pytest.raises(ValueError):
        adem_pair((0, 2), (1, 1), 3)


def _random_word(rng, p, length):
    return tuple((int(rng.integers(0, 2)), int(rng.integers(1, 3 * p))) for _ in range(length))


@pytest.mark.parametrize("signs", ["clm", "none"])
def test_rewriting_structure(signs):
    p = 3
    rng = np.random.default_rng(5)
    for _ in range(200):
        m = DLMonomial(_random_word(rng, p, int(rng.integers(2, 4))), "x", 2 * int(rng.integers(0, 4)))
        e = expression(p, [(m, 1)])
        out = adem_rewrite(e, signs=signs)
        assert out.degrees() <= {m.degree(p)}
        assert all(is_admissible(t.word, p) for t in out.terms)
        assert adem_rewrite(out, signs=signs) == out
        assert adem_rewrite(e, strategy="rightmost", signs=signs) == out


def test_instability():
    p = 3
    A = polynomial(p, 12, ("x", 4))
    assert apply_instability(expression(p, [(DLMonomial(((0, 1),), "x", 4), 1)]), A).terms == {}
    cube = apply_instability(expression(p, [(DLMonomial(((0, 2),), "x", 4), 1)]), A)
    assert cube == expression(p, [(DLMonomial((), "x^3", 12), 1)])
    assert apply_instability(expression(p, [(DLMonomial(((1, 2),), "x", 4), 1)]), A).terms == {}
    # above the line nothing happens
    up = expression(p, [(DLMonomial(((0, 3),), "x", 4), 1)])
    assert apply_instability(up, A) == up


def test_cartan():
    p = 3
    x0, y0 = Bound("x", 0), Bound("y", 0)
    assert cartan_expand(x0, y0, 0, p) == [{"coef": 1, "left": "x^3", "right": "y^3", "degree": 0}]
    y = Bound("y", 4)
    unit = cartan_expand(Bound("1", 0), y, 3, p)
    assert unit == [{"coef": 1, "left": "1", "right": "Q^3 y", "degree": 4 + 12}]
    with pytest.raises(ValidationError):
        cartan_expand(Bound("x", 2), Bound("y", 2), 4, p, n=4)
    assert cartan_expand(Bound("x", 2), Bound("y", 2), 3, p, n=4)


def test_cartan_degree_bookkeeping():
    p = 3
    rng = np.random.default_rng(0)
    for _ in range(100):
        a, b = (2 * int(rng.integers(0, 4)) for _ in range(2))
        r = int(rng.integers(0, 8))
        beta = bool(rng.integers(0, 2)) and r > 0
        for t in cartan_expand(Bound("x", a), Bound("y", b), r, p, beta=beta):
            assert t["degree"] == a + b + 2 * r * (p - 1) - beta


def _brute_basis(q, n, p, Dmax):
    found = set()
    ops = [(e, r) for r in range(0, Dmax) for e in (0, 1)]
    for length in range(0, 4):
        for word in itertools.product(ops, repeat=length):
            m = DLMonomial(tuple(word), "x", q)
            if m.degree(p) > Dmax or not m.in_range(p, n) or not is_admissible(m.word, p):
                continue
            ds = m.degrees(p)
            if all(2 * r > d for (e, r), d in zip(reversed(m.word), ds)):
                found.add(m)
    return found


def test_basis_against_brute_force():
    p, Dmax = 3, 30
    for q, n in itertools.product((0, 2, 3), (None, 0, 2, 5)):
        words, series = admissible_basis(q, n, p, Dmax)
        assert len(set(words)) == len(words)
        assert set(words) == _brute_basis(q, n, p, Dmax), (q, n)
        assert sum(series.values()) == len(words)
    assert admissible_basis(10, None, 3, 8) == ([], {})


def test_basis_grows_with_n():
    p, q, Dmax = 3, 2, 60
    prev = None
    for n in (0, 1, 2, 4, 8, None):
        _, series = admissible_basis(q, n, p, Dmax)
        if prev is not None:
            assert all(series.get(d, 0) >= c for d, c in prev.items())
        prev = series


def test_expression_json_and_text():
    e = adem_rewrite(expr(3, "Q^6 Q^1"))
    data = e.to_json()
    assert len(data["terms"]) == 2 and data["n"] == "inf"
    assert {t["degree"] for t in data["terms"]} == {2 + 4 * 7}
    assert "Q^5 Q^2 x" in e.text()
