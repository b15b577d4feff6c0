"""Test finite field construction, arithmetic and e(r, n)."""

from math import gcd

import numpy as np
import pytest

from hallcert.core.errors import (
    BudgetExceeded,
    DegreeZero,
    DivisionByZero,
    EvenBaseForRTwo,
    FieldMismatch,
    NotCoprime,
    NotPrime,
)
from hallcert.core.field import (
    add,
    e_value,
    field_elements,
    field_for,
    frobenius,
    inv,
    make_field,
    mul,
    neg,
    nonsquare,
)


def test_prime_field_modulus():
    """Test that a prime field uses the modulus x."""
    f3 = make_field(3, 1)
    assert f3.order == 3
    assert f3.modulus == (0, 1)


@pytest.mark.parametrize(
    "q, modulus",
    [(9, (1, 0, 1)), (4, (1, 1, 1)), (8, (1, 1, 0, 1)), (25, (2, 0, 1))],
)
def test_least_irreducible_modulus(q, modulus):
    """Test that extension fields use the least monic irreducible modulus."""
    assert field_for(q).modulus == modulus


def test_make_field_is_deterministic():
    """Test that two constructions of F_9 agree."""
    assert make_field(3, 2) == make_field(3, 2)
    assert field_for(9) == make_field(3, 2)


def test_make_field_errors():
    """Test the construction errors."""
    with pytest.raises(NotPrime):
        make_field(4, 1)
    with pytest.raises(DegreeZero):
        make_field(3, 0)
    with pytest.raises(BudgetExceeded):
        make_field(2, 9)
    with pytest.raises(NotPrime):
        field_for(6)


def test_prime_field_arithmetic():
    """Test mod-5 arithmetic through the element API."""
    f5 = make_field(5)
    assert add(f5.elem(2), f5.elem(3)) == f5.zero()
    assert mul(f5.elem(2), f5.elem(3)) == f5.one()
    assert neg(f5.elem(1)) == f5.elem(4)
    assert inv(f5.elem(2)) == f5.elem(3)
    assert f5.elem(-1) == f5.elem(4)


def test_extension_multiplication_reduces_mod_modulus():
    """Test x * x = x^2 reduced mod x^2 + 1 in F_9."""
    f9 = make_field(3, 2)
    x = f9.elem([0, 1])
    assert (x * x).coeffs == (2, 0)


def test_inverse_of_zero():
    """Test that zero has no inverse."""
    with pytest.raises(DivisionByZero):
        inv(make_field(7).zero())


def test_mixed_fields_rejected():
    """Test that arithmetic across fields raises FieldMismatch."""
    with pytest.raises(FieldMismatch):
        add(make_field(3).one(), make_field(5).one())
    with pytest.raises(FieldMismatch):
        make_field(3, 2).elem([1, 2, 0])


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 49])
def test_field_axioms(q):
    """Test associativity, distributivity and inverses exhaustively on the tables."""
    t = field_for(q).tables
    a = np.arange(q)[:, None, None]
    b = np.arange(q)[None, :, None]
    c = np.arange(q)[None, None, :]
    assert np.array_equal(t.add[t.add[a, b], c], t.add[a, t.add[b, c]])
    assert np.array_equal(t.mul[t.mul[a, b], c], t.mul[a, t.mul[b, c]])
    assert np.array_equal(t.mul[a, t.add[b, c]], t.add[t.mul[a, b], t.mul[a, c]])
    units = np.arange(1, q)
    assert np.all(t.mul[units, t.inv[units]] == 1)
    assert np.all(t.add[np.arange(q), t.neg[np.arange(q)]] == 0)


def test_inverse_of_one():
    """Test inv(1) = 1 in several fields."""
    for q in (2, 4, 9, 25):
        fq = field_for(q)
        assert inv(fq.one()) == fq.one()


@pytest.mark.parametrize("q", [4, 9, 25, 49])
def test_frobenius_is_an_involutive_automorphism(q):
    """Test a -> a^sqrt(q) on F_q: involution, additive and multiplicative."""
    fq = field_for(q)
    half = fq.f // 2
    elements = field_elements(fq)
    for a in elements:
        assert frobenius(frobenius(a, half), half) == a
    for a in elements[:7]:
        for b in elements:
            assert frobenius(a + b, half) == frobenius(a, half) + frobenius(b, half)
            assert frobenius(a * b, half) == frobenius(a, half) * frobenius(b, half)


def test_frobenius_fixes_the_subfield_and_cubes_in_f9():
    """Test that F_3 is fixed inside F_9 and a generator goes to its cube."""
    f9 = make_field(3, 2)
    for k in range(3):
        assert frobenius(f9.elem(k), 1) == f9.elem(k)
    t = f9.tables
    g = f9.from_code(t.primitive)
    assert frobenius(g, 1) == f9.from_code(t.power(t.primitive, 3))


def test_frobenius_needs_a_quadratic_extension():
    """Test that a prime field has no quadratic subfield structure."""
    with pytest.raises(FieldMismatch):
        frobenius(make_field(5).one(), 1)


@pytest.mark.parametrize("r, n, expected", [(2, 7, 2), (2, 5, 1), (5, 2, 4), (7, 2, 3), (3, 4, 1), (7, 4, 3)])
def test_e_value_examples(r, n, expected):
    """Test e(r, n) on hand-computed values."""
    assert e_value(r, n) == expected


def test_e_value_errors():
    """Test the preconditions of e(r, n)."""
    with pytest.raises(NotCoprime):
        e_value(3, 6)
    with pytest.raises(EvenBaseForRTwo):
        e_value(2, 4)
    with pytest.raises(NotPrime):
        e_value(9, 2)
    with pytest.raises(NotPrime):
        e_value(1, 2)


def test_e_value_matches_brute_force():
    """Test e(r, n) against direct powers for odd primes r < 100 and n < 100."""
    odd_primes = [r for r in range(3, 100) if all(r % d for d in range(2, r))]
    for r in odd_primes:
        for n in range(1, 100):
            if gcd(r, n) != 1:
                continue
            e, power = 1, n % r
            while power != 1:
                power = power * n % r
                e += 1
            assert e_value(r, n) == e, f"e({r}, {n})"


def test_e_value_r_two_convention():
    """Test e(2, n) on 50 odd n: 1 when n = 1 mod 4, else 2."""
    for n in range(1, 100, 2):
        assert e_value(2, n) == (1 if n % 4 == 1 else 2)


@pytest.mark.parametrize("q, expected", [(5, 2), (7, 3), (3, 2), (13, 2)])
def test_nonsquare(q, expected):
    """Test the least non-square code of prime fields."""
    assert nonsquare(field_for(q)) == expected
