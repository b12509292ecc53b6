import numpy as np
import pytest

from qsextlib.errors import ConfigurationError, FieldWidthError
from qsextlib.galois import (
    MAX_WIDTH,
    TABLE_WIDTH,
    FieldPoly,
    GaloisField,
    field,
    gf_mul,
    inverse,
    log_tables,
    poly_eval,
    poly_eval_all,
    reduction_polynomial,
)

from .oracles import gf_mul_reference


def test_gf_mul_small_examples():
    # GF(8) with x^3 + x + 1
    assert reduction_polynomial(3) == 0b1011
    assert gf_mul(6, 3, 3) == 1
    assert gf_mul(0, 5, 3) == 0
    assert gf_mul(1, 5, 3) == 5


def test_poly_eval_example():
    assert poly_eval([1, 1, 1], 2, 3) == 7


@pytest.mark.parametrize("width", range(1, TABLE_WIDTH + 1))
def test_registered_polynomials_are_primitive(width):
    gf = GaloisField(width)
    assert gf.exp is not None
    # x generates the whole multiplicative group
    assert len(set(gf.exp[: gf.order - 1].tolist())) == gf.order - 1


@pytest.mark.parametrize("width", [4, 8, 12])
def test_table_multiply_matches_long_division(width, rng):
    gf = field(width)
    for _ in range(200):
        a, b = (int(v) for v in rng.integers(0, 1 << width, size=2))
        expected = gf_mul_reference(a, b, gf.modulus, width)
        assert gf.mul(a, b) == expected
        assert gf_mul(a, b, width) == expected


def test_wide_field_uses_shift_and_xor(rng):
    gf = field(20)
    assert gf.exp is None
    for _ in range(50):
        a, b, c = (int(v) for v in rng.integers(0, 1 << 20, size=3))
        assert gf.mul(a, gf.mul(b, c)) == gf.mul(gf.mul(a, b), c)
        assert gf.mul(a, b ^ c) == gf.mul(a, b) ^ gf.mul(a, c)
        assert gf.mul(a, b) == gf_mul_reference(a, b, gf.modulus, 20)


@pytest.mark.parametrize("width", [4, 8, 16, 20])
def test_field_axioms_on_random_triples(width, rng):
    gf = field(width)
    triples = rng.integers(0, 1 << width, size=(10_000, 3))
    for a, b, c in triples.tolist():
        assert gf.mul(a, gf.mul(b, c)) == gf.mul(gf.mul(a, b), c)
        assert gf.mul(a, b ^ c) == gf.mul(a, b) ^ gf.mul(a, c)


@pytest.mark.parametrize("width", range(1, 9))
def test_inverse_matches_exhaustive_search(width):
    modulus = reduction_polynomial(width)
    for a in range(1, 1 << width):
        found = [b for b in range(1, 1 << width) if gf_mul_reference(a, b, modulus, width) == 1]
        assert found == [inverse(a, width)]


@pytest.mark.parametrize("width", [3, 8, 17])
def test_poly_eval_is_linear_in_the_coefficients(width, rng):
    gf = field(width)
    for _ in range(100):
        c1 = [int(v) for v in rng.integers(0, 1 << width, size=5)]
        c2 = [int(v) for v in rng.integers(0, 1 << width, size=5)]
        scale = int(rng.integers(0, 1 << width))
        point = int(rng.integers(0, 1 << width))
        summed = [u ^ v for u, v in zip(c1, c2)]
        assert poly_eval(summed, point, width) == poly_eval(c1, point, width) ^ poly_eval(c2, point, width)
        scaled = [gf.mul(scale, u) for u in c1]
        assert poly_eval(scaled, point, width) == gf.mul(scale, poly_eval(c1, point, width))


def test_every_nonzero_element_has_an_inverse():
    gf = field(8)
    for a in range(1, 256):
        assert gf.mul(a, inverse(a, 8)) == 1
    with pytest.raises(ZeroDivisionError):
        gf.inv(0)


def test_pow_and_add(rng):
    gf = field(6)
    for a in rng.integers(1, 64, size=20):
        a = int(a)
        expected = 1
        for e in range(10):
            assert gf.pow(a, e) == expected
            expected = gf.mul(expected, a)
        assert gf.pow(a, 63) == 1
        assert gf.add(a, a) == 0
    assert gf.add(0b101010, 0b010101) == 0b111111


def test_widest_field_inverse():
    a = 0xDEADBEEF
    assert gf_mul(a, inverse(a, MAX_WIDTH), MAX_WIDTH) == 1


def test_mul_array_matches_scalar():
    gf = field(6)
    values = np.arange(64)
    assert gf.mul_array(values, 37).tolist() == [gf.mul(int(v), 37) for v in values]
    assert gf.mul_array(values, 0).tolist() == [0] * 64


def test_unregistered_width():
    with pytest.raises(ConfigurationError):
        reduction_polynomial(MAX_WIDTH + 1)
    with pytest.raises(ConfigurationError):
        field(0)


def test_elements_must_fit_the_field():
    with pytest.raises(FieldWidthError):
        gf_mul(8, 1, 3)
    with pytest.raises(FieldWidthError):
        poly_eval([1, 9], 2, 3)
    with pytest.raises(FieldWidthError):
        poly_eval([1, 1], 8, 3)


def test_field_poly_from_bits_packs_lsb_first():
    poly = FieldPoly.from_bits([1, 0, 1, 1, 1, 0], width=3, degree_bound=3)
    assert poly.coefficients == (5, 3, 0)
    with pytest.raises(FieldWidthError):
        FieldPoly.from_bits([1] * 7, width=3, degree_bound=2)
    with pytest.raises(FieldWidthError):
        FieldPoly((1, 2, 3), width=3, degree_bound=2)


def test_poly_eval_width_mismatch():
    poly = FieldPoly((1, 2), width=3)
    with pytest.raises(FieldWidthError):
        poly_eval(poly, 1, width=4)
    with pytest.raises(FieldWidthError):
        poly_eval([1, 2], 1)


def test_poly_eval_all_matches_horner(rng):
    for width in (5, 17):
        coefficients = tuple(int(c) for c in rng.integers(0, 1 << width, size=6))
        poly = FieldPoly(coefficients, width)
        points = rng.integers(0, 1 << width, size=40)
        assert poly_eval_all(poly, points).tolist() == [poly_eval(poly, int(a)) for a in points]


def test_log_tables():
    exp, log = log_tables(4)
    assert exp[log[6] + log[7]] == gf_mul(6, 7, 4)
    assert exp[0] == 1
    with pytest.raises(FieldWidthError):
        log_tables(TABLE_WIDTH + 1)
