"""Exact arithmetic in F_q and F_{q^2}.

Elements are stored as integer codes ``c_0 + c_1*p + ... + c_{f-1}*p^(f-1)``
where ``c_i`` are the polynomial coefficients (constant term first). All
arithmetic goes through lookup tables built once per field, so matrices can
hold plain code arrays.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from sympy import Poly, factorint, isprime, n_order, primitive_root, symbols

from .errors import (
    BudgetExceeded,
    DegreeZero,
    DivisionByZero,
    EvenBaseForRTwo,
    FieldMismatch,
    NotCoprime,
    NotPrime,
)

logger = logging.getLogger(__name__)

# Largest field order for which lookup tables are built.
MAX_FIELD_ORDER = 256

_X = symbols("x")


class FieldSpec(BaseModel):
    """A concrete finite field F_{p^f} with a fixed modulus."""

    model_config = ConfigDict(frozen=True)

    p: int = Field(..., description="Prime characteristic")
    f: int = Field(..., description="Extension degree over Z_p", ge=1)
    modulus: Tuple[int, ...] = Field(
        ..., description="Monic irreducible modulus, constant term first"
    )

    @field_validator("modulus")
    @classmethod
    def validate_modulus(cls, v):
        if not v or v[-1] != 1:
            raise ValueError("modulus must be monic")
        return tuple(int(c) for c in v)

    @property
    def order(self) -> int:
        return self.p**self.f

    @property
    def tables(self) -> "FieldTables":
        return field_tables(self)

    def elem(self, value: Union[int, Sequence[int]]) -> "Fq":
        """Build an element from a coefficient list or from an integer of Z."""
        if isinstance(value, (int, np.integer)):
            return Fq(self, (int(value) % self.p,) + (0,) * (self.f - 1))
        coeffs = tuple(int(c) % self.p for c in value)
        if len(coeffs) != self.f:
            raise FieldMismatch(f"expected {self.f} coefficients, got {len(coeffs)}")
        return Fq(self, coeffs)

    def from_code(self, code: int) -> "Fq":
        return Fq(self, decode(self, code))

    def embed_int(self, k: int) -> int:
        """Code of the image of the integer k (so -1 maps to p-1)."""
        return int(k) % self.p

    def zero(self) -> "Fq":
        return self.from_code(0)

    def one(self) -> "Fq":
        return self.from_code(1)

    def __str__(self) -> str:
        return f"F_{self.order}"


@dataclass(frozen=True)
class Fq:
    """An element of a FieldSpec in polynomial representation."""

    field: FieldSpec
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if any(not 0 <= c < self.field.p for c in self.coeffs):
            raise FieldMismatch(f"coefficients {self.coeffs} out of range mod {self.field.p}")

    @property
    def code(self) -> int:
        return encode(self.field, self.coeffs)

    def __add__(self, other: "Fq") -> "Fq":
        return add(self, other)

    def __mul__(self, other: "Fq") -> "Fq":
        return mul(self, other)

    def __neg__(self) -> "Fq":
        return neg(self)

    def __repr__(self) -> str:
        return f"Fq({list(self.coeffs)} in {self.field})"


@dataclass(frozen=True)
class FieldTables:
    """Lookup tables over element codes."""

    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray
    log: np.ndarray
    exp: np.ndarray
    primitive: int
    conj: Optional[np.ndarray]

    def power(self, code: int, k: int) -> int:
        if code == 0:
            return 0 if k > 0 else 1
        order = len(self.exp)
        return int(self.exp[(int(self.log[code]) * k) % order])

    def is_square(self, code: int) -> bool:
        if code == 0:
            return True
        if len(self.exp) % 2:
            return True
        return int(self.log[code]) % 2 == 0

    def sub(self, a, b):
        return self.add[a, self.neg[b]]


def encode(field: FieldSpec, coeffs: Sequence[int]) -> int:
    code = 0
    for c in reversed(coeffs):
        code = code * field.p + int(c)
    return code


def decode(field: FieldSpec, code: int) -> Tuple[int, ...]:
    coeffs = []
    for _ in range(field.f):
        code, c = divmod(int(code), field.p)
        coeffs.append(c)
    return tuple(coeffs)


def _polymulmod(a: Sequence[int], b: Sequence[int], modulus: Sequence[int], p: int) -> Tuple[int, ...]:
    f = len(modulus) - 1
    prod = [0] * (2 * f - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for k in range(len(prod) - 1, f - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            for i in range(f):
                prod[k - f + i] = (prod[k - f + i] - c * modulus[i]) % p
    return tuple(prod[:f])


def _least_irreducible(p: int, f: int) -> Tuple[int, ...]:
    if f == 1:
        return (0, 1)
    # product() walks (c_{f-1}, ..., c_0) lexicographically, most significant first.
    for high_first in itertools.product(range(p), repeat=f):
        if Poly([1, *high_first], _X, modulus=p).is_irreducible:
            return tuple(reversed(high_first)) + (1,)
    raise NotPrime(f"no irreducible polynomial of degree {f} over Z_{p}")


@lru_cache(maxsize=None)
def make_field(p: int, f: int = 1, budget: int = MAX_FIELD_ORDER) -> FieldSpec:
    """Return the canonical FieldSpec for F_{p^f}."""
    if f < 1:
        raise DegreeZero(f"extension degree must be >= 1, got {f}")
    if not isprime(p):
        raise NotPrime(f"{p} is not prime")
    if p**f > budget:
        raise BudgetExceeded(f"field order {p}^{f} exceeds the budget {budget}")
    modulus = _least_irreducible(p, f)
    logger.debug(f"Built F_{p**f} with modulus {modulus}")
    return FieldSpec(p=p, f=f, modulus=modulus)


def field_for(q: int) -> FieldSpec:
    """The field with q elements, q a prime power."""
    factors = factorint(q)
    if len(factors) != 1:
        raise NotPrime(f"{q} is not a prime power")
    ((p, f),) = factors.items()
    return make_field(int(p), int(f))


@lru_cache(maxsize=None)
def field_tables(field: FieldSpec) -> FieldTables:
    p, f, q = field.p, field.f, field.order
    digits = np.array([decode(field, c) for c in range(q)], dtype=np.int64).reshape(q, f)
    weights = p ** np.arange(f, dtype=np.int64)
    add_t = (((digits[:, None, :] + digits[None, :, :]) % p) @ weights).astype(np.uint16)
    neg_t = (((-digits) % p) @ weights).astype(np.uint16)

    if f == 1:
        primitive = int(primitive_root(p)) if p > 2 else 1
    else:
        primitive = _find_primitive(field)
    exp = np.zeros(q - 1, dtype=np.int64)
    log = np.zeros(q, dtype=np.int64)
    cur = (1,) + (0,) * (f - 1)
    gen = decode(field, primitive)
    for k in range(q - 1):
        code = encode(field, cur)
        exp[k] = code
        log[code] = k
        cur = _polymulmod(cur, gen, field.modulus, p)

    logs = log[1:]
    mul_t = np.zeros((q, q), dtype=np.uint16)
    mul_t[1:, 1:] = exp[(logs[:, None] + logs[None, :]) % (q - 1)]
    inv_t = np.zeros(q, dtype=np.uint16)
    inv_t[1:] = exp[(-logs) % (q - 1)]

    conj = None
    if f % 2 == 0:
        s = p ** (f // 2)
        conj = np.zeros(q, dtype=np.uint16)
        conj[1:] = exp[(logs * s) % (q - 1)]
    return FieldTables(
        add=add_t, mul=mul_t, neg=neg_t, inv=inv_t, log=log, exp=exp,
        primitive=primitive, conj=conj,
    )


def _find_primitive(field: FieldSpec) -> int:
    one = (1,) + (0,) * (field.f - 1)
    target = field.order - 1
    for code in range(2, field.order):
        g = decode(field, code)
        cur, k = g, 1
        while cur != one:
            cur = _polymulmod(cur, g, field.modulus, field.p)
            k += 1
        if k == target:
            return code
    raise ValueError(f"no primitive element found in {field}")


def _check_same(a: Fq, b: Fq) -> None:
    if a.field != b.field:
        raise FieldMismatch(f"{a.field} vs {b.field}")


def add(a: Fq, b: Fq) -> Fq:
    _check_same(a, b)
    return a.field.from_code(int(a.field.tables.add[a.code, b.code]))


def mul(a: Fq, b: Fq) -> Fq:
    _check_same(a, b)
    return a.field.from_code(int(a.field.tables.mul[a.code, b.code]))


def neg(a: Fq) -> Fq:
    return a.field.from_code(int(a.field.tables.neg[a.code]))


def inv(a: Fq) -> Fq:
    if a.code == 0:
        raise DivisionByZero("inverse of zero")
    return a.field.from_code(int(a.field.tables.inv[a.code]))


def frobenius(a: Fq, subdegree: int) -> Fq:
    """Return a^q where F_q is the subfield of degree ``subdegree``."""
    if a.field.f != 2 * subdegree:
        raise FieldMismatch(
            f"{a.field} is not a quadratic extension of a degree-{subdegree} subfield"
        )
    return a.field.from_code(int(a.field.tables.conj[a.code]))


def e_value(r: int, n: int) -> int:
    """e(r, n): prime first, then the base.

    For odd r this is the multiplicative order of n modulo r. For r = 2 and
    odd n, e(2, n) = 1 when n = 1 mod 4 and 2 when n = -1 mod 4.
    """
    if not isprime(r):
        raise NotPrime(f"e(r, n) needs a prime r, got {r}")
    if r == 2:
        if n % 2 == 0:
            raise EvenBaseForRTwo(f"e(2, n) needs odd n, got {n}")
        return 1 if n % 4 == 1 else 2
    if gcd(r, n) != 1:
        raise NotCoprime(f"gcd({r}, {n}) != 1")
    return int(n_order(n % r, r))


def nonsquare(field: FieldSpec) -> int:
    """Least code that is not a square (odd q only)."""
    t = field.tables
    for code in range(1, field.order):
        if not t.is_square(code):
            return code
    raise ValueError(f"{field} has no non-squares")


def field_elements(field: FieldSpec) -> List[Fq]:
    return [field.from_code(c) for c in range(field.order)]
