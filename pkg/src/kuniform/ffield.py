"""Finite fields GF(p^t) with exact arithmetic.

Elements are polynomials over Z_p reduced modulo a monic irreducible
polynomial of degree t.  Every element also has a canonical integer index
``sum(coeffs[j] * p**j)``, so GF(9) enumerates as
0, 1, 2, x, x+1, x+2, 2x, 2x+1, 2x+2.

Builders elsewhere in the package work on indices through the dense
lookup tables exposed by :class:`Field` (``add_table``, ``mul_table`` ...);
:class:`FieldElement` is the value-level interface.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

MAX_DEGREE = 4

# Pinned presentations, keyed by (p, t).  GF(8) follows x^3 + x^2 + 1.
# GF(9) uses x^2 + 1: the commonly quoted x^2 + 2 has the root 1 over Z_3.
DEFAULT_POLYS: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 3): (1, 0, 1, 1),
    (3, 2): (1, 0, 1),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power(d: int) -> tuple[int, int] | None:
    """Return ``(p, t)`` with ``d == p**t``, or None if d is not a prime power."""
    if d < 2:
        return None
    for p in range(2, d + 1):
        if d % p == 0:
            if not is_prime(p):
                return None
            t, rest = 0, d
            while rest % p == 0:
                rest //= p
                t += 1
            return (p, t) if rest == 1 else None
    return None


def _poly_mod(num: list[int], den: tuple[int, ...], p: int) -> list[int]:
    """Remainder of num / den over Z_p (coefficient lists, constant first)."""
    num = [c % p for c in num]
    deg_den = len(den) - 1
    inv_lead = pow(den[-1], p - 2, p)
    for shift in range(len(num) - 1 - deg_den, -1, -1):
        coef = num[shift + deg_den] * inv_lead % p
        if coef:
            for j, c in enumerate(den):
                num[shift + j] = (num[shift + j] - coef * c) % p
    return num[:deg_den] if deg_den > 0 else []


def is_irreducible(poly: tuple[int, ...], p: int) -> bool:
    """Brute-force irreducibility test: no monic factor of degree 1..t//2."""
    t = len(poly) - 1
    if t < 1:
        return False
    if t == 1:
        return True
    for deg in range(1, t // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            divisor = tuple(low) + (1,)
            if not any(_poly_mod(list(poly), divisor, p)):
                return False
    return True


def smallest_irreducible(p: int, t: int) -> tuple[int, ...]:
    """Monic irreducible of degree t with the smallest base-p encoding of its low coefficients."""
    for code in range(p**t):
        low = [(code // p**j) % p for j in range(t)]
        poly = tuple(low) + (1,)
        if is_irreducible(poly, p):
            return poly
    raise ValueError(f"no irreducible polynomial of degree {t} over Z_{p}")


def format_poly(coeffs, var: str = "x") -> str:
    terms = []
    for j in range(len(coeffs) - 1, -1, -1):
        c = coeffs[j]
        if c == 0:
            continue
        if j == 0:
            terms.append(str(c))
        else:
            mono = var if j == 1 else f"{var}^{j}"
            terms.append(mono if c == 1 else f"{c}{mono}")
    return "+".join(terms) if terms else "0"


class Field:
    """The finite field GF(p^t).

    Parameters
    ----------
    p : int
        Prime characteristic.
    t : int
        Extension degree, 1 <= t <= 4.
    poly : sequence of int, optional
        Monic modulus of degree t, constant term first.  Defaults to the
        pinned presentation for (2, 3) and (3, 2), otherwise the smallest
        irreducible found by :func:`smallest_irreducible`.
    """

    def __init__(self, p: int, t: int = 1, poly=None):
        if not is_prime(p):
            raise ValueError(f"characteristic {p} is not prime")
        if t < 1:
            raise ValueError("extension degree must be >= 1")
        if t > MAX_DEGREE:
            raise ValueError(f"extension degree {t} > {MAX_DEGREE} is not supported")
        if poly is None:
            poly = DEFAULT_POLYS.get((p, t)) or smallest_irreducible(p, t)
        poly = tuple(int(c) % p for c in poly)
        if len(poly) != t + 1 or poly[-1] != 1:
            raise ValueError(f"modulus must be monic of degree {t}, got {format_poly(poly)}")
        if not is_irreducible(poly, p):
            raise ValueError(f"{format_poly(poly)} is reducible over Z_{p}")
        self.p = p
        self.t = t
        self.poly = poly
        self.d = p**t

    def __repr__(self) -> str:
        if self.t == 1:
            return f"GF({self.d})"
        return f"GF({self.d}; {format_poly(self.poly)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and (self.p, self.t, self.poly) == (other.p, other.t, other.poly)

    def __hash__(self) -> int:
        return hash((self.p, self.t, self.poly))

    def __len__(self) -> int:
        return self.d

    # -- encoding ---------------------------------------------------------
    def coeffs_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.d:
            raise ValueError(f"index {index} out of range for {self!r}")
        return tuple((index // self.p**j) % self.p for j in range(self.t))

    def index_of(self, coeffs) -> int:
        return sum((int(c) % self.p) * self.p**j for j, c in enumerate(coeffs))

    def element(self, index: int) -> FieldElement:
        return FieldElement(self, self.coeffs_of(index))

    def from_poly(self, coeffs) -> FieldElement:
        """Element from an arbitrary coefficient list, reduced mod the modulus."""
        rem = _poly_mod(list(coeffs) + [0] * self.t, self.poly, self.p)
        return FieldElement(self, tuple(rem))

    @property
    def zero(self) -> FieldElement:
        return self.element(0)

    @property
    def one(self) -> FieldElement:
        return self.element(1)

    def elements(self) -> list[FieldElement]:
        return [self.element(i) for i in range(self.d)]

    # -- raw arithmetic on coefficient tuples -------------------------------
    def _add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def _mul(self, a, b):
        prod = [0] * (2 * self.t - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        return tuple(_poly_mod(prod + [0], self.poly, self.p))

    # -- index tables ------------------------------------------------------
    @cached_property
    def add_table(self) -> np.ndarray:
        c = [self.coeffs_of(i) for i in range(self.d)]
        tab = np.empty((self.d, self.d), dtype=np.int64)
        for a in range(self.d):
            for b in range(self.d):
                tab[a, b] = self.index_of(self._add(c[a], c[b]))
        tab.setflags(write=False)
        return tab

    @cached_property
    def mul_table(self) -> np.ndarray:
        c = [self.coeffs_of(i) for i in range(self.d)]
        tab = np.zeros((self.d, self.d), dtype=np.int64)
        for a in range(1, self.d):
            for b in range(a, self.d):
                tab[a, b] = tab[b, a] = self.index_of(self._mul(c[a], c[b]))
        tab.setflags(write=False)
        return tab

    @cached_property
    def neg_table(self) -> np.ndarray:
        tab = np.array([self.index_of(tuple(-x for x in self.coeffs_of(i))) for i in range(self.d)])
        tab.setflags(write=False)
        return tab

    @cached_property
    def inv_table(self) -> np.ndarray:
        """Multiplicative inverses by index; entry 0 is -1 (undefined)."""
        tab = np.full(self.d, -1, dtype=np.int64)
        rows, cols = np.nonzero(self.mul_table == 1)
        tab[rows] = cols
        tab.setflags(write=False)
        return tab

    @cached_property
    def trace_table(self) -> np.ndarray:
        """Absolute trace Tr(a) = a + a^p + ... + a^(p^(t-1)), as an integer in Z_p."""
        mul = self.mul_table
        add = self.add_table
        frob = np.ones(self.d, dtype=np.int64)
        for _ in range(self.p):
            frob = mul[frob, np.arange(self.d)]
        out = np.empty(self.d, dtype=np.int64)
        for a in range(self.d):
            acc, power = a, a
            for _ in range(self.t - 1):
                power = int(frob[power])
                acc = int(add[acc, power])
            coeffs = self.coeffs_of(int(acc))
            if any(coeffs[1:]):
                raise ArithmeticError("trace left the prime subfield")
            out[a] = coeffs[0]
        out.setflags(write=False)
        return out

    def sub_idx(self, a: int, b: int) -> int:
        return int(self.add_table[a, self.neg_table[b]])

    def to_json(self) -> dict:
        return {"p": self.p, "t": self.t, "poly": list(self.poly)}

    @classmethod
    def from_json(cls, obj: dict) -> Field:
        return cls(obj["p"], obj["t"], obj.get("poly"))


@dataclass(frozen=True)
class FieldElement:
    """An element of a :class:`Field`, stored by its coefficient vector."""

    field: Field = dc_field(repr=False)
    coeffs: tuple[int, ...]

    @property
    def index(self) -> int:
        return self.field.index_of(self.coeffs)

    def __int__(self) -> int:
        return self.index

    def __index__(self) -> int:
        return self.index

    def __repr__(self) -> str:
        return f"{format_poly(self.coeffs)} in {self.field!r}"

    def __str__(self) -> str:
        return format_poly(self.coeffs)

    def _check(self, other) -> FieldElement:
        if isinstance(other, int):
            return self.field.from_poly([other])
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.field != self.field:
            raise ValueError(f"field mismatch: {self.field!r} vs {other.field!r}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, self.field._add(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return FieldElement(self.field, tuple((-c) % p for c in self.coeffs))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, self.field._mul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        result, base = self.field.one, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inv(self) -> FieldElement:
        if not any(self.coeffs):
            raise ZeroDivisionError("inverse of zero")
        # a^(d-2) = a^-1 in the multiplicative group of order d-1
        return self ** (self.field.d - 2)

    def __truediv__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self * other.inv()

    def __bool__(self) -> bool:
        return any(self.coeffs)


def field_new(p: int, t: int = 1, poly=None) -> Field:
    return Field(p, t, poly)


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def neg(a: FieldElement) -> FieldElement:
    return -a


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inv()


def element_by_index(f: Field, i: int) -> FieldElement:
    return f.element(i)


def field_of_order(d: int) -> Field:
    pt = prime_power(d)
    if pt is None:
        raise ValueError(f"{d} is not a prime power")
    return Field(*pt)
