"""Finite fields GF(p^n) with q <= 2^16.

Elements are plain integers in [0, q).  The base-p digits of an element are
the coefficients of its polynomial representative, constant term first, so
in GF(4) with modulus x^2+x+1 the element x is 2 and x+1 is 3.

Scalar arithmetic goes through :class:`FieldSpec` methods, which also accept
numpy integer arrays and work elementwise.  Matrix kernels live in
:mod:`fziplab.linalg`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

MAX_ORDER = 1 << 16
# Extension fields at most this large get full addition/multiplication tables.
_TABLE_LIMIT = 1024


class FieldError(ValueError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _prime_factors(m: int) -> list[int]:
    out = []
    f = 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1
    if m > 1:
        out.append(m)
    return out


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial m, coefficients low-to-high."""
    a = [c % p for c in a]
    dm = len(m) - 1
    for top in range(len(a) - 1, dm - 1, -1):
        c = a[top]
        if c:
            shift = top - dm
            for i, mi in enumerate(m):
                a[shift + i] = (a[shift + i] - c * mi) % p
    return a[:dm] if dm > 0 else []


def is_irreducible(modulus: list[int] | tuple[int, ...], p: int) -> bool:
    """Brute-force test: no monic factor of degree 1..deg/2 divides modulus."""
    m = list(modulus)
    deg = len(m) - 1
    if deg < 1 or m[-1] != 1:
        return False
    for d in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not any(_poly_mod(m, list(low) + [1], p)):
                return False
    return True


def _smallest_irreducible(p: int, n: int) -> tuple[int, ...]:
    if n == 1:
        return (0, 1)
    # Lexicographic order on the low-to-high coefficient list: the constant
    # term is the most significant key, so iterate it in the outermost loop.
    for low in itertools.product(range(p), repeat=n):
        cand = list(low) + [1]
        if is_irreducible(cand, p):
            return tuple(cand)
    raise FieldError(f"no irreducible polynomial of degree {n} over GF({p})")


@dataclass(frozen=True)
class FieldSpec:
    p: int
    n: int
    modulus: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise FieldError(f"characteristic {self.p} is not prime")
        if self.n < 1:
            raise FieldError("extension degree must be at least 1")
        if self.p ** self.n > MAX_ORDER:
            raise FieldError(f"field of order {self.p}^{self.n} exceeds 2^16")
        object.__setattr__(self, "modulus", tuple(int(c) for c in self.modulus))
        if len(self.modulus) != self.n + 1 or any(not 0 <= c < self.p for c in self.modulus):
            raise FieldError("modulus must have n+1 coefficients in [0, p)")
        if self.n > 1 and not is_irreducible(self.modulus, self.p):
            raise FieldError(f"modulus {list(self.modulus)} is not monic irreducible")
        if self.n == 1 and self.modulus[1] != 1:
            raise FieldError("modulus must be monic")

    @property
    def q(self) -> int:
        return self.p ** self.n

    @property
    def is_prime_field(self) -> bool:
        return self.n == 1

    def __repr__(self):
        return f"GF({self.p}^{self.n})" if self.n > 1 else f"GF({self.p})"

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "modulus": list(self.modulus)}

    # ----------------------------------------------------------------- tables

    @cached_property
    def _pows(self) -> np.ndarray:
        return self.p ** np.arange(self.n, dtype=np.int64)

    @cached_property
    def _digits(self) -> np.ndarray:
        """q x n array of base-p digits of every element."""
        vals = np.arange(self.q, dtype=np.int64)
        return (vals[:, None] // self._pows[None, :]) % self.p

    def _mulmat(self, b: int) -> np.ndarray:
        """n x n matrix over GF(p) of multiplication by b on digit vectors."""
        p, n = self.p, self.n
        cols = []
        bd = [(b // p**i) % p for i in range(n)]
        for j in range(n):
            prod = [0] * (2 * n)
            for i, c in enumerate(bd):
                prod[i + j] += c
            cols.append(_poly_mod(prod, list(self.modulus), p))
        return np.array(cols, dtype=np.int64).T

    @cached_property
    def _exp_log(self) -> tuple[np.ndarray, np.ndarray]:
        q, p = self.q, self.p
        order = q - 1
        factors = _prime_factors(order) if order > 1 else []
        for g in range(2 if q > 2 else 1, q):
            mg = self._mulmat(g)
            if all(self._scalar_pow(g, order // f) != 1 for f in factors):
                break
        else:  # q == 2
            mg = self._mulmat(1)
        exp = np.zeros(order, dtype=np.int64)
        v = np.zeros(self.n, dtype=np.int64)
        v[0] = 1
        for k in range(order):
            exp[k] = int(v @ self._pows)
            v = (mg @ v) % p
        log = np.zeros(q, dtype=np.int64)
        log[exp] = np.arange(order, dtype=np.int64)
        return exp, log

    def _scalar_pow(self, a: int, e: int) -> int:
        result, base = 1, a
        while e:
            if e & 1:
                result = self._slow_mul(result, base)
            base = self._slow_mul(base, base)
            e >>= 1
        return result

    def _slow_mul(self, a: int, b: int) -> int:
        v = np.array([(a // self.p**i) % self.p for i in range(self.n)], dtype=np.int64)
        return int(((self._mulmat(b) @ v) % self.p) @ self._pows)

    @cached_property
    def _tables(self) -> dict:
        q, p = self.q, self.p
        t: dict = {}
        if self.n == 1:
            vals = np.arange(q, dtype=np.int64)
            t["neg"] = (-vals) % p
            inv = np.zeros(q, dtype=np.int64)
            for a in range(1, q):
                inv[a] = pow(a, -1, p)
            t["inv"] = inv
            t["frob"] = vals.copy()
            return t
        exp, log = self._exp_log
        order = q - 1
        D = self._digits
        t["neg"] = ((-D) % p) @ self._pows
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = exp[(-log[1:]) % order]
        t["inv"] = inv
        frob = np.zeros(q, dtype=np.int64)
        frob[1:] = exp[(log[1:] * p) % order]
        t["frob"] = frob
        if q <= _TABLE_LIMIT:
            t["add"] = ((D[:, None, :] + D[None, :, :]) % p) @ self._pows
            mul = np.zeros((q, q), dtype=np.int64)
            mul[1:, 1:] = exp[(log[1:, None] + log[None, 1:]) % order]
            t["mul"] = mul
        return t

    # ------------------------------------------------------ elementwise ops

    def add(self, a, b):
        if self.n == 1:
            return (np.asarray(a, dtype=np.int64) + b) % self.p if _is_array(a, b) else (a + b) % self.p
        t = self._tables
        if "add" in t:
            r = t["add"][a, b]
        elif self.p == 2:
            r = np.bitwise_xor(a, b)
        else:
            D = self._digits
            r = ((D[a] + D[b]) % self.p) @ self._pows
        return _unwrap(r, a, b)

    def neg(self, a):
        if self.n == 1:
            return (-np.asarray(a, dtype=np.int64)) % self.p if _is_array(a) else (-a) % self.p
        return _unwrap(self._tables["neg"][a], a)

    def sub(self, a, b):
        if self.n == 1:
            return (np.asarray(a, dtype=np.int64) - b) % self.p if _is_array(a, b) else (a - b) % self.p
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.n == 1:
            return (np.asarray(a, dtype=np.int64) * b) % self.p if _is_array(a, b) else (a * b) % self.p
        t = self._tables
        if "mul" in t:
            return _unwrap(t["mul"][a, b], a, b)
        exp, log = self._exp_log
        a_ = np.asarray(a, dtype=np.int64)
        b_ = np.asarray(b, dtype=np.int64)
        r = exp[(log[a_] + log[b_]) % (self.q - 1)]
        r = np.where((a_ == 0) | (b_ == 0), 0, r)
        return _unwrap(r, a, b)

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("inverse of zero in a finite field")
        return _unwrap(self._tables["inv"][a], a)

    def frob(self, a):
        """Elementwise a -> a^p."""
        return _unwrap(self._tables["frob"][a], a)

    def power(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e > 0 else 1
        if self.n == 1:
            return pow(int(a), e, self.p)
        exp, log = self._exp_log
        return int(exp[(int(log[a]) * e) % (self.q - 1)])

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, value)


def _is_array(*xs) -> bool:
    return any(isinstance(x, np.ndarray) for x in xs)


def _unwrap(r, *inputs):
    if _is_array(*inputs):
        return np.asarray(r, dtype=np.int64)
    return int(r)


def make_field(p: int, n: int = 1) -> FieldSpec:
    """GF(p^n) with the lexicographically smallest monic irreducible modulus."""
    if not is_prime(p):
        raise FieldError(f"characteristic {p} is not prime")
    if n < 1:
        raise FieldError("extension degree must be at least 1")
    if p ** n > MAX_ORDER:
        raise FieldError(f"field of order {p}^{n} exceeds 2^16")
    return FieldSpec(p, n, _smallest_irreducible(p, n))


@dataclass(frozen=True)
class FieldElement:
    field: FieldSpec
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise FieldError(f"{self.value} is not an element of {self.field!r}")

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise FieldError("field mismatch")

    def __add__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.add(self.value, other.value))

    def __sub__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.sub(self.value, other.value))

    def __mul__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.mul(self.value, other.value))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(self.field, self.field.power(self.value, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def frobenius(self) -> "FieldElement":
        return FieldElement(self.field, self.field.frob(self.value))

    def __int__(self):
        return self.value


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def frobenius(a: FieldElement) -> FieldElement:
    return a.frobenius()
