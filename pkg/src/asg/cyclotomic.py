"""Exact arithmetic over cyclotomic integer rings and polynomials.

A value of order m lives in Z[zeta_m], stored in the power basis
1, zeta, ..., zeta^(phi(m)-1) modulo the m-th cyclotomic polynomial.
Order 1 is the plain integers.  Order-1 values promote automatically when
mixed with a higher order; two distinct orders > 1 do not mix.

Everything here is immutable and exact; there is no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from .errors import ExactDivisionFailure, NotRationalInteger, OrderMismatch

MAX_CYCLOTOMIC_ORDER = 64


def _int_poly_div_exact(num, den):
    # long division in Z[x], asserting zero remainder and exact steps
    num = list(num)
    dn, dd = len(num) - 1, len(den) - 1
    quot = [0] * (dn - dd + 1)
    for k in range(dn - dd, -1, -1):
        lead = num[k + dd]
        q, r = divmod(lead, den[dd])
        if r:
            raise ExactDivisionFailure("integer polynomial division not exact")
        quot[k] = q
        for i, c in enumerate(den):
            num[k + i] -= q * c
    if any(num[: dd]) or any(num[dd:]):
        raise ExactDivisionFailure("integer polynomial division left a remainder")
    return quot


def _divisors(m):
    return [d for d in range(1, m + 1) if m % d == 0]


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m):
    """Coefficients of Phi_m (low degree first), from (x^m - 1)/prod Phi_d."""
    if not 1 <= m <= MAX_CYCLOTOMIC_ORDER:
        raise OrderMismatch(f"cyclotomic order {m} outside 1..{MAX_CYCLOTOMIC_ORDER}")
    if m == 1:
        return (-1, 1)
    num = [-1] + [0] * (m - 1) + [1]
    for d in _divisors(m)[:-1]:
        num = _int_poly_div_exact(num, cyclotomic_polynomial(d))
    return tuple(num)


@lru_cache(maxsize=None)
def euler_phi(m):
    return len(cyclotomic_polynomial(m)) - 1


@lru_cache(maxsize=None)
def _power_rows(m):
    """Row k = coordinates of zeta^k in the power basis, for k = 0..2*phi-2."""
    phi_m = euler_phi(m)
    mod = cyclotomic_polynomial(m)
    # zeta^phi = -(c_0 + c_1 z + ... + c_{phi-1} z^{phi-1}) since Phi_m is monic
    rows = [tuple(1 if i == k else 0 for i in range(phi_m)) for k in range(phi_m)]
    for _ in range(phi_m - 1):
        prev = rows[-1]
        shifted = [0] + list(prev[:-1])
        carry = prev[-1]
        if carry:
            for i in range(phi_m):
                shifted[i] -= carry * mod[i]
        rows.append(tuple(shifted))
    return tuple(rows)


@dataclass(frozen=True)
class CycInt:
    """Element of Z[zeta_m] in the power basis; order 1 = plain integer."""

    order: int
    coeffs: tuple

    @staticmethod
    def integer(n, order=1):
        phi_m = euler_phi(order)
        return CycInt(order, (n,) + (0,) * (phi_m - 1))

    @staticmethod
    def zeta(m, power=1):
        power %= m
        phi_m = euler_phi(m)
        if power < phi_m:
            return CycInt(m, tuple(1 if i == power else 0 for i in range(phi_m)))
        return CycInt(m, _power_rows(m)[power])

    @staticmethod
    def coerce(x, order=1):
        if isinstance(x, CycInt):
            return x
        if isinstance(x, int):
            return CycInt.integer(x, order)
        raise TypeError(f"cannot coerce {x!r} to CycInt")

    def promote(self, order):
        if self.order == order:
            return self
        if self.order != 1:
            raise OrderMismatch(f"cannot mix orders {self.order} and {order}")
        return CycInt.integer(self.coeffs[0], order)

    def _pair(self, other):
        other = CycInt.coerce(other, self.order)
        if self.order == other.order:
            return self, other
        if self.order == 1:
            return self.promote(other.order), other
        if other.order == 1:
            return self, other.promote(self.order)
        raise OrderMismatch(f"cannot mix orders {self.order} and {other.order}")

    def __add__(self, other):
        a, b = self._pair(other)
        return CycInt(a.order, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycInt(self.order, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        return self + (-CycInt.coerce(other, self.order))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._pair(other)
        if a.order == 1:
            return CycInt(1, (a.coeffs[0] * b.coeffs[0],))
        phi_m = len(a.coeffs)
        conv = [0] * (2 * phi_m - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        conv[i + j] += x * y
        rows = _power_rows(a.order)
        out = [0] * phi_m
        for k, c in enumerate(conv):
            if c:
                row = rows[k]
                for i in range(phi_m):
                    out[i] += c * row[i]
        return CycInt(a.order, tuple(out))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, CycInt):
            return NotImplemented
        try:
            a, b = self._pair(other)
        except OrderMismatch:
            return False
        return a.coeffs == b.coeffs

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.order, self.coeffs))

    def is_zero(self):
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def is_rational(self):
        return not any(self.coeffs[1:])

    def int_value(self):
        if not self.is_rational():
            raise NotRationalInteger(0)
        return self.coeffs[0]

    def galois(self, k):
        """Apply zeta -> zeta^k; requires gcd(k, order) = 1."""
        m = self.order
        if m == 1:
            return self
        if gcd(k, m) != 1:
            raise OrderMismatch(f"{k} is not a unit modulo {m}")
        out = CycInt.integer(0, m)
        for i, c in enumerate(self.coeffs):
            if c:
                out = out + c * CycInt.zeta(m, (i * k) % m)
        return out

    def conjugate(self):
        return self.galois(self.order - 1) if self.order > 1 else self

    def exact_div(self, other):
        """Exact quotient in the ring; raises ExactDivisionFailure otherwise."""
        other = CycInt.coerce(other, self.order)
        a, b = self._pair(other)
        if b.is_zero():
            raise ZeroDivisionError("division by zero CycInt")
        m = a.order
        if m == 1:
            q, r = divmod(a.coeffs[0], b.coeffs[0])
            if r:
                raise ExactDivisionFailure(f"{a.coeffs[0]} not divisible by {b.coeffs[0]}")
            return CycInt(1, (q,))
        # multiply by the product of the other Galois conjugates of b, then
        # divide coordinatewise by the rational integer norm
        conj = CycInt.integer(1, m)
        for k in range(2, m + 1):
            if gcd(k, m) == 1 and k % m != 1:
                conj = conj * b.galois(k)
        norm = (b * conj).int_value()
        num = a * conj
        out = []
        for i, c in enumerate(num.coeffs):
            q, r = divmod(c, norm)
            if r:
                raise ExactDivisionFailure("cyclotomic division not exact")
            out.append(q)
        return CycInt(m, tuple(out))

    def __repr__(self):
        if self.is_rational():
            return str(self.coeffs[0])
        return f"CycInt({self.order}, {self.coeffs})"


_NEG_INF = float("-inf")


@dataclass(frozen=True)
class CycPoly:
    """Polynomial in one variable with CycInt coefficients, low degree first."""

    order: int
    coeffs: tuple

    @staticmethod
    def make(order, coeffs):
        cs = [CycInt.coerce(c, order).promote(order) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        return CycPoly(order, tuple(cs))

    @staticmethod
    def from_ints(coeffs):
        return CycPoly.make(1, [CycInt.integer(c) for c in coeffs])

    @staticmethod
    def zero(order=1):
        return CycPoly(order, ())

    @staticmethod
    def one(order=1):
        return CycPoly.make(order, [1])

    @staticmethod
    def coerce(x, order=1):
        if isinstance(x, CycPoly):
            return x
        if isinstance(x, (CycInt, int)):
            c = CycInt.coerce(x, order)
            return CycPoly.make(c.order, [c])
        raise TypeError(f"cannot coerce {x!r} to CycPoly")

    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else _NEG_INF

    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def promote(self, order):
        if self.order == order:
            return self
        if self.order != 1:
            raise OrderMismatch(f"cannot mix orders {self.order} and {order}")
        return CycPoly.make(order, self.coeffs)

    def _pair(self, other):
        other = CycPoly.coerce(other, self.order)
        if self.order == other.order:
            return self, other
        if self.order == 1:
            return self.promote(other.order), other
        if other.order == 1:
            return self, other.promote(self.order)
        raise OrderMismatch(f"cannot mix orders {self.order} and {other.order}")

    def __add__(self, other):
        a, b = self._pair(other)
        n = max(len(a.coeffs), len(b.coeffs))
        zero = CycInt.integer(0, a.order)
        ca = list(a.coeffs) + [zero] * (n - len(a.coeffs))
        cb = list(b.coeffs) + [zero] * (n - len(b.coeffs))
        return CycPoly.make(a.order, [x + y for x, y in zip(ca, cb)])

    __radd__ = __add__

    def __neg__(self):
        return CycPoly(self.order, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-CycPoly.coerce(other, self.order))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._pair(other)
        if a.is_zero() or b.is_zero():
            return CycPoly.zero(a.order)
        if a.order == 1:
            # fast path: plain integer convolution
            ca = [c.coeffs[0] for c in a.coeffs]
            cb = [c.coeffs[0] for c in b.coeffs]
            conv = [0] * (len(ca) + len(cb) - 1)
            for i, x in enumerate(ca):
                if x:
                    for j, y in enumerate(cb):
                        conv[i + j] += x * y
            return CycPoly.from_ints(conv)
        conv = [CycInt.integer(0, a.order)] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, x in enumerate(a.coeffs):
            if not x.is_zero():
                for j, y in enumerate(b.coeffs):
                    if not y.is_zero():
                        conv[i + j] = conv[i + j] + x * y
        return CycPoly.make(a.order, conv)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = CycPoly.one(self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, CycInt)):
            other = CycPoly.coerce(other, self.order)
        if not isinstance(other, CycPoly):
            return NotImplemented
        try:
            a, b = self._pair(other)
        except OrderMismatch:
            return False
        return a.coeffs == b.coeffs

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def evaluate(self, x):
        x = CycInt.coerce(x, self.order)
        acc = CycInt.integer(0, max(self.order, x.order))
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def conjugate(self):
        return CycPoly(self.order, tuple(c.conjugate() for c in self.coeffs))

    def exact_div(self, other):
        """Exact polynomial quotient; raises ExactDivisionFailure otherwise."""
        a, b = self._pair(other)
        if b.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if a.is_zero():
            return CycPoly.zero(a.order)
        da, db = a.degree(), b.degree()
        if da < db:
            raise ExactDivisionFailure("degree too small for exact division")
        num = list(a.coeffs)
        zero = CycInt.integer(0, a.order)
        quot = [zero] * (da - db + 1)
        lead = b.coeffs[-1]
        for k in range(da - db, -1, -1):
            q = num[k + db].exact_div(lead)
            quot[k] = q
            if not q.is_zero():
                for i, c in enumerate(b.coeffs):
                    num[k + i] = num[k + i] - q * c
        if any(not c.is_zero() for c in num):
            raise ExactDivisionFailure("polynomial division left a remainder")
        return CycPoly.make(a.order, quot)

    def to_integer_poly(self):
        """Demote to an order-1 polynomial; every coefficient must be rational."""
        out = []
        for i, c in enumerate(self.coeffs):
            if not c.is_rational():
                raise NotRationalInteger(i)
            out.append(c.coeffs[0])
        return CycPoly.from_ints(out)

    def int_coeffs(self):
        return tuple(c.int_value() for c in self.coeffs)

    def __repr__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            if c.is_rational():
                cs = str(c.coeffs[0])
            else:
                cs = "(" + "+".join(f"{x}*z^{k}" if k else str(x)
                                    for k, x in enumerate(c.coeffs) if x) + ")"
            parts.append(cs if i == 0 else (f"{cs}*t" if i == 1 else f"{cs}*t^{i}"))
        return " + ".join(parts)


def kronecker(a, b):
    """Kronecker product of two matrices (entries CycInt or CycPoly), block row-major."""
    if not a or not b:
        return []
    out = []
    for arow in a:
        for brow in b:
            row = []
            for x in arow:
                for y in brow:
                    row.append(x * y)
            out.append(row)
    return out


def _as_poly_matrix(rows):
    if not rows:
        return []
    order = 1
    for row in rows:
        for x in row:
            if isinstance(x, (CycInt, CycPoly)) and x.order > 1:
                order = x.order
    return [[CycPoly.coerce(x, order).promote(order) for x in row] for row in rows]


def determinant(rows):
    """Exact determinant by fraction-free (Bareiss) elimination.

    Entries may be CycPoly, CycInt or int; the result is a CycPoly.  All
    interior divisions are exact by construction; a failed division
    signals a bug and raises ExactDivisionFailure.
    """
    work = _as_poly_matrix(rows)
    n = len(work)
    if n == 0:
        return CycPoly.one()
    order = work[0][0].order
    for row in work:
        if len(row) != n:
            raise ValueError("determinant of a non-square matrix")
    sign = 1
    prev = CycPoly.one(order)
    for k in range(n - 1):
        pivot_row = next((i for i in range(k, n) if not work[i][k].is_zero()), None)
        if pivot_row is None:
            return CycPoly.zero(order)
        if pivot_row != k:
            work[k], work[pivot_row] = work[pivot_row], work[k]
            sign = -sign
        pivot = work[k][k]
        for i in range(k + 1, n):
            rik = work[i][k]
            for j in range(k + 1, n):
                num = pivot * work[i][j] - rik * work[k][j]
                work[i][j] = num.exact_div(prev)
            work[i][k] = CycPoly.zero(order)
        prev = pivot
    det = work[n - 1][n - 1]
    return -det if sign < 0 else det


def laplace_determinant(rows):
    """Cofactor-expansion determinant; the independent oracle for small matrices."""
    work = _as_poly_matrix(rows)
    n = len(work)
    if n == 0:
        return CycPoly.one()

    def rec(mat):
        k = len(mat)
        if k == 1:
            return mat[0][0]
        order = mat[0][0].order
        acc = CycPoly.zero(order)
        for j in range(k):
            c = mat[0][j]
            if c.is_zero():
                continue
            minor = [row[:j] + row[j + 1:] for row in mat[1:]]
            term = c * rec(minor)
            acc = acc + (term if j % 2 == 0 else -term)
        return acc

    return rec(work)


def identity_matrix(n, order=1):
    one = CycPoly.one(order)
    zero = CycPoly.zero(order)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def poly_to_json(p):
    """Serialize per the polynomial JSON convention."""
    if p.order == 1:
        return {
            "variable": "t",
            "ring": {"kind": "integer"},
            "coefficients": [c.coeffs[0] for c in p.coeffs],
        }
    return {
        "variable": "t",
        "ring": {"kind": "cyclotomic", "order": p.order},
        "coefficients": [list(c.coeffs) for c in p.coeffs],
    }


def poly_from_json(obj):
    ring = obj["ring"]
    if ring["kind"] == "integer":
        return CycPoly.from_ints(obj["coefficients"])
    m = ring["order"]
    return CycPoly.make(m, [CycInt(m, tuple(v)) for v in obj["coefficients"]])
