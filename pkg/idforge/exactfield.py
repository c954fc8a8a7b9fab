"""
# Identity Forge: exactfield.py

Exact scalars and dense exact linear algebra.

Two fields are supported:
- GF(p), with entries held as int64 residues in numpy arrays
- ℚ(√2), with entries held as `QuadExtRational` objects in numpy object arrays

Bulk products of structure-constant tensors go through a field's
__working representation__, which is the residue array itself for GF(p)
and a `SplitArray` (integer numerators for both components over a common
denominator) for ℚ(√2).

**Copyright 2024–2026 Conway**
Licensed under the GNU General Public License v3.0 (GPL-3.0-only).
This is free software with NO WARRANTY etc. etc., see LICENSE.
"""

import functools
import logging
import math
import re
from fractions import Fraction

import numpy as np


logger = logging.getLogger(__name__)

FLOAT_EXACT_BOUND = 2 ** 53
INT64_EXACT_BOUND = 2 ** 63 - 1
MODULUS_BOUND = 2 ** 31


class ExactFieldException(Exception):
    def __init__(self, message):
        self.message = message

    def __str__(self):
        return self.message


class ReconstructionException(ExactFieldException):
    def __init__(self, residue, modulus):
        self.residue = residue
        self.modulus = modulus
        super().__init__(
            f'residue {residue} modulo {modulus} hath no rational preimage '
            f'with numerator and denominator at most {reconstruction_bound(modulus)}'
        )


def is_prime(number):
    if number < 2:
        return False
    if number < 4:
        return True
    if number % 2 == 0:
        return False
    return all(number % divisor for divisor in range(3, math.isqrt(number) + 1, 2))


def legendre_symbol(a, p):
    """
    Compute the Legendre symbol (a/p) as one of 1, -1, 0, by Euler's criterion.
    """
    symbol = pow(a, (p - 1) // 2, p)
    return -1 if symbol == p - 1 else symbol


def tonelli_shanks(a, p):
    """
    Compute both square roots of a modulo an odd prime p, smaller root first.
    """
    a %= p
    if a == 0:
        return 0, 0
    if legendre_symbol(a, p) != 1:
        raise PrimeField.NoSquareRootException(a, p)

    # Write p - 1 = q 2^s with q odd
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1

    non_residue = 2
    while legendre_symbol(non_residue, p) != -1:
        non_residue += 1

    m = s
    c = pow(non_residue, q, p)
    t = pow(a, q, p)
    root = pow(a, (q + 1) // 2, p)
    while t != 1:
        i = 1
        t_power = t * t % p
        while t_power != 1:
            t_power = t_power * t_power % p
            i += 1
        b = pow(c, 2 ** (m - i - 1), p)
        m = i
        c = b * b % p
        t = t * c % p
        root = root * b % p

    return tuple(sorted([root, p - root]))


def sqrt2_residue(p, root=None):
    """
    Choose a square root of 2 modulo p.

    If `root` is given it is validated, otherwise the smaller root is used.
    """
    if p == 2 or legendre_symbol(2, p) != 1:
        raise PrimeField.NoSquareRootException(2, p)

    if root is None:
        return tonelli_shanks(2, p)[0]

    if root * root % p != 2 % p:
        raise PrimeField.BadRootException(root, p)

    return root % p


def extended_gcd(a, b):
    """
    Return (g, x, y) such that a x + b y = g = gcd(a, b).
    """
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        quotient, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - quotient * x1
        y0, y1 = y1, y0 - quotient * y1
    return a, x0, y0


def mod_inverse(value, modulus):
    g, x, _ = extended_gcd(value % modulus, modulus)
    if g != 1:
        raise PrimeField.ZeroInverseException(value, modulus)
    return x % modulus


def reconstruction_bound(modulus):
    return math.isqrt(modulus // 2)


def rational_reconstruct(residue, modulus):
    """
    Find the rational a/b with |a|, |b| <= floor(sqrt(p/2)) and a = b r mod p.

    Uses the half-extended Euclidean algorithm,
    stopping at the first remainder not exceeding the bound.
    """
    bound = reconstruction_bound(modulus)
    r0, r1 = modulus, residue % modulus
    t0, t1 = 0, 1
    while r1 > bound:
        quotient = r0 // r1
        r0, r1 = r1, r0 - quotient * r1
        t0, t1 = t1, t0 - quotient * t1

    if t1 == 0 or abs(t1) > bound or math.gcd(r1, abs(t1)) != 1:
        raise ReconstructionException(residue, modulus)

    return Fraction(r1, t1)


class QuadExtRational:
    """
    An element a + b √2 of ℚ(√2), with a and b held as `Fraction`s.
    """
    __slots__ = ('a', 'b')

    def __init__(self, a=0, b=0):
        self.a = a if isinstance(a, Fraction) else Fraction(a)
        self.b = b if isinstance(b, Fraction) else Fraction(b)

    @staticmethod
    def coerce(value):
        if isinstance(value, QuadExtRational):
            return value
        if isinstance(value, (int, Fraction, np.integer)):
            return QuadExtRational(Fraction(int(value)) if isinstance(value, np.integer) else value)
        return NotImplemented

    def is_zero(self):
        return not self.a and not self.b

    def is_rational(self):
        return not self.b

    def norm(self):
        return self.a * self.a - 2 * self.b * self.b

    def conjugate(self):
        return QuadExtRational(self.a, -self.b)

    def inverse(self):
        norm = self.norm()
        if not norm:
            raise ZeroDivisionError('QuadExtRational inverse of zero')
        return QuadExtRational(self.a / norm, -self.b / norm)

    def __add__(self, other):
        other = QuadExtRational.coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        return QuadExtRational(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return QuadExtRational(-self.a, -self.b)

    def __sub__(self, other):
        other = QuadExtRational.coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        return QuadExtRational(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        other = QuadExtRational.coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = QuadExtRational.coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return ZERO
        if not self.b and not other.b:
            return QuadExtRational(self.a * other.a)
        return QuadExtRational(
            self.a * other.a + 2 * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = QuadExtRational.coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = QuadExtRational.coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        other = QuadExtRational.coerce(other)
        if other is NotImplemented:
            return other
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b))

    def __repr__(self):
        return f'QuadExtRational({self.a!r}, {self.b!r})'

    def __str__(self):
        if not self.b:
            return str(self.a)
        if not self.a:
            return f'{self.b}*sqrt2'
        sign = '-' if self.b < 0 else '+'
        return f'{self.a}{sign}{abs(self.b)}*sqrt2'


ZERO = QuadExtRational()
ONE = QuadExtRational(1)
SQRT2 = QuadExtRational(0, 1)


class PrimeFieldElement:
    """
    A residue modulo a prime.
    """
    __slots__ = ('value', 'modulus')

    def __init__(self, value, modulus):
        self.value = int(value) % modulus
        self.modulus = modulus

    def _coerce(self, other):
        if isinstance(other, PrimeFieldElement):
            if other.modulus != self.modulus:
                raise ExactFieldException(
                    f'cannot combine residues modulo {self.modulus} and {other.modulus}'
                )
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other)
        if isinstance(other, Fraction):
            return other.numerator * mod_inverse(other.denominator, self.modulus)
        return NotImplemented

    def __add__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return PrimeFieldElement(self.value + value, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return PrimeFieldElement(self.value - value, self.modulus)

    def __rsub__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return PrimeFieldElement(value - self.value, self.modulus)

    def __mul__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return PrimeFieldElement(self.value * value, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return PrimeFieldElement(-self.value, self.modulus)

    def inverse(self):
        return PrimeFieldElement(mod_inverse(self.value, self.modulus), self.modulus)

    def __truediv__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return self * PrimeFieldElement(value, self.modulus).inverse()

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __eq__(self, other):
        value = self._coerce(other)
        if value is NotImplemented:
            return value
        return self.value == value % self.modulus

    def __hash__(self):
        return hash((self.value, self.modulus))

    def __repr__(self):
        return f'PrimeFieldElement({self.value}, {self.modulus})'

    def __str__(self):
        return str(self.value)


def modular_matmul(a, b, p):
    """
    Compute a @ b modulo p exactly, for residue arrays a and b.

    Uses a float64 product (BLAS) when every partial sum is below 2^53,
    chunking the inner dimension when needed.
    """
    inner = a.shape[-1]
    square = (p - 1) ** 2
    if square == 0 or inner == 0:
        return np.zeros(a.shape[:-1] + b.shape[1:], dtype=np.int64)

    chunk = FLOAT_EXACT_BOUND // square
    if chunk >= 1:
        result = None
        for start in range(0, inner, chunk):
            stop = min(start + chunk, inner)
            partial = a[..., start:stop].astype(np.float64) @ b[start:stop].astype(np.float64)
            partial = np.rint(partial).astype(np.int64) % p
            result = partial if result is None else (result + partial) % p
        return result

    if inner * square <= INT64_EXACT_BOUND:
        return (a.astype(np.int64) @ b.astype(np.int64)) % p

    product = a.astype(object) @ b.astype(object)
    return (product % p).astype(np.int64)


class SplitArray:
    """
    Working representation of an array over ℚ(√2).

    Holds (rational + irrational √2) / denominator,
    with `rational` and `irrational` object arrays of Python ints
    and `denominator` a positive int common to every entry.
    """
    COMPACTION_THRESHOLD = 2 ** 96

    def __init__(self, rational, irrational, denominator=1):
        self.rational = rational
        self.irrational = irrational
        self.denominator = denominator

    @property
    def shape(self):
        return self.rational.shape

    @staticmethod
    def from_entries(entries):
        entries = np.asarray(entries, dtype=object)
        flat = [QuadExtRational.coerce(entry) for entry in entries.flat]
        denominator = 1
        for entry in flat:
            denominator = math.lcm(denominator, entry.a.denominator, entry.b.denominator)
        rational = np.array(
            [int(entry.a * denominator) for entry in flat] or [], dtype=object
        ).reshape(entries.shape)
        irrational = np.array(
            [int(entry.b * denominator) for entry in flat] or [], dtype=object
        ).reshape(entries.shape)
        return SplitArray(rational, irrational, denominator)

    @staticmethod
    def from_integers(rational, irrational=None):
        rational = np.asarray(rational).astype(object)
        if irrational is None:
            irrational = np.zeros(rational.shape, dtype=np.int64).astype(object)
        else:
            irrational = np.asarray(irrational).astype(object)
        return SplitArray(rational, irrational, 1)

    @staticmethod
    def zeros(shape):
        zeros = np.zeros(shape, dtype=np.int64).astype(object)
        return SplitArray(zeros, zeros.copy(), 1)

    def to_entries(self):
        denominator = self.denominator
        entries = np.empty(self.shape, dtype=object)
        for index, (a, b) in enumerate(zip(self.rational.flat, self.irrational.flat)):
            entries.flat[index] = QuadExtRational(Fraction(a, denominator), Fraction(b, denominator))
        return entries

    def compacted(self):
        divisor = functools.reduce(
            math.gcd,
            list(self.rational.flat) + list(self.irrational.flat),
            self.denominator,
        )
        if divisor <= 1:
            return self
        return SplitArray(self.rational // divisor, self.irrational // divisor, self.denominator // divisor)

    def _maybe_compacted(self):
        if self.denominator > SplitArray.COMPACTION_THRESHOLD:
            return self.compacted()
        return self

    def tensordot(self, other, axes):
        aa = np.tensordot(self.rational, other.rational, axes)
        bb = np.tensordot(self.irrational, other.irrational, axes)
        ab = np.tensordot(self.rational, other.irrational, axes)
        ba = np.tensordot(self.irrational, other.rational, axes)
        product = SplitArray(aa + 2 * bb, ab + ba, self.denominator * other.denominator)
        return product._maybe_compacted()

    def _aligned(self, other):
        if self.denominator == other.denominator:
            return self.rational, self.irrational, other.rational, other.irrational, self.denominator
        left = other.denominator
        right = self.denominator
        return (
            self.rational * left, self.irrational * left,
            other.rational * right, other.irrational * right,
            self.denominator * other.denominator,
        )

    def __add__(self, other):
        a1, b1, a2, b2, denominator = self._aligned(other)
        return SplitArray(a1 + a2, b1 + b2, denominator)._maybe_compacted()

    def __sub__(self, other):
        a1, b1, a2, b2, denominator = self._aligned(other)
        return SplitArray(a1 - a2, b1 - b2, denominator)._maybe_compacted()

    def __neg__(self):
        return SplitArray(-self.rational, -self.irrational, self.denominator)

    def scaled(self, scalar):
        scalar = QuadExtRational.coerce(scalar)
        denominator = math.lcm(scalar.a.denominator, scalar.b.denominator)
        a = int(scalar.a * denominator)
        b = int(scalar.b * denominator)
        return SplitArray(
            self.rational * a + 2 * self.irrational * b,
            self.rational * b + self.irrational * a,
            self.denominator * denominator,
        )._maybe_compacted()

    def transpose(self, axes):
        return SplitArray(
            np.transpose(self.rational, axes), np.transpose(self.irrational, axes), self.denominator
        )

    def reshape(self, shape):
        return SplitArray(self.rational.reshape(shape), self.irrational.reshape(shape), self.denominator)

    def __getitem__(self, key):
        return SplitArray(self.rational[key], self.irrational[key], self.denominator)

    def nonzero_mask(self):
        return (self.rational != 0) | (self.irrational != 0)

    def reduce_mod(self, field):
        p = field.modulus
        inverse = mod_inverse(self.denominator, p)
        residues = (self.rational % p + (self.irrational % p) * field.sqrt2_residue()) % p
        return (residues.astype(np.int64) * inverse) % p


class PrimeField:
    """
    The prime field GF(p), optionally with a chosen square root of 2.
    """
    def __init__(self, modulus, sqrt2=None):
        if not is_prime(modulus):
            raise PrimeField.NotPrimeException(modulus)
        if modulus >= MODULUS_BOUND:
            raise PrimeField.ModulusTooLargeException(modulus)
        self.modulus = modulus
        self.characteristic = modulus
        if sqrt2 is None and modulus != 2 and legendre_symbol(2, modulus) == 1:
            self.sqrt2 = sqrt2_residue(modulus)
        elif sqrt2 is None:
            self.sqrt2 = None
        else:
            self.sqrt2 = sqrt2_residue(modulus, sqrt2)

    @property
    def spec(self):
        if self.sqrt2 is None:
            return f'gfp:{self.modulus}'
        return f'gfp:{self.modulus}:sqrt2={self.sqrt2}'

    def sqrt2_residue(self):
        if self.sqrt2 is None:
            raise PrimeField.NoSquareRootException(2, self.modulus)
        return self.sqrt2

    def element(self, entry):
        return PrimeFieldElement(int(entry), self.modulus)

    def from_exact(self, value):
        """
        Reduce an int, Fraction or QuadExtRational to a residue.
        """
        p = self.modulus
        if isinstance(value, PrimeFieldElement):
            return value.value
        if isinstance(value, (int, np.integer)):
            return int(value) % p
        if isinstance(value, Fraction):
            return value.numerator * mod_inverse(value.denominator, p) % p
        if isinstance(value, QuadExtRational):
            residue = self.from_exact(value.a)
            if value.b:
                residue += self.from_exact(value.b) * self.sqrt2_residue()
            return residue % p
        raise ExactFieldException(f'cannot reduce {value!r} modulo {p}')

    def array(self, values):
        values = np.asarray(values, dtype=object)
        residues = [self.from_exact(value) for value in values.flat]
        return np.array(residues, dtype=np.int64).reshape(values.shape)

    def zeros(self, shape):
        return np.zeros(shape, dtype=np.int64)

    def identity(self, size):
        return np.eye(size, dtype=np.int64)

    def normalise(self, entries):
        return entries % self.modulus

    def nonzero(self, entries):
        return entries != 0

    def inverse_entry(self, entry):
        return mod_inverse(int(entry), self.modulus)

    def matmul(self, a, b):
        return modular_matmul(a, b, self.modulus)

    def outer(self, a, b):
        return np.outer(a, b) % self.modulus

    def entry_to_json(self, entry):
        return int(entry)

    def entry_from_json(self, value):
        return int(value) % self.modulus

    def random_entries(self, rng, shape):
        return rng.integers(0, self.modulus, size=shape, dtype=np.int64)

    # Working representation (identical to entries)

    def to_working(self, entries):
        return np.asarray(entries, dtype=np.int64) % self.modulus

    def from_working(self, working):
        return working

    def working_zeros(self, shape):
        return np.zeros(shape, dtype=np.int64)

    def tensordot(self, a, b, axes):
        axes_a, axes_b = axes
        contracted = math.prod(a.shape[axis] for axis in np.atleast_1d(axes_a))
        if contracted * (self.modulus - 1) ** 2 <= INT64_EXACT_BOUND:
            return np.tensordot(a, b, axes) % self.modulus
        product = np.tensordot(a.astype(object), b.astype(object), axes)
        return (product % self.modulus).astype(np.int64)

    def add(self, a, b):
        return (a + b) % self.modulus

    def subtract(self, a, b):
        return (a - b) % self.modulus

    def scale(self, working, scalar):
        return working * self.from_exact(scalar) % self.modulus

    def transpose(self, working, axes):
        return np.transpose(working, axes)

    def working_nonzero(self, working):
        return working != 0

    def working_from_ints(self, integers):
        return np.asarray(integers, dtype=np.int64) % self.modulus

    def random_working(self, rng, shape):
        return rng.integers(0, self.modulus, size=shape, dtype=np.int64)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __str__(self):
        return self.spec

    class NotPrimeException(ExactFieldException):
        def __init__(self, modulus):
            super().__init__(f'modulus {modulus} is not prime')

    class ModulusTooLargeException(ExactFieldException):
        def __init__(self, modulus):
            super().__init__(
                f'modulus {modulus} is too large (residue products must fit in 64 bits, so p < 2^31)'
            )

    class NoSquareRootException(ExactFieldException):
        def __init__(self, value, modulus):
            super().__init__(f'{value} hath no square root modulo {modulus}')

    class BadRootException(ExactFieldException):
        def __init__(self, root, modulus):
            super().__init__(f'{root} squared is not 2 modulo {modulus}')

    class ZeroInverseException(ExactFieldException):
        def __init__(self, value, modulus):
            super().__init__(f'{value} is not invertible modulo {modulus}')


class QuadraticField:
    """
    The field ℚ(√2) of characteristic zero.
    """
    spec = 'q-sqrt2'
    characteristic = 0

    def element(self, entry):
        return QuadExtRational.coerce(entry)

    def from_exact(self, value):
        coerced = QuadExtRational.coerce(value)
        if coerced is NotImplemented:
            raise ExactFieldException(f'cannot embed {value!r} in ℚ(√2)')
        return coerced

    def array(self, values):
        values = np.asarray(values, dtype=object)
        entries = np.empty(values.shape, dtype=object)
        for index, value in enumerate(values.flat):
            entries.flat[index] = self.from_exact(value)
        return entries

    def zeros(self, shape):
        entries = np.empty(shape, dtype=object)
        entries.fill(ZERO)
        return entries

    def identity(self, size):
        entries = self.zeros((size, size))
        for index in range(size):
            entries[index, index] = ONE
        return entries

    def normalise(self, entries):
        return entries

    def nonzero(self, entries):
        return np.asarray(entries, dtype=object).astype(bool)

    def inverse_entry(self, entry):
        return entry.inverse()

    def matmul(self, a, b):
        return np.dot(a, b)

    def outer(self, a, b):
        return np.outer(a, b)

    def entry_to_json(self, entry):
        return {'a': str(entry.a), 'b': str(entry.b)}

    def entry_from_json(self, value):
        if isinstance(value, dict):
            return QuadExtRational(Fraction(value['a']), Fraction(value['b']))
        if isinstance(value, list):
            return QuadExtRational(Fraction(value[0]), Fraction(value[1]))
        return QuadExtRational(Fraction(value))

    def random_entries(self, rng, shape):
        integers = rng.integers(-99, 100, size=shape)
        return self.array(integers.astype(object))

    def reduce_entries(self, entries, prime_field):
        return prime_field.array(entries)

    # Working representation (SplitArray)

    def to_working(self, entries):
        return SplitArray.from_entries(entries)

    def from_working(self, working):
        return working.to_entries()

    def working_zeros(self, shape):
        return SplitArray.zeros(shape)

    def tensordot(self, a, b, axes):
        return a.tensordot(b, axes)

    def add(self, a, b):
        return a + b

    def subtract(self, a, b):
        return a - b

    def scale(self, working, scalar):
        return working.scaled(scalar)

    def transpose(self, working, axes):
        return working.transpose(axes)

    def working_nonzero(self, working):
        return working.nonzero_mask()

    def working_from_ints(self, integers):
        return SplitArray.from_integers(integers)

    def random_working(self, rng, shape):
        return SplitArray.from_integers(rng.integers(-99, 100, size=shape))

    def __eq__(self, other):
        return isinstance(other, QuadraticField)

    def __hash__(self):
        return hash(self.spec)

    def __str__(self):
        return self.spec


Q_SQRT2 = QuadraticField()


def field_from_spec(text):
    """
    Parse a field spec: `gfp:<p>`, `gfp:<p>:sqrt2=<r>` or `q-sqrt2`.
    """
    text = text.strip()
    if text == QuadraticField.spec:
        return Q_SQRT2

    match = re.fullmatch(r'gfp:(?P<modulus>[0-9]+)(?::sqrt2=(?P<root>[0-9]+))?', text)
    if not match:
        raise BadFieldSpecException(text)

    root = match.group('root')
    return PrimeField(int(match.group('modulus')), None if root is None else int(root))


class BadFieldSpecException(ExactFieldException):
    def __init__(self, text):
        super().__init__(f'unrecognised field `{text}` (expected `gfp:<p>`, `gfp:<p>:sqrt2=<r>` or `q-sqrt2`)')


def reduce_mod_p(value, field):
    """
    Residue of an exact value (√2 sent to the field's chosen root).
    """
    return field.from_exact(value)


class ExactMatrix:
    """
    A dense matrix of field entries.
    """
    def __init__(self, field, entries):
        self.field = field
        self.entries = entries

    @staticmethod
    def from_values(field, values):
        return ExactMatrix(field, field.array(values))

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]

    def reduce(self, prime_field):
        return ExactMatrix(prime_field, prime_field.array(self.entries))

    def to_json(self):
        return {
            'field': self.field.spec,
            'rows': self.rows,
            'cols': self.cols,
            'entries': [[self.field.entry_to_json(entry) for entry in row] for row in self.entries],
        }

    @staticmethod
    def from_json(document):
        """
        Read `rows`, `cols` and nested `entries` (or a `shape` with flat `entries`).
        """
        try:
            field = field_from_spec(document['field'])
            if 'shape' in document:
                shape = tuple(document['shape'])
                values = document['entries']
            else:
                shape = (document['rows'], document['cols'])
                values = [value for row in document['entries'] for value in row]
        except KeyError as exception:
            raise ExactFieldException(f'malformed matrix document: missing key {exception}')

        if len(values) != math.prod(shape):
            raise ExactFieldException(f'matrix of shape {shape} cannot hold {len(values)} entries')

        entries = np.empty(len(values), dtype=object)
        for index, value in enumerate(values):
            entries[index] = field.entry_from_json(value)
        return ExactMatrix(field, field.array(entries).reshape(shape))

    def __eq__(self, other):
        return (
            isinstance(other, ExactMatrix)
            and self.field == other.field
            and self.entries.shape == other.entries.shape
            and bool(np.all(self.entries == other.entries))
        )

    def __str__(self):
        return '\n'.join(
            ' '.join(str(entry) for entry in row)
            for row in self.entries
        )


def scalar_to_json(field, entry):
    return field.entry_to_json(entry)


def scalar_from_json(field, value):
    return field.entry_from_json(value)


def matrix_to_json(matrix):
    return matrix.to_json()


def matrix_from_json(document):
    return ExactMatrix.from_json(document)


def _rref_entries(field, entries):
    entries = field.normalise(entries.copy())
    row_count, col_count = entries.shape
    pivots = []
    row = 0
    for col in range(col_count):
        if row == row_count:
            break
        candidates = np.flatnonzero(field.nonzero(entries[row:, col]))
        if candidates.size == 0:
            continue

        pivot_row = row + candidates[0]
        if pivot_row != row:
            entries[[row, pivot_row]] = entries[[pivot_row, row]]

        inverse = field.inverse_entry(entries[row, col])
        entries[row, col:] = field.normalise(entries[row, col:] * inverse)

        factors = entries[:, col].copy()
        factors[row] = entries[row, col] * 0
        targets = np.flatnonzero(field.nonzero(factors))
        if targets.size:
            entries[targets, col:] = field.normalise(
                entries[targets, col:] - field.outer(factors[targets], entries[row, col:])
            )

        pivots.append(col)
        row += 1

    return len(pivots), entries, pivots


def rref(matrix):
    """
    Reduce a matrix to its unique reduced row echelon form.

    Gauss-Jordan elimination: leftmost pivot column, first nonzero row as pivot.
    Returns (rank, reduced matrix).
    """
    rank, entries, _ = _rref_entries(matrix.field, matrix.entries)
    return rank, ExactMatrix(matrix.field, entries)


def pivot_columns(matrix):
    return _rref_entries(matrix.field, matrix.entries)[2]


def nullspace_basis(matrix):
    """
    Basis of {x : M x = 0}, itself in reduced row echelon form.
    """
    field = matrix.field
    rank, entries, pivots = _rref_entries(field, matrix.entries)
    return _row_reduced_basis(field, _free_variable_rows(field, entries[:rank], pivots, matrix.cols))


def free_variable_basis(matrix):
    """
    Basis of {x : M x = 0}, one vector per free column,
    with a 1 at that free column and 0 at the other free columns.
    """
    field = matrix.field
    rank, entries, pivots = _rref_entries(field, matrix.entries)
    rows = _free_variable_rows(field, entries[:rank], pivots, matrix.cols)
    return [rows[index] for index in range(rows.shape[0])]


def _free_variable_rows(field, reduced_rows, pivots, col_count):
    pivot_set = set(pivots)
    free = [col for col in range(col_count) if col not in pivot_set]
    basis = field.zeros((len(free), col_count))
    for index, col in enumerate(free):
        basis[index, col] = field.from_exact(1)
    if pivots and free:
        basis[:, pivots] = field.normalise(-reduced_rows[:, free].T)
    return basis


def _row_reduced_basis(field, rows):
    if rows.shape[0] == 0:
        return []
    rank, entries, _ = _rref_entries(field, rows)
    return [entries[index] for index in range(rank)]


class EchelonForm:
    """
    Incrementally maintained reduced row echelon form.

    After any sequence of `absorb` calls the rows held are exactly
    the nonzero rows of the RREF of every row absorbed so far.
    """
    def __init__(self, field, col_count):
        self.field = field
        self.col_count = col_count
        self.rows = field.zeros((0, col_count))
        self.pivots = []

    @property
    def rank(self):
        return len(self.pivots)

    def reduce(self, block):
        """
        Subtract from each row of `block` its projection onto the pivot columns.
        """
        block = self.field.normalise(np.atleast_2d(block))
        if not self.pivots:
            return block
        return self.field.normalise(
            block - self.field.matmul(block[:, self.pivots], self.rows)
        )

    def contains(self, vector):
        return not np.any(self.field.nonzero(self.reduce(vector)))

    def absorb(self, block):
        """
        Add rows, returning the rank gained.
        """
        reduced = self.reduce(block)
        reduced = reduced[np.any(self.field.nonzero(reduced), axis=1)]
        if reduced.shape[0] == 0:
            return 0

        gained, new_entries, new_pivots = _rref_entries(self.field, reduced)
        new_rows = new_entries[:gained]

        rows = self.rows
        if self.pivots:
            rows = self.field.normalise(rows - self.field.matmul(rows[:, new_pivots], new_rows))

        pivots = self.pivots + new_pivots
        order = np.argsort(pivots, kind='stable')
        self.rows = np.concatenate([rows, new_rows])[order]
        self.pivots = [pivots[index] for index in order]
        return gained

    def matrix(self):
        return ExactMatrix(self.field, self.rows.copy())

    def nullspace_basis(self):
        rows = _free_variable_rows(self.field, self.rows, self.pivots, self.col_count)
        return _row_reduced_basis(self.field, rows)
