"""Bit-level arithmetic over GF(2) and fixed-width bit blocks.

Polynomials over GF(2) are nonnegative Python ints, bit i holding the
coefficient of x^i. Bit blocks carry an explicit bit length so leading zeros
survive serialization; bit 0 of the integer is bit 0 of the block.
"""

from __future__ import annotations

from dataclasses import dataclass

_KARATSUBA_CUTOFF = 4096  # bits; below this the shift-xor loop wins

_BLOCK_MAGIC = b"CRB1"
_HEADER_LEN = 16


def clmul_naive(a: int, b: int) -> int:
    """Carryless product by the quadratic shift-xor loop (reference route)."""
    if a < 0 or b < 0:
        raise ValueError("operands must be nonnegative")
    if a.bit_length() < b.bit_length():
        a, b = b, a
    acc = 0
    shift = 0
    while b:
        low = b & -b
        k = low.bit_length() - 1
        acc ^= a << (shift + k)
        shift += k + 1
        b >>= k + 1
    return acc


def clmul(a: int, b: int) -> int:
    """Carryless (GF(2) polynomial) product of two nonnegative ints."""
    if a < 0 or b < 0:
        raise ValueError("operands must be nonnegative")
    if a.bit_length() <= _KARATSUBA_CUTOFF or b.bit_length() <= _KARATSUBA_CUTOFF:
        return clmul_naive(a, b)
    h = max(a.bit_length(), b.bit_length()) // 2
    mask = (1 << h) - 1
    a0, a1 = a & mask, a >> h
    b0, b1 = b & mask, b >> h
    z0 = clmul(a0, b0)
    z2 = clmul(a1, b1)
    z1 = clmul(a0 ^ a1, b0 ^ b1) ^ z0 ^ z2
    return (z2 << (2 * h)) ^ (z1 << h) ^ z0


def poly_degree(a: int) -> int:
    """Degree of the polynomial; -1 for the zero polynomial."""
    return a.bit_length() - 1


def poly_mod(a: int, f: int) -> int:
    """Remainder of polynomial a modulo nonzero polynomial f."""
    if f == 0:
        raise ZeroDivisionError("reduction modulo zero polynomial")
    df = poly_degree(f)
    da = poly_degree(a)
    while da >= df:
        a ^= f << (da - df)
        da = poly_degree(a)
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def trinomial(degree: int, middle: int) -> int:
    """The polynomial x^degree + x^middle + 1."""
    if not 0 < middle < degree:
        raise ValueError("need 0 < middle < degree")
    return (1 << degree) | (1 << middle) | 1


def _mod_trinomial(a: int, degree: int, middle: int) -> int:
    # Reduction by x^d = x^t + 1 folds the high words in O(size) passes.
    mask = (1 << degree) - 1
    while a >> degree:
        high = a >> degree
        a = (a & mask) ^ high ^ (high << middle)
    return a


def _sqmod_trinomial(a: int, degree: int, middle: int) -> int:
    return _mod_trinomial(clmul(a, a), degree, middle)


def _frobenius_power(degree: int, middle: int, steps: int) -> int:
    # x^(2^steps) modulo the trinomial, by repeated squaring of x.
    y = 2  # the polynomial x
    for _ in range(steps):
        y = _sqmod_trinomial(y, degree, middle)
    return y


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def trinomial_is_irreducible(degree: int, middle: int, prefilter: int = 12) -> bool:
    """Rabin irreducibility test for x^degree + x^middle + 1 over GF(2).

    The optional prefilter rejects candidates with an irreducible factor of
    degree <= prefilter before paying for the full x^(2^degree) chain.
    """
    f = trinomial(degree, middle)
    if prefilter > 0:
        y = 2
        for _ in range(min(prefilter, degree - 1)):
            y = _sqmod_trinomial(y, degree, middle)
            if poly_gcd(y ^ 2, f) != 1:
                return False
    y = _frobenius_power(degree, middle, degree)
    if y != 2:  # x^(2^d) == x required
        return False
    for q in _prime_factors(degree):
        z = _frobenius_power(degree, middle, degree // q)
        if poly_gcd(z ^ 2, f) != 1:
            return False
    return True


def find_irreducible_trinomial(degree: int) -> int | None:
    """Smallest middle exponent t with x^degree + x^t + 1 irreducible, or None."""
    for t in range(1, degree):
        if trinomial_is_irreducible(degree, t):
            return t
    return None


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Miller-Rabin, deterministic for n < 3.3e24 via the fixed witness set."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def has_primitive_root_2(p: int) -> bool:
    """True when 2 generates the multiplicative group modulo prime p."""
    if not is_prime(p):
        raise ValueError("modulus must be prime")
    if p == 2:
        return True
    for q in _prime_factors(p - 1):
        if pow(2, (p - 1) // q, p) == 1:
            return False
    return True


def next_circulant_modulus(m: int) -> int:
    """Smallest prime d >= m with 2 a primitive root modulo d."""
    d = max(m, 3)
    if d % 2 == 0:
        d += 1
    while True:
        if is_prime(d) and has_primitive_root_2(d):
            return d
        d += 2


@dataclass(frozen=True)
class BitBlock:
    """A bit string of definite length: `value` bit i is block bit i."""

    value: int
    nbits: int
    tag: str = "raw"

    def __post_init__(self) -> None:
        if self.nbits < 0:
            raise ValueError("negative length")
        if self.value < 0 or self.value.bit_length() > self.nbits:
            raise ValueError("value does not fit the declared length")
        if len(self.tag.encode("ascii")) > 3:
            raise ValueError("tag is at most 3 ascii bytes")

    def __len__(self) -> int:
        return self.nbits

    def bit(self, i: int) -> int:
        if not 0 <= i < self.nbits:
            raise IndexError("bit index out of range")
        return (self.value >> i) & 1

    def bits(self) -> list[int]:
        return [(self.value >> i) & 1 for i in range(self.nbits)]

    def take(self, n: int, start: int = 0) -> "BitBlock":
        """Bits [start, start+n), reindexed from zero."""
        if start < 0 or n < 0 or start + n > self.nbits:
            raise ValueError("slice outside the block")
        mask = (1 << n) - 1
        return BitBlock((self.value >> start) & mask, n, self.tag)

    def concat(self, other: "BitBlock") -> "BitBlock":
        """This block in the low bits, `other` appended above."""
        return BitBlock(
            self.value | (other.value << self.nbits),
            self.nbits + other.nbits,
            self.tag,
        )

    def xor(self, other: "BitBlock") -> "BitBlock":
        if self.nbits != other.nbits:
            raise ValueError("length mismatch")
        return BitBlock(self.value ^ other.value, self.nbits, self.tag)

    def pad(self, nbits: int) -> "BitBlock":
        """Zero-extend to nbits."""
        if nbits < self.nbits:
            raise ValueError("pad cannot shrink the block")
        return BitBlock(self.value, nbits, self.tag)

    @classmethod
    def from_bits(cls, bits: list[int] | tuple[int, ...], tag: str = "raw") -> "BitBlock":
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError("bits must be 0 or 1")
            value |= b << i
        return cls(value, len(bits), tag)

    def to_bytes(self) -> bytes:
        """Serialize with the 16-byte header: magic, 3-byte tag, pad, length."""
        tag = self.tag.encode("ascii").ljust(3, b"\x00")
        header = _BLOCK_MAGIC + tag + b"\x00" + self.nbits.to_bytes(8, "little")
        body = self.value.to_bytes((self.nbits + 7) // 8, "little")
        return header + body

    @classmethod
    def from_bytes(cls, raw: bytes) -> "BitBlock":
        if len(raw) < _HEADER_LEN or raw[:4] != _BLOCK_MAGIC:
            raise ValueError("not a bit block")
        tag = raw[4:7].rstrip(b"\x00").decode("ascii")
        nbits = int.from_bytes(raw[8:16], "little")
        nbytes = (nbits + 7) // 8
        if len(raw) != _HEADER_LEN + nbytes:
            raise ValueError("length field disagrees with payload")
        value = int.from_bytes(raw[_HEADER_LEN:], "little")
        if value.bit_length() > nbits:
            raise ValueError("payload has bits beyond the declared length")
        return cls(value, nbits, tag or "raw")


def random_block(rng, nbits: int, tag: str = "raw") -> BitBlock:
    """Uniform block drawn from a numpy Generator."""
    nbytes = (nbits + 7) // 8
    raw = rng.bytes(nbytes)
    value = int.from_bytes(raw, "little") & ((1 << nbits) - 1)
    return BitBlock(value, nbits, tag)


def hamming_weight(x: int) -> int:
    return x.bit_count()


def parity(x: int) -> int:
    return x.bit_count() & 1


def cyclic_convolve(a: int, b: int, d: int) -> int:
    """Cyclic GF(2) convolution of two length-d bit vectors (mod x^d + 1)."""
    if a.bit_length() > d or b.bit_length() > d:
        raise ValueError("operands longer than the cycle")
    prod = clmul(a, b)
    mask = (1 << d) - 1
    while prod >> d:
        prod = (prod & mask) ^ (prod >> d)
    return prod


def gf2ext_mul(a: int, b: int, degree: int, middle: int) -> int:
    """Product in GF(2^degree) represented modulo x^degree + x^middle + 1."""
    if a.bit_length() > degree or b.bit_length() > degree:
        raise ValueError("operands outside the field representation")
    return _mod_trinomial(clmul(a, b), degree, middle)
