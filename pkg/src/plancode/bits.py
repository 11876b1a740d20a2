"""Bit strings, self-delimiting integers, and segmented concatenation.

Conventions used everywhere in this package:

* Bit strings are MSB-first: bit 0 of a BitString is the most significant bit
  of the first byte of its byte serialization.
* ``encode_uint`` is an Elias-gamma-style code on x+1 so that 0 is encodable:
  for z = x+1 with bit length L, the code is (L-1) zero bits followed by the
  L bits of z (total 2L-1 bits).
* ``concat_segmented`` joins d parts X_1..X_d into one self-describing string
  whose prefix costs O(min(m, d*log m)) bits, m = total payload length. The
  prefix is: gamma(d); then if d > 0: gamma(m), one mode bit, and either a
  bitmap of m bits marking cumulative part ends (mode 1) or the first d-1
  cumulative lengths in fixed width ceil(log2(m+1)) bits (mode 0). Mode 1 is
  used iff every part is nonempty and m <= d * (ceil(log2 m) + 1); ties favor
  the bitmap. The bitmap cannot express empty parts, hence the nonemptiness
  condition.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from .errors import CodecError

__all__ = [
    "BitString",
    "BitWriter",
    "BitReader",
    "encode_uint",
    "decode_uint",
    "uint_cost",
    "concat_segmented",
    "split_segmented",
    "segment_prefix_length",
]

# Decode-side ceiling on gamma-coded values (fuzz guard): 2**62 is far above
# anything a valid container contains.
_MAX_UINT_BITS = 62


def ceil_log2(x: int) -> int:
    """ceil(log2 x) for x >= 1."""
    return (x - 1).bit_length()


class BitString:
    """Immutable MSB-first bit sequence.

    Internally a (value, length) pair of Python ints, so concatenation and
    slicing are big-int shifts. Equality and hashing are by content.
    """

    __slots__ = ("_v", "_n")

    def __init__(self, value: int = 0, width: int = 0):
        if width < 0:
            raise ValueError("width must be >= 0")
        if value < 0 or value.bit_length() > width:
            raise ValueError("value does not fit in width")
        self._v = value
        self._n = width

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        v = 0
        n = 0
        for b in bits:
            v = (v << 1) | (1 if b else 0)
            n += 1
        return cls(v, n)

    @classmethod
    def from_01(cls, s: str) -> "BitString":
        if s and set(s) - {"0", "1"}:
            raise ValueError("not a 01-string")
        return cls(int(s, 2) if s else 0, len(s))

    @classmethod
    def from_bytes(cls, data: bytes, bit_length: int) -> "BitString":
        if bit_length > 8 * len(data) or bit_length < 8 * len(data) - 7:
            raise ValueError("bit_length inconsistent with data size")
        v = int.from_bytes(data, "big") >> (8 * len(data) - bit_length)
        return cls(v, bit_length)

    # -- accessors -------------------------------------------------------

    @property
    def value(self) -> int:
        return self._v

    def __len__(self) -> int:
        return self._n

    def __bool__(self) -> bool:
        return self._n > 0

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self._n:
            raise IndexError(i)
        return (self._v >> (self._n - 1 - i)) & 1

    def __iter__(self) -> Iterator[int]:
        for i in range(self._n):
            yield (self._v >> (self._n - 1 - i)) & 1

    def uint_at(self, pos: int, width: int) -> int:
        if pos < 0 or width < 0 or pos + width > self._n:
            raise IndexError("bit range out of bounds")
        return (self._v >> (self._n - pos - width)) & ((1 << width) - 1)

    def slice(self, pos: int, width: int) -> "BitString":
        return BitString(self.uint_at(pos, width), width)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitString)
            and self._n == other._n
            and self._v == other._v
        )

    def __hash__(self) -> int:
        return hash((self._v, self._n))

    def __add__(self, other: "BitString") -> "BitString":
        return BitString((self._v << other._n) | other._v, self._n + other._n)

    def to_bytes(self) -> bytes:
        """Big-endian bytes, last byte zero-padded in its low bits."""
        nbytes = (self._n + 7) // 8
        return (self._v << (8 * nbytes - self._n)).to_bytes(nbytes, "big")

    def to01(self) -> str:
        return format(self._v, f"0{self._n}b") if self._n else ""

    def __repr__(self) -> str:
        if self._n <= 64:
            return f"BitString('{self.to01()}')"
        return f"BitString(<{self._n} bits>)"


class BitWriter:
    """Append-only bit accumulator; linear time in total bits written."""

    def __init__(self) -> None:
        self._buf = bytearray()
        self._cur = 0  # partial byte, high bits first
        self._nbits = 0  # bits currently in _cur, 0..7

    def __len__(self) -> int:
        return 8 * len(self._buf) + self._nbits

    def write_bit(self, b: int) -> None:
        self._cur = (self._cur << 1) | (1 if b else 0)
        self._nbits += 1
        if self._nbits == 8:
            self._buf.append(self._cur)
            self._cur = 0
            self._nbits = 0

    def write_uint_bits(self, value: int, width: int) -> None:
        """Write ``value`` in exactly ``width`` bits, MSB first."""
        if width < 0 or value < 0 or value.bit_length() > width:
            raise ValueError("value does not fit in width")
        while width >= 8:
            if self._nbits == 0:
                width -= 8
                self._buf.append((value >> width) & 0xFF)
            else:
                take = 8 - self._nbits
                width -= take
                self._buf.append(
                    (self._cur << take) | ((value >> width) & ((1 << take) - 1))
                )
                self._cur = 0
                self._nbits = 0
        if width:
            self._cur = (self._cur << width) | (value & ((1 << width) - 1))
            self._nbits += width
            if self._nbits >= 8:
                self._nbits -= 8
                self._buf.append(self._cur >> self._nbits)
                self._cur &= (1 << self._nbits) - 1

    def write_uint(self, x: int) -> None:
        """Self-delimiting nonnegative integer (gamma on x+1)."""
        z = x + 1
        if x < 0:
            raise ValueError("x must be >= 0")
        self.write_uint_bits(z, 2 * z.bit_length() - 1)

    def write_bits(self, bs: BitString) -> None:
        n = len(bs)
        if n == 0:
            return
        head = n % 8
        v = bs.value
        if head:
            self.write_uint_bits(v >> (n - head), head)
        for byte in (v & ((1 << (n - head)) - 1)).to_bytes((n - head) // 8, "big"):
            self.write_uint_bits(byte, 8)

    def build(self) -> BitString:
        v = int.from_bytes(bytes(self._buf), "big")
        if self._nbits:
            v = (v << self._nbits) | self._cur
        return BitString(v, 8 * len(self._buf) + self._nbits)


class BitReader:
    """Cursor over a BitString. All reads raise CodecError past the end."""

    def __init__(self, bs: BitString, pos: int = 0):
        self._bytes = bs.to_bytes()
        self._n = len(bs)
        self.pos = pos

    def __len__(self) -> int:
        return self._n

    @property
    def remaining(self) -> int:
        return self._n - self.pos

    def read_uint_bits(self, width: int) -> int:
        if width < 0:
            raise CodecError("negative read width")
        pos = self.pos
        if pos + width > self._n:
            raise CodecError("read past end of bit stream")
        self.pos = pos + width
        if width == 0:
            return 0
        lo = pos // 8
        hi = (pos + width + 7) // 8
        chunk = int.from_bytes(self._bytes[lo:hi], "big")
        shift = 8 * (hi - lo) - (pos - 8 * lo) - width
        return (chunk >> shift) & ((1 << width) - 1)

    def read_bit(self) -> int:
        return self.read_uint_bits(1)

    def read_uint(self) -> int:
        """Inverse of BitWriter.write_uint."""
        zeros = 0
        while True:
            if self.pos >= self._n:
                raise CodecError("truncated uint")
            if self.read_bit():
                break
            zeros += 1
            if zeros > _MAX_UINT_BITS:
                raise CodecError("uint exceeds sane size")
        z = (1 << zeros) | self.read_uint_bits(zeros)
        return z - 1

    def read_bits(self, width: int) -> BitString:
        return BitString(self.read_uint_bits(width), width)


def encode_uint(x: int) -> BitString:
    """Self-delimiting code for x >= 0; 2*bitlen(x+1)-1 bits."""
    w = BitWriter()
    w.write_uint(x)
    return w.build()


def decode_uint(bs: BitString, pos: int = 0) -> tuple[int, int]:
    """Decode one integer from ``bs`` at ``pos``; returns (value, next_pos)."""
    r = BitReader(bs, pos)
    x = r.read_uint()
    return x, r.pos


def uint_cost(x: int) -> int:
    """Bit length of encode_uint(x)."""
    return 2 * (x + 1).bit_length() - 1


# -- segmented concatenation -------------------------------------------------


def _use_bitmap(d: int, m: int, lengths: Sequence[int]) -> bool:
    if m == 0 or any(l == 0 for l in lengths):
        return False
    return m <= d * (ceil_log2(m) + 1)


def write_segmented(w: BitWriter, parts: Sequence[BitString]) -> None:
    """Append the segmented concatenation of ``parts`` to ``w``."""
    d = len(parts)
    lengths = [len(p) for p in parts]
    m = sum(lengths)
    w.write_uint(d)
    if d == 0:
        return
    w.write_uint(m)
    if _use_bitmap(d, m, lengths):
        w.write_bit(1)
        bitmap = 0
        cum = 0
        for l in lengths:
            cum += l
            bitmap |= 1 << (m - cum)  # bit index cum-1, MSB-first
        w.write_uint_bits(bitmap, m)
    else:
        w.write_bit(0)
        width = m.bit_length()
        cum = 0
        for l in lengths[:-1]:
            cum += l
            w.write_uint_bits(cum, width)
    for p in parts:
        w.write_bits(p)


def read_segmented(r: BitReader) -> list[BitString]:
    """Inverse of write_segmented, consuming from ``r``."""
    d = r.read_uint()
    if d == 0:
        return []
    # Fuzz guard: a crafted prefix could declare billions of empty parts in a
    # few bits. Real containers never have more parts than a small multiple of
    # their own bit count.
    if d > 4 * len(r) + 65536:
        raise CodecError("segment count exceeds stream size")
    m = r.read_uint()
    if m > r.remaining:
        raise CodecError("segment payload exceeds stream size")
    mode = r.read_bit()
    bounds: list[int] = []
    if mode:
        bitmap = r.read_uint_bits(m)
        for j in range(m):
            if (bitmap >> (m - 1 - j)) & 1:
                bounds.append(j + 1)
        if len(bounds) != d or (m > 0 and (not bounds or bounds[-1] != m)):
            raise CodecError("segment bitmap inconsistent with part count")
    else:
        width = m.bit_length()
        prev = 0
        for _ in range(d - 1):
            cum = r.read_uint_bits(width)
            if cum < prev or cum > m:
                raise CodecError("segment offsets not monotone")
            bounds.append(cum)
            prev = cum
        bounds.append(m)
    parts = []
    prev = 0
    for cum in bounds:
        parts.append(r.read_bits(cum - prev))
        prev = cum
    return parts


def concat_segmented(parts: Sequence[BitString]) -> BitString:
    w = BitWriter()
    write_segmented(w, parts)
    return w.build()


def split_segmented(bs: BitString) -> list[BitString]:
    """Split a standalone segmented string; requires exact consumption."""
    r = BitReader(bs)
    parts = read_segmented(r)
    if r.remaining:
        raise CodecError("trailing bits after segmented payload")
    return parts


def segment_prefix_length(parts: Sequence[BitString]) -> int:
    """Length of the self-describing prefix (total minus payload)."""
    m = sum(len(p) for p in parts)
    return len(concat_segmented(parts)) - m
