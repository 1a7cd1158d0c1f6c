"""Affine GF(2) hash family ``h(y) = A y + b``.

Witnesses are integers in ``[0, 2**l)``; bit ``j`` of the integer is input
coordinate ``j`` (bit 0 is the least significant).  Output bit ``r`` of a hash
is row ``r`` of ``A`` dotted with the input, plus ``b[r]``, mod 2.  Packed
outputs use the same convention (output bit ``r`` is integer bit ``r``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


MAX_ENUMERATION_BITS = 22


@dataclass(frozen=True, eq=False)
class AffineHash:
    """One member of the family ``{0,1}^l -> {0,1}^m``."""

    matrix: np.ndarray  # (m, l) uint8, row-major
    offset: np.ndarray  # (m,) uint8

    def __post_init__(self):
        a = np.array(self.matrix, dtype=np.uint8, ndmin=2)
        b = np.array(self.offset, dtype=np.uint8).reshape(-1)
        if a.ndim != 2:
            raise ValueError("matrix must be 2-dimensional")
        m, l = a.shape
        if l < 1:
            raise ValueError("hash needs at least one input bit (l >= 1)")
        if b.shape != (m,):
            raise ValueError(f"offset length {b.size} does not match m={m}")
        if np.any(a > 1) or np.any(b > 1):
            raise ValueError("matrix and offset entries must be bits")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "offset", b)
        # packed rows make evaluation on integer witnesses a popcount
        weights = np.left_shift(np.uint64(1), np.arange(l, dtype=np.uint64))
        object.__setattr__(self, "_row_masks", (a.astype(np.uint64) @ weights).astype(np.uint64))

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    def __eq__(self, other):
        if not isinstance(other, AffineHash):
            return NotImplemented
        return (self.matrix.shape == other.matrix.shape
                and np.array_equal(self.matrix, other.matrix)
                and np.array_equal(self.offset, other.offset))

    def __hash__(self):
        return hash((self.matrix.shape, self.matrix.tobytes(), self.offset.tobytes()))

    def __repr__(self):
        return f"AffineHash(l={self.cols}, m={self.rows}, {serialize(self)!r})"

    def evaluate_many(self, ys) -> np.ndarray:
        """Packed outputs for an array of integer witnesses."""
        ys = np.asarray(ys, dtype=np.uint64)
        out = np.zeros(ys.shape, dtype=np.uint64)
        for r, mask in enumerate(self._row_masks):
            bit = np.bitwise_count(ys & mask) & np.uint8(1)
            bit ^= self.offset[r]
            out |= bit.astype(np.uint64) << np.uint64(r)
        return out

    def zero_mask(self, ys) -> np.ndarray:
        """Boolean mask of the witnesses in ``h^{-1}(0)``."""
        ys = np.asarray(ys, dtype=np.uint64)
        keep = np.ones(ys.shape, dtype=bool)
        for r, mask in enumerate(self._row_masks):
            keep &= (np.bitwise_count(ys & mask) & 1) == self.offset[r]
        return keep


def _bits_of(y, l: int) -> np.ndarray:
    if isinstance(y, (int, np.integer)):
        if not 0 <= int(y) < (1 << l):
            raise ValueError(f"witness {y} out of range for l={l}")
        return np.array([(int(y) >> j) & 1 for j in range(l)], dtype=np.uint8)
    bits = np.asarray(y, dtype=np.uint8).reshape(-1)
    if bits.size != l:
        raise ValueError(f"input has {bits.size} bits, hash expects {l}")
    if np.any(bits > 1):
        raise ValueError("input entries must be bits")
    return bits


def evaluate(h: AffineHash, y) -> np.ndarray:
    """Return ``A y + b`` over GF(2) as an array of ``m`` bits.

    ``y`` is either an integer witness or a length-``l`` bit sequence with
    entry ``j`` holding bit ``j``.
    """
    bits = _bits_of(y, h.cols)
    return ((h.matrix.astype(np.int64) @ bits + h.offset) & 1).astype(np.uint8)


def pack_bits(bits: Sequence[int]) -> int:
    return sum(int(v) << j for j, v in enumerate(bits))


def sample_hash(l: int, m: int, rng: np.random.Generator) -> AffineHash:
    """Draw a family member uniformly: every bit of ``A`` then ``b`` is a fair coin."""
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    a = rng.integers(0, 2, size=(m, l), dtype=np.uint8)
    b = rng.integers(0, 2, size=m, dtype=np.uint8)
    return AffineHash(a, b)


def family_size_bits(l: int, m: int) -> int:
    return m * (l + 1)


def hash_from_index(l: int, m: int, index: int) -> AffineHash:
    """The ``index``-th family member; bits fill ``A`` row-major, then ``b``."""
    nbits = family_size_bits(l, m)
    if not 0 <= index < (1 << nbits):
        raise ValueError("index out of range")
    bits = np.array([(index >> j) & 1 for j in range(nbits)], dtype=np.uint8)
    return AffineHash(bits[: m * l].reshape(m, l), bits[m * l:])


def enumerate_family(l: int, m: int) -> Iterator[AffineHash]:
    for index in range(1 << family_size_bits(l, m)):
        yield hash_from_index(l, m, index)


def family_outputs(l: int, m: int, ys) -> np.ndarray:
    """Packed outputs of every family member on ``ys``; shape (2**(m(l+1)), len(ys)).

    Vectorised twin of ``enumerate_family`` used for exhaustive counting.
    """
    if family_size_bits(l, m) > MAX_ENUMERATION_BITS:
        raise ValueError(f"family of 2^{family_size_bits(l, m)} members is too large to enumerate")
    ys = np.asarray(ys, dtype=np.int64)
    idx = np.arange(1 << family_size_bits(l, m), dtype=np.int64)
    out = np.zeros((idx.size, ys.size), dtype=np.int64)
    for r in range(m):
        row = (idx >> (r * l)) & ((1 << l) - 1)
        off = (idx >> (m * l + r)) & 1
        bit = (np.bitwise_count(row[:, None] & ys[None, :]) & 1) ^ off[:, None]
        out |= bit.astype(np.int64) << r
    return out


def pairwise_independence_frequency(l: int, m: int, y1, y2, a, b,
                                    trials: int, rng: np.random.Generator) -> float:
    """Empirical ``Pr[h(y1) = a and h(y2) = b]`` over ``trials`` sampled hashes."""
    y1b, y2b = _bits_of(y1, l), _bits_of(y2, l)
    if np.array_equal(y1b, y2b):
        raise ValueError("pairwise independence only concerns distinct inputs")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    a = np.asarray(a, dtype=np.uint8).reshape(-1)
    b = np.asarray(b, dtype=np.uint8).reshape(-1)
    if a.size != m or b.size != m:
        raise ValueError(f"targets must have m={m} bits")
    if m == 0:
        return 1.0
    mats = rng.integers(0, 2, size=(trials, m, l + 1), dtype=np.uint8)
    y1x = np.append(y1b, 1).astype(np.int64)
    y2x = np.append(y2b, 1).astype(np.int64)
    o1 = (mats.astype(np.int64) @ y1x) & 1
    o2 = (mats.astype(np.int64) @ y2x) & 1
    hits = np.all(o1 == a, axis=1) & np.all(o2 == b, axis=1)
    return float(hits.mean())


def _hex_width(bits: int) -> int:
    return max(1, -(-bits // 4))


def serialize(h: AffineHash) -> str:
    """Header ``l=<l> m=<m>``, one hex line per row of ``A``, then ``b`` in hex."""
    wl, wm = _hex_width(h.cols), _hex_width(h.rows)
    lines = [f"l={h.cols} m={h.rows}"]
    lines += [format(pack_bits(row), f"0{wl}x") for row in h.matrix]
    lines.append(format(pack_bits(h.offset), f"0{wm}x"))
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> AffineHash:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty hash description")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    try:
        l, m = int(header["l"]), int(header["m"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad hash header {lines[0]!r}") from exc
    if len(lines) != m + 2:
        raise ValueError(f"expected {m + 1} data lines, got {len(lines) - 1}")
    rows = [int(tok, 16) for tok in lines[1:m + 1]]
    off = int(lines[m + 1], 16)
    if any(r >> l for r in rows) or off >> m:
        raise ValueError("hex value wider than declared bit count")
    a = np.array([[(r >> j) & 1 for j in range(l)] for r in rows], dtype=np.uint8).reshape(m, l)
    b = np.array([(off >> r) & 1 for r in range(m)], dtype=np.uint8)
    return AffineHash(a, b)


def witness_bits(l: int, ys=None) -> np.ndarray:
    """Bit matrix (len(ys), l) of integer witnesses, column ``j`` = bit ``j``."""
    ys = np.arange(1 << l) if ys is None else np.asarray(ys)
    return ((ys.astype(np.int64)[:, None] >> np.arange(l)) & 1).astype(np.float64)


def sample_stack(l: int, sizes: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Draw several hashes at once as one ``(sum(sizes), l + 1)`` bit array.

    Hash ``i`` owns the ``sizes[i]`` consecutive rows starting at
    ``sum(sizes[:i])``; columns ``:l`` are its ``A`` and column ``l`` is ``b``.
    Every bit is a fair coin, so each hash is uniform over the family.
    """
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if any(m < 0 for m in sizes):
        raise ValueError("hash sizes must be >= 0")
    return rng.integers(0, 2, size=(int(sum(sizes)), l + 1), dtype=np.uint8)


def split_stack(stack: np.ndarray, sizes: Sequence[int]) -> list[AffineHash]:
    bounds = np.cumsum([0, *sizes])
    return [AffineHash(stack[lo:hi, :-1], stack[lo:hi, -1]) for lo, hi in zip(bounds, bounds[1:])]


def stack_zero_masks(stack: np.ndarray, sizes: Sequence[int], ybits: np.ndarray) -> np.ndarray:
    """``out[i, y]`` is True iff hash ``i`` of the stack maps ``y`` to 0.

    ``ybits`` comes from :func:`witness_bits`.  Hashes with no output bits
    keep every witness.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    out = np.ones((sizes.size, ybits.shape[0]), dtype=bool)
    sized = np.flatnonzero(sizes)
    if sized.size == 0 or ybits.shape[0] == 0:
        return out
    ext = np.hstack([ybits, np.ones((ybits.shape[0], 1))]).astype(np.float32)
    parity = (ext @ stack.T.astype(np.float32)).astype(np.uint8) & 1  # (n_y, rows)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])[sized]
    out[sized] = (np.add.reduceat(parity, starts, axis=1) == 0).T
    return out


def zero_masks(hashes: Sequence[AffineHash], ybits: np.ndarray) -> np.ndarray:
    """:func:`stack_zero_masks` for a list of hash objects."""
    l = ybits.shape[1]
    if any(h.cols != l for h in hashes):
        raise ValueError("every hash must take the witness bit count")
    sizes = [h.rows for h in hashes]
    rows = [np.hstack([h.matrix, h.offset[:, None]]) for h in hashes if h.rows]
    stack = np.vstack(rows) if rows else np.zeros((0, l + 1), dtype=np.uint8)
    return stack_zero_masks(stack, sizes, ybits)
