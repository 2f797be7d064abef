"""Exact nested lattice chain built from a systematic linear code.

A chain specification fixes a prime gamma, a dimension n, a generator
matrix G (n x kMax, systematic) and a scale beta.  Level k in [0, kMax]
defines the lattice

    Lambda(k) = beta * (gamma^{-1} kappa(G_k F_gamma^k) + Z^n),

where G_k is the first k columns of G.  Larger k means finer lattice;
Lambda(0) = beta * Z^n.  Points of the finest lattice Lambda(kMax) are
stored exactly as a digit vector over F_gamma plus an integer part:

    x = beta * (gamma^{-1} kappa(G d) + z).

Because G is systematic the pair (d, z) is the unique such representation,
so equality of points is equality of arrays.  Digit and integer arrays may
carry arbitrary leading batch axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatchError, NotInCodebookError, SpecMismatchError
from .galois import FieldMatrix


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of a nested lattice chain."""

    gamma: int
    n: int
    kMax: int
    G: FieldMatrix
    scale: float = 1.0

    def __post_init__(self):
        if not 1 <= self.kMax <= self.n:
            raise ValueError(f"kMax must be in [1, n], got {self.kMax} with n={self.n}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.G.modulus != self.gamma:
            raise ValueError("generator modulus differs from chain modulus")
        if self.G.rows != self.n or self.G.cols != self.kMax:
            raise ValueError(f"generator must be {self.n}x{self.kMax}")
        if not np.array_equal(self.G.entries[: self.kMax], np.eye(self.kMax, dtype=np.int64)):
            raise ValueError("generator must be systematic (identity top block)")

    def code_word(self, digits: np.ndarray) -> np.ndarray:
        """kappa(G digits) for digit arrays with a trailing kMax axis."""
        return np.mod(digits @ self.G.entries.T, self.gamma)


@dataclass(frozen=True)
class LevelPair:
    """Coding/shaping level pair with the shaping lattice strictly coarser."""

    kCoding: int
    kShaping: int

    def __post_init__(self):
        if not 0 <= self.kShaping < self.kCoding:
            raise ValueError(f"need 0 <= kShaping < kCoding, got {self}")


@dataclass(frozen=True)
class ChainPoint:
    """Exact point of the finest chain lattice, possibly batched."""

    spec: ChainSpec
    digits: np.ndarray
    ints: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.digits, dtype=np.int64)
        z = np.asarray(self.ints, dtype=np.int64)
        if d.shape[-1] != self.spec.kMax:
            raise ValueError(f"digit axis must have length kMax={self.spec.kMax}")
        if z.shape[-1] != self.spec.n:
            raise ValueError(f"integer axis must have length n={self.spec.n}")
        if d.shape[:-1] != z.shape[:-1]:
            raise ValueError("digit and integer batch shapes differ")
        if np.any(d < 0) or np.any(d >= self.spec.gamma):
            raise ValueError("digits must be canonical representatives in [0, gamma)")
        object.__setattr__(self, "digits", d)
        object.__setattr__(self, "ints", z)
        d.setflags(write=False)
        z.setflags(write=False)

    @property
    def batch_shape(self) -> tuple:
        return self.digits.shape[:-1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainPoint):
            return NotImplemented
        return (
            self.spec == other.spec
            and np.array_equal(self.digits, other.digits)
            and np.array_equal(self.ints, other.ints)
        )

    def __getitem__(self, idx) -> "ChainPoint":
        return ChainPoint(self.spec, self.digits[idx], self.ints[idx])


def zero_point(spec: ChainSpec, batch_shape: tuple = ()) -> ChainPoint:
    shape = tuple(batch_shape)
    return ChainPoint(
        spec,
        np.zeros(shape + (spec.kMax,), dtype=np.int64),
        np.zeros(shape + (spec.n,), dtype=np.int64),
    )


def _require_same_spec(a: ChainPoint, b: ChainPoint) -> None:
    if a.spec != b.spec:
        raise SpecMismatchError("points belong to different chain specifications")


def point_add(a: ChainPoint, b: ChainPoint) -> ChainPoint:
    """Exact group addition; field sum of digits with integer carries."""
    _require_same_spec(a, b)
    spec = a.spec
    digits = np.mod(a.digits + b.digits, spec.gamma)
    carry_num = spec.code_word(a.digits) + spec.code_word(b.digits) - spec.code_word(digits)
    # carry_num is divisible by gamma entry-wise because the three code
    # words agree modulo gamma.
    ints = a.ints + b.ints + carry_num // spec.gamma
    return ChainPoint(spec, digits, ints)


def point_scale(a: ChainPoint, c: int) -> ChainPoint:
    """Exact integer scaling; negative multipliers supported."""
    spec = a.spec
    c = int(c)
    digits = np.mod(c * a.digits, spec.gamma)
    carry_num = c * spec.code_word(a.digits) - spec.code_word(digits)
    ints = c * a.ints + carry_num // spec.gamma
    return ChainPoint(spec, digits, ints)


def point_neg(a: ChainPoint) -> ChainPoint:
    return point_scale(a, -1)


def point_sub(a: ChainPoint, b: ChainPoint) -> ChainPoint:
    return point_add(a, point_neg(b))


def mod_level(x: ChainPoint, k: int) -> ChainPoint:
    """Canonical representative of x modulo Lambda(k).

    Zeroes the first k digits and the whole integer part; the difference
    from x lies in Lambda(k) because the removed head is a Lambda(k) point
    up to integer carries.
    """
    spec = x.spec
    if not 0 <= k <= spec.kMax:
        raise ValueError(f"level must be in [0, kMax], got {k}")
    digits = x.digits.copy()
    digits[..., :k] = 0
    return ChainPoint(spec, digits, np.zeros_like(x.ints))


def quantize_level(x: ChainPoint, k: int) -> ChainPoint:
    """Quantization of x onto Lambda(k): x minus its canonical residue."""
    return point_sub(x, mod_level(x, k))


def encode_message(w, lp: LevelPair, spec: ChainSpec) -> ChainPoint:
    """Map message digits to the codebook point with those digits.

    The message occupies digit positions kShaping+1 .. kCoding; all other
    digits and the integer part are zero, which is already the canonical
    residue modulo the shaping lattice.
    """
    w = np.asarray(w, dtype=np.int64)
    width = lp.kCoding - lp.kShaping
    if w.shape[-1] != width:
        raise LengthMismatchError(f"message length {w.shape[-1]} != {width}")
    if lp.kCoding > spec.kMax:
        raise ValueError("coding level exceeds kMax")
    if np.any(w < 0) or np.any(w >= spec.gamma):
        raise ValueError("message digits must lie in [0, gamma)")
    shape = w.shape[:-1]
    digits = np.zeros(shape + (spec.kMax,), dtype=np.int64)
    digits[..., lp.kShaping : lp.kCoding] = w
    return ChainPoint(spec, digits, np.zeros(shape + (spec.n,), dtype=np.int64))


def decode_codeword(t: ChainPoint, lp: LevelPair) -> np.ndarray:
    """Read message digits back off a canonical codebook point."""
    if np.any(t.ints != 0):
        raise NotInCodebookError("integer part must be zero")
    if np.any(t.digits[..., : lp.kShaping] != 0) or np.any(t.digits[..., lp.kCoding :] != 0):
        raise NotInCodebookError("digits outside the codebook slice must be zero")
    return t.digits[..., lp.kShaping : lp.kCoding].copy()


def split_codeword(t: ChainPoint, levels) -> list:
    """Layer decomposition of a canonical point along ascending cut levels.

    ``levels`` is a strictly ascending list of digit levels; component i
    holds the digits of t in positions (levels[i], levels[i+1]] with the
    final upper bound kMax.  Components sum back to t after reduction
    modulo the coarsest level.
    """
    spec = t.spec
    levels = [int(k) for k in levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("cut levels must be strictly ascending")
    if levels and not 0 <= levels[0] <= spec.kMax:
        raise ValueError("cut levels must lie in [0, kMax]")
    if np.any(t.ints != 0) or (levels and np.any(t.digits[..., : levels[0]] != 0)):
        raise NotInCodebookError("point must be canonical under the coarsest cut level")
    bounds = levels + [spec.kMax]
    parts = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        digits = np.zeros_like(t.digits)
        digits[..., lo:hi] = t.digits[..., lo:hi]
        parts.append(ChainPoint(spec, digits, np.zeros_like(t.ints)))
    return parts


def real_embed(x: ChainPoint) -> np.ndarray:
    """Floating-point coordinates of the point."""
    spec = x.spec
    return spec.scale * (spec.code_word(x.digits) / spec.gamma + x.ints)


def make_chain_spec(gamma: int, n: int, kMax: int = None, scale: float = 1.0, rng=None) -> ChainSpec:
    """Convenience constructor; random systematic generator when rng given."""
    if kMax is None:
        kMax = n
    G = np.zeros((n, kMax), dtype=np.int64)
    G[:kMax] = np.eye(kMax, dtype=np.int64)
    if rng is not None and n > kMax:
        G[kMax:] = rng.integers(0, gamma, size=(n - kMax, kMax))
    return ChainSpec(gamma=gamma, n=n, kMax=kMax, G=FieldMatrix(G, gamma), scale=scale)
