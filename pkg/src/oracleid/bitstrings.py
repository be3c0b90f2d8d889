"""Bit strings, concept classes, Gram matrices, and class generators.

Conventions used across the package:

* Bit positions are 0-based in code.  Disagreement *ranks* reported in run
  traces are 1-based because they enter cost formulas as ``sqrt(p)``.
* Strings are written MSB-first: ``BitString.from_str("0110")`` has bit 0
  equal to 0 and bit 1 equal to 1.
* Concept classes keep members sorted lexicographically so matrix indexing
  and serialized files are reproducible.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

__all__ = [
    "BitString",
    "ConceptClass",
    "FunctionTable",
    "GramMatrix",
    "majority_string",
    "majority_value",
    "filter_by_disagreement",
    "gram_of_function",
    "generate_class",
]


@dataclass(frozen=True, order=True)
class BitString:
    """An immutable length-``n`` binary string, packed MSB-first into an int.

    Lexicographic order on the written string coincides with numeric order
    on ``value`` for equal ``n``, which is what `ConceptClass` sorts by.
    """

    n: int
    value: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("bit string length must be positive")
        if not 0 <= self.value < (1 << self.n):
            raise ValueError(f"value {self.value} out of range for {self.n} bits")

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a binary string: {text!r}")
        return cls(len(text), int(text, 2))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BitString":
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError("bits must be 0 or 1")
            value = (value << 1) | b
        return cls(len(bits), value)

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(n, 0)

    def bit(self, i: int) -> int:
        """Bit at 0-based position ``i`` (MSB-first)."""
        if not 0 <= i < self.n:
            raise IndexError(f"bit index {i} out of range for length {self.n}")
        return (self.value >> (self.n - 1 - i)) & 1

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(self.bit(i) for i in range(self.n))

    def weight(self) -> int:
        return self.value.bit_count()

    def __getitem__(self, i: int) -> int:
        return self.bit(i)

    def __len__(self) -> int:
        return self.n

    def __iter__(self):
        return iter(self.bits)

    def __str__(self) -> str:
        return format(self.value, f"0{self.n}b")

    def __repr__(self) -> str:
        return f"BitString('{self}')"


@dataclass(frozen=True)
class ConceptClass:
    """A promise set of distinct equal-length bit strings.

    Members are stored sorted lexicographically; ``members[i]`` is the row
    and column ``i`` of every matrix indexed by this class.
    """

    n: int
    members: tuple[BitString, ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("concept class must have at least one member")
        if any(m.n != self.n for m in self.members):
            raise ValueError("all members must have the declared length")
        ordered = tuple(sorted(self.members))
        if any(a.value == b.value for a, b in zip(ordered, ordered[1:])):
            raise ValueError("duplicate members in concept class")
        object.__setattr__(self, "members", ordered)

    @classmethod
    def from_strings(cls, strings: Iterable[str]) -> "ConceptClass":
        members = tuple(BitString.from_str(s) for s in strings)
        if not members:
            raise ValueError("concept class must have at least one member")
        return cls(members[0].n, members)

    @classmethod
    def from_values(cls, n: int, values: Iterable[int]) -> "ConceptClass":
        return cls(n, tuple(BitString(n, v) for v in values))

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(m.value for m in self.members)

    def index(self, x: BitString) -> int:
        lo, hi = 0, len(self.members)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.members[mid] < x:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.members) and self.members[lo] == x:
            return lo
        raise KeyError(f"{x!r} is not a member")

    def __contains__(self, x: BitString) -> bool:
        try:
            self.index(x)
            return True
        except KeyError:
            return False

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def to_json(self) -> str:
        payload = {"n": self.n, "members": [str(m) for m in self.members]}
        return json.dumps(payload, sort_keys=True, separators=(",", ": "))

    @classmethod
    def from_json(cls, text: str) -> "ConceptClass":
        payload = json.loads(text)
        members = tuple(BitString.from_str(s) for s in payload["members"])
        return cls(int(payload["n"]), members)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "ConceptClass":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True)
class FunctionTable:
    """A total function on a concept class, given by one output per member."""

    domain: ConceptClass
    outputs: tuple[Hashable, ...]

    def __post_init__(self):
        if len(self.outputs) != self.domain.size:
            raise ValueError("need exactly one output per domain member")

    def __call__(self, x: BitString) -> Hashable:
        return self.outputs[self.domain.index(x)]

    def preimage(self, label: Hashable) -> tuple[BitString, ...]:
        return tuple(
            m for m, out in zip(self.domain.members, self.outputs) if out == label
        )

    @property
    def labels(self) -> tuple[Hashable, ...]:
        seen = []
        for out in self.outputs:
            if out not in seen:
                seen.append(out)
        return tuple(seen)


@dataclass(frozen=True)
class GramMatrix:
    """A square symmetric real matrix indexed by class members."""

    labels: tuple[BitString, ...]
    entries: np.ndarray

    def __post_init__(self):
        m = len(self.labels)
        arr = np.asarray(self.entries, dtype=float)
        if arr.shape != (m, m):
            raise ValueError(f"expected a {m}x{m} matrix, got {arr.shape}")
        if not np.allclose(arr, arr.T):
            raise ValueError("Gram matrix must be symmetric")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return len(self.labels)


def majority_value(values: Sequence[int], n: int) -> int:
    """Packed-int majority of packed-int strings; ties resolve to 1."""
    if not values:
        raise ValueError("majority of empty set")
    size = len(values)
    out = 0
    for i in range(n):
        mask = 1 << (n - 1 - i)
        ones = sum(1 for v in values if v & mask)
        out <<= 1
        if 2 * ones >= size:
            out |= 1
    return out


def majority_string(strings: Iterable[BitString]) -> BitString:
    """Bitwise majority of a nonempty set of equal-length strings.

    Bit ``i`` of the result is 1 iff at least half the strings have bit
    ``i`` equal to 1 (ties go to 1).  The result need not be a member of
    the input set.
    """
    members = list(strings)
    if not members:
        raise ValueError("majority of empty set")
    n = members[0].n
    if any(m.n != n for m in members):
        raise ValueError("strings must have uniform length")
    return BitString(n, majority_value([m.value for m in members], n))


def filter_by_disagreement(
    strings: Iterable[BitString],
    sigma: Sequence[int],
    s: BitString,
    p: int | None,
    found: bool,
) -> tuple[BitString, ...]:
    """Prune a candidate set after one disagreement search against ``s``.

    ``sigma`` lists 0-based bit positions in scan order.  With ``found``
    and rank ``p`` (1-based), keeps the strings that agree with ``s`` at
    ``sigma[0..p-2]`` and disagree at ``sigma[p-1]``.  Without ``found``,
    keeps the strings that agree with ``s`` on all of ``sigma`` (i.e. the
    intersection of the set with ``{s}`` when ``sigma`` covers every
    position).
    """
    members = list(strings)
    if found:
        if p is None or not 1 <= p <= len(sigma):
            raise ValueError(f"rank {p} out of range for scan order of length {len(sigma)}")
        prefix = sigma[: p - 1]
        pos = sigma[p - 1]
        return tuple(
            y
            for y in members
            if all(y.bit(i) == s.bit(i) for i in prefix) and y.bit(pos) != s.bit(pos)
        )
    return tuple(y for y in members if all(y.bit(i) == s.bit(i) for i in sigma))


def gram_of_function(f: FunctionTable) -> GramMatrix:
    """Gram matrix ``F`` of a function: ``F[x, y] = 1`` iff ``f(x) == f(y)``.

    With this convention ``J - F`` (J the all-ones matrix) has a 1 exactly
    where outputs differ, which is the target matrix for the function
    evaluation feasibility checks in :mod:`oracleid.sdp`.
    """
    outs = f.outputs
    m = len(outs)
    entries = np.fromiter(
        (1.0 if outs[i] == outs[j] else 0.0 for i in range(m) for j in range(m)),
        dtype=float,
        count=m * m,
    ).reshape(m, m)
    return GramMatrix(f.domain.members, entries)


_KIND_ALIASES = {
    "cube": "cube",
    "full-cube": "cube",
    "hamming": "hamming",
    "hamming-weight-k": "hamming",
    "hamming1": "hamming1",
    "hamming-pair": "hamming-pair",
    "hamming-weight-pair": "hamming-pair",
    "prefix": "prefix",
    "random": "random",
}

_ENUM_LIMIT = 1 << 20  # no materialized class beyond ~2^20 members


def generate_class(
    kind: str,
    n: int,
    *,
    k: int | None = None,
    free_bits: int | None = None,
    size: int | None = None,
    seed: int | None = None,
) -> ConceptClass:
    """Build one of the named concept-class families.

    kind: ``cube`` (all of {0,1}^n), ``hamming`` (weight exactly ``k``),
    ``hamming1`` (weight 1), ``hamming-pair`` (weight ``k-1`` or ``k``),
    ``prefix`` (arbitrary first ``free_bits`` bits, zeros elsewhere), or
    ``random`` (``size`` distinct strings drawn with the given seed).
    """
    if n < 1:
        raise ValueError("n must be positive")
    canonical = _KIND_ALIASES.get(kind)
    if canonical is None:
        raise ValueError(f"unknown class kind {kind!r}")

    if canonical == "cube":
        if (1 << n) > _ENUM_LIMIT:
            raise ValueError(f"cube of dimension {n} is too large to materialize")
        return ConceptClass.from_values(n, range(1 << n))

    if canonical == "hamming1":
        canonical, k = "hamming", 1

    if canonical == "hamming":
        if k is None or not 0 <= k <= n:
            raise ValueError(f"need a weight 0 <= k <= {n}")
        values = [_pack_positions(n, combo) for combo in itertools.combinations(range(n), k)]
        return ConceptClass.from_values(n, values)

    if canonical == "hamming-pair":
        if k is None or not 1 <= k <= n:
            raise ValueError(f"need a weight 1 <= k <= {n}")
        values = [_pack_positions(n, c) for c in itertools.combinations(range(n), k - 1)]
        values += [_pack_positions(n, c) for c in itertools.combinations(range(n), k)]
        return ConceptClass.from_values(n, values)

    if canonical == "prefix":
        if free_bits is None or not 1 <= free_bits <= n:
            raise ValueError(f"need 1 <= free_bits <= {n}")
        shift = n - free_bits
        return ConceptClass.from_values(n, (v << shift for v in range(1 << free_bits)))

    # random
    if size is None or size < 1:
        raise ValueError("random classes need a positive size")
    total = 1 << n
    if size > total:
        raise ValueError(f"cannot draw {size} distinct strings of length {n}")
    rng = np.random.default_rng(seed)
    if total <= _ENUM_LIMIT:
        values = rng.choice(total, size=size, replace=False)
        values = [int(v) for v in values]
    else:
        chosen: set[int] = set()
        while len(chosen) < size:
            chosen.add(int(rng.integers(0, total)))
        values = sorted(chosen)
    return ConceptClass.from_values(n, values)


def _pack_positions(n: int, positions: Sequence[int]) -> int:
    value = 0
    for i in positions:
        value |= 1 << (n - 1 - i)
    return value
