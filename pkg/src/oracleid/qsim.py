"""Statevector simulation of the search subroutines, with strict query counting.

Simulated register: ``k`` index qubits plus one target qubit.  The oracle
for a hidden string maps basis state ``|v, b>`` to ``|v, b XOR e_v>`` where
``e`` is the effective string being searched (the bitwise XOR of the hidden
string with a known reference, read in a chosen scan order).  Index values
at or beyond the search width are never marked.

Query accounting rules (applied everywhere, including inside amplitude
amplification):

* one application of the oracle permutation = one query, whether it is used
  for phase marking or anything else;
* classically checking one candidate position = one query (it is a single
  oracle evaluation);
* positions already proven zero by earlier classical scans may be skipped
  for free -- that is knowledge, not an oracle call.

All randomness is drawn from one seeded ``numpy`` PCG64 generator per run,
so outcome sequences are reproducible bit-for-bit across platforms and
kernel backends share the same draw order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .bitstrings import BitString

__all__ = [
    "SearchConfig",
    "DEFAULT_CONFIG",
    "QueryCounter",
    "SimStats",
    "ScanState",
    "StateVector",
    "FirstOneResult",
    "DisagreementResult",
    "apply_oracle",
    "grover_search_unknown_count",
    "find_first_one",
    "quantum_disagreement_finder",
    "repetitions_for_budget",
]


@dataclass(frozen=True)
class SearchConfig:
    """Free constants of the search subroutines.

    growth: multiplicative schedule for the unknown-marked-count search
        (each failed round scales the iteration-count ceiling by this).
    cutoff_coeff: a single unknown-count search aborts once its total
        amplification iterations exceed ``cutoff_coeff * sqrt(width)``.
    classical_width: regions at most this wide are scanned classically
        instead of amplified; below this size amplitude amplification
        cannot beat direct queries.
    min_repetitions: floor on the number of independent repetitions used
        to drive a finder's failure probability down to a caller's budget.
    norm_tol: statevector norm must stay within this of 1.
    """

    growth: float = 1.2
    cutoff_coeff: float = 9.0
    classical_width: int = 4
    min_repetitions: int = 3
    norm_tol: float = 1e-9


DEFAULT_CONFIG = SearchConfig()


class QueryCounter:
    """Counts oracle applications; increments by exactly one per application."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def tick(self, k: int = 1) -> None:
        if k < 0:
            raise ValueError("cannot decrement a query counter")
        self.count += k

    def __repr__(self) -> str:
        return f"QueryCounter({self.count})"


@dataclass
class SimStats:
    """Tracks the worst statevector norm drift seen during a run."""

    max_drift: float = 0.0
    tol: float = DEFAULT_CONFIG.norm_tol

    def observe(self, state: "StateVector") -> None:
        drift = abs(state.norm() - 1.0)
        if drift > self.max_drift:
            self.max_drift = drift
        if drift > self.tol:
            raise RuntimeError(f"statevector norm drifted by {drift:.3e}")


@dataclass
class ScanState:
    """Classical knowledge shared between repeated scans of one string.

    Ranks below ``cleared`` have been queried individually and are zero.
    """

    cleared: int = 0


@dataclass
class StateVector:
    """Amplitudes of ``qubits`` qubits; the last qubit is the oracle target."""

    qubits: int
    amps: np.ndarray

    @classmethod
    def basis(cls, qubits: int, index: int = 0) -> "StateVector":
        amps = np.zeros(1 << qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(qubits, amps)

    @classmethod
    def uniform_with_minus_target(cls, index_qubits: int) -> "StateVector":
        """Uniform superposition over the index register, target in |0>-|1>."""
        dim = 1 << index_qubits
        amps = np.empty(2 * dim, dtype=np.complex128)
        c = 1.0 / math.sqrt(2 * dim)
        amps[0::2] = c
        amps[1::2] = -c
        return cls(index_qubits + 1, amps)

    @property
    def index_dim(self) -> int:
        return 1 << (self.qubits - 1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def index_probabilities(self) -> np.ndarray:
        out = np.empty(self.index_dim, dtype=np.float64)
        kernels.index_probabilities(self.amps, out)
        return out


@dataclass(frozen=True)
class FirstOneResult:
    """Outcome of one first-marked-position scan.

    ``exact`` means the answer was pinned down by classical queries alone
    (every earlier rank individually verified zero), so it cannot be wrong.
    """

    position: int | None
    exact: bool


@dataclass(frozen=True)
class DisagreementResult:
    rank: int | None  # 1-based rank in scan order, None = no disagreement
    exact: bool


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def apply_oracle(
    state: StateVector, x: BitString, counter: QueryCounter | None = None
) -> StateVector:
    """Apply the oracle for ``x`` once: ``|v, b> -> |v, b XOR x_v>``.

    Index values at or beyond ``len(x)`` act as identity.  Counts one query.
    """
    dim = state.index_dim
    if x.n > dim:
        raise ValueError(f"index register of width {dim} too narrow for {x.n} bits")
    marked = np.zeros(dim, dtype=np.uint8)
    for v in range(x.n):
        marked[v] = x.bit(v)
    kernels.oracle_permute(state.amps, marked)
    if counter is not None:
        counter.tick()
    return state


_MAX_SIM_WIDTH = 64  # statevector simulation cap


class _Effective:
    """Rank-indexed view of the string actually searched.

    Rank ``t`` is bit ``order[t]`` of the hidden string XORed with the
    reference ``s`` (zero reference and identity order by default).  The
    raw bits live here so the simulator can build oracle masks, but every
    read that reaches the algorithm is routed through a counted query.
    """

    __slots__ = ("ranks",)

    def __init__(
        self,
        x: BitString,
        s: BitString | None,
        order: Sequence[int] | None,
        width: int,
    ) -> None:
        scan = tuple(order) if order is not None else tuple(range(x.n))
        if width > len(scan):
            raise ValueError(f"width {width} exceeds scan order of length {len(scan)}")
        if width > _MAX_SIM_WIDTH:
            raise ValueError(f"simulation capped at {_MAX_SIM_WIDTH} bits")
        if s is not None and s.n != x.n:
            raise ValueError("reference string length mismatch")
        if s is None:
            self.ranks = tuple(x.bit(j) for j in scan[:width])
        else:
            self.ranks = tuple(x.bit(j) ^ s.bit(j) for j in scan[:width])

    def mask(self, limit: int, dim: int) -> np.ndarray:
        out = np.zeros(dim, dtype=np.uint8)
        out[:limit] = self.ranks[:limit]
        return out

    def query(self, t: int, counter: QueryCounter) -> int:
        counter.tick()
        return self.ranks[t]


def _measure_index(state: StateVector, rng: np.random.Generator) -> int:
    probs = state.index_probabilities()
    cum = np.cumsum(probs)
    u = rng.random() * cum[-1]
    return int(np.searchsorted(cum, u, side="right"))


def _bbht(
    eff: _Effective,
    limit: int,
    rng: np.random.Generator,
    counter: QueryCounter,
    config: SearchConfig,
    stats: SimStats,
) -> int | None:
    """Search ranks [0, limit) for any marked one, marked count unknown.

    Rounds run a random number of amplification iterations drawn from a
    growing window, measure, and classically verify the measured candidate.
    Gives up once total iterations exceed ``cutoff_coeff * sqrt(limit)``;
    a None can therefore be wrong (marked ranks missed), never a position.
    """
    if limit <= 0:
        return None
    k = max(0, (limit - 1).bit_length())
    dim = 1 << k
    marked = eff.mask(limit, dim)
    if dim == 1:
        # single candidate: one verification settles it
        if eff.query(0, counter):
            return 0
        return None
    budget = config.cutoff_coeff * math.sqrt(limit)
    m = 1.0
    m_cap = math.sqrt(dim)
    used = 0
    while used <= budget:
        j = int(rng.integers(0, math.ceil(m)))
        state = StateVector.uniform_with_minus_target(k)
        kernels.grover_run(state.amps, marked, j)
        counter.tick(j)
        used += j
        stats.observe(state)
        v = _measure_index(state, rng)
        if v < limit:
            if eff.query(v, counter):
                return v
        m = min(m * config.growth, m_cap)
    return None


def _scan_region(
    eff: _Effective, scan: ScanState, hi: int, counter: QueryCounter
) -> int | None:
    """Classically query ranks [cleared, hi); returns the first 1 if any."""
    for t in range(scan.cleared, hi):
        if eff.query(t, counter):
            scan.cleared = t
            return t
        scan.cleared = t + 1
    return None


def _stage_ladder(classical_width: int, width: int) -> list[int]:
    top = min(max(classical_width, 1), width)
    tops = [top]
    while top < width:
        top = min(2 * top, width)
        tops.append(top)
    return tops


def grover_search_unknown_count(
    x: BitString,
    width: int,
    *,
    s: BitString | None = None,
    order: Sequence[int] | None = None,
    rng=None,
    counter: QueryCounter | None = None,
    config: SearchConfig = DEFAULT_CONFIG,
    stats: SimStats | None = None,
) -> int | None:
    """Find any rank in [0, width) where ``x`` disagrees with ``s``.

    Returns a verified marked rank (0-based), or None after the cutoff
    schedule -- which is certain when nothing is marked and a bounded-error
    miss otherwise.
    """
    rng = _as_rng(rng)
    counter = counter if counter is not None else QueryCounter()
    stats = stats if stats is not None else SimStats(tol=config.norm_tol)
    eff = _Effective(x, s, order, width)
    return _bbht(eff, width, rng, counter, config, stats)


def find_first_one(
    x: BitString,
    width: int,
    *,
    s: BitString | None = None,
    order: Sequence[int] | None = None,
    rng=None,
    counter: QueryCounter | None = None,
    config: SearchConfig = DEFAULT_CONFIG,
    stats: SimStats | None = None,
    scan: ScanState | None = None,
) -> FirstOneResult:
    """Find the first rank in [0, width) where ``x`` disagrees with ``s``.

    Strategy: scan a small prefix classically, then search prefixes of
    doubling width for any disagreement; once one is verified at rank ``v``,
    repeatedly search strictly before it to move the candidate forward.
    The gap below the candidate is finished off classically when it is
    small, which upgrades the answer to exact.

    Expected query cost scales with the square root of the answer.  A
    returned position is always a verified disagreement but may be later
    than the true first one; None may be wrong unless ``exact``.
    """
    rng = _as_rng(rng)
    counter = counter if counter is not None else QueryCounter()
    stats = stats if stats is not None else SimStats(tol=config.norm_tol)
    scan = scan if scan is not None else ScanState()
    if width <= 0:
        return FirstOneResult(None, True)
    eff = _Effective(x, s, order, width)

    for top in _stage_ladder(config.classical_width, width):
        if top <= scan.cleared:
            continue
        if top <= config.classical_width:
            q = _scan_region(eff, scan, top, counter)
            if q is not None:
                return FirstOneResult(q, True)
            continue
        v = _bbht(eff, top, rng, counter, config, stats)
        if v is None:
            continue
        best = v
        while True:
            gap = best - scan.cleared
            if gap <= 0:
                return FirstOneResult(best, True)
            if gap <= config.classical_width:
                q = _scan_region(eff, scan, best, counter)
                return FirstOneResult(q if q is not None else best, True)
            w = _bbht(eff, best, rng, counter, config, stats)
            if w is None:
                return FirstOneResult(best, False)
            best = w
    return FirstOneResult(None, scan.cleared >= width)


def repetitions_for_budget(config: SearchConfig, error_budget: float) -> int:
    """Independent repetitions needed to push failure below the budget.

    A single scan fails with probability at most 1/3 by construction, so
    ``t`` repetitions fail together with probability at most ``3**-t``.
    """
    if not 0 < error_budget < 1:
        raise ValueError("error budget must be in (0, 1)")
    needed = math.ceil(math.log(1.0 / error_budget) / math.log(3.0))
    return max(config.min_repetitions, needed)


def quantum_disagreement_finder(
    x: BitString,
    s: BitString,
    order: Sequence[int],
    width: int,
    error_budget: float,
    *,
    rng=None,
    counter: QueryCounter | None = None,
    config: SearchConfig = DEFAULT_CONFIG,
    stats: SimStats | None = None,
) -> DisagreementResult:
    """First scan-order disagreement of ``x`` with ``s``, amplified.

    Runs the first-marked scan several times and keeps the earliest
    verified disagreement.  Every returned position is a real disagreement
    and never earlier than the true first, so taking the minimum is the
    correct combiner; the call fails only when every repetition does.
    Classical knowledge (individually verified zero ranks) is shared
    across repetitions, and an exact repetition short-circuits the rest.
    """
    rng = _as_rng(rng)
    counter = counter if counter is not None else QueryCounter()
    stats = stats if stats is not None else SimStats(tol=config.norm_tol)
    scan = ScanState()
    best: int | None = None
    for _ in range(repetitions_for_budget(config, error_budget)):
        res = find_first_one(
            x,
            width,
            s=s,
            order=order,
            rng=rng,
            counter=counter,
            config=config,
            stats=stats,
            scan=scan,
        )
        if res.exact:
            pos = res.position
            return DisagreementResult(None if pos is None else pos + 1, True)
        if res.position is not None:
            best = res.position if best is None else min(best, res.position)
    return DisagreementResult(None if best is None else best + 1, False)
