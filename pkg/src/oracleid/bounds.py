"""Closed-form and certified complexity bounds for identification.

The central quantity is the optimum of the trace-cost program

    maximize    sum_i sqrt(p_i)
    subject to  sum_i p_i <= N,   prod_i max(2, p_i) <= M,
                r in [N],  p_i in [N],

which upper-bounds the idealized cost of any final-algorithm run on a
class of M strings of length N.  ``brute_force_cost`` solves it exactly by
exhaustive search; ``closed_form_cost`` evaluates the matching closed form
``min( sqrt(N log2 M / (log2(N / log2 M) + 1)), sqrt(M) )``; the LP pair
(``lp_primal_opt`` / ``check_dual_certificate``) sandwiches the optimum
from above through an exactly-solved relaxation and an explicit dual
point, giving the chain

    brute_force_cost  <=  lp_primal_opt  <=  dual certificate value.

Also here: the threshold-class lower-bound scan, the per-class elimination
parameter ``gamma_hat`` with its learning bound, and baseline formulas.
All logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .bitstrings import BitString, ConceptClass

__all__ = [
    "brute_force_cost",
    "closed_form_cost",
    "lp_primal_opt",
    "lp_problem_data",
    "DualCertificate",
    "check_dual_certificate",
    "lower_bound_k",
    "GammaHatResult",
    "gamma_hat",
    "LearningBound",
    "learning_bound",
    "Baselines",
    "baseline_formulas",
    "BoundReport",
    "build_report",
    "CSV_HEADER",
]

_EXHAUSTIVE_N_CAP = 24


def brute_force_cost(M: int, N: int) -> tuple[float, tuple[int, ...]]:
    """Exact optimum of the trace-cost program, with an optimal multiset.

    Exhaustive search over nondecreasing part lists with Cauchy-Schwarz
    pruning; fine up to N = 24.  M = 1 is defined as cost 0 with no parts
    (a singleton promise needs no queries), since the r >= 1 constraint
    would otherwise make the program infeasible there.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if M < 1:
        raise ValueError("M must be positive")
    if M == 1:
        return 0.0, ()
    if N > _EXHAUSTIVE_N_CAP:
        raise ValueError(
            f"exhaustive search capped at N={_EXHAUSTIVE_N_CAP}; use closed_form_cost"
        )

    best_val = 0.0
    best_parts: tuple[int, ...] = ()

    def rec(min_p: int, sum_left: int, prod_left: int, acc: float, parts: list[int]):
        nonlocal best_val, best_parts
        if acc > best_val:
            best_val = acc
            best_parts = tuple(parts)
        if sum_left < min_p:
            return
        # at most floor(log2 prod_left) more parts (factor >= 2 each), each
        # eating >= min_p of the sum budget; Cauchy-Schwarz caps their value
        k_max = min(prod_left.bit_length() - 1, sum_left // min_p)
        if k_max <= 0 or acc + math.sqrt(sum_left * k_max) <= best_val:
            return
        for p in range(min_p, sum_left + 1):
            factor = max(2, p)
            if factor > prod_left:
                break
            parts.append(p)
            rec(p, sum_left - p, prod_left // factor, acc + math.sqrt(p), parts)
            parts.pop()

    rec(1, N, M, 0.0, [])
    return best_val, best_parts


def closed_form_cost(M: int, N: int) -> float:
    """min( sqrt(N log2 M / (log2(N / log2 M) + 1)), sqrt(M) ), unit constant."""
    if N < 1:
        raise ValueError("N must be positive")
    if not 2 <= M <= (1 << N):
        raise ValueError(f"need 2 <= M <= 2^{N}")
    logm = math.log2(M)
    value = math.sqrt(N * logm / (math.log2(N / logm) + 1.0))
    return min(value, math.sqrt(M))


def lp_problem_data(N: int, m: int):
    """Data of the relaxed budget LP, after the constant-4 loosening.

    Variables ``x_k`` (k = 1..n') count parts of rounded size ``2^k``:

        maximize    sum_k sqrt(2^k) x_k
        subject to  sum_k 2^k x_k <= 4N,   sum_k k x_k <= 4m,   x >= 0,

    with ``n' = ceil(log2(4N))``.  Returns (objective, rows, rhs).
    """
    if N < 1 or m < 1:
        raise ValueError("N and m must be positive")
    n_prime = math.ceil(math.log2(4 * N))
    ks = list(range(1, n_prime + 1))
    objective = [math.sqrt(2.0**k) for k in ks]
    rows = [[float(2**k) for k in ks], [float(k) for k in ks]]
    rhs = [4.0 * N, 4.0 * m]
    return objective, rows, rhs


def lp_primal_opt(N: int, m: int) -> float:
    """Exact LP optimum by enumerating its basic feasible points.

    Two inequality constraints mean every vertex has at most two positive
    coordinates; the candidate points are solved in exact rationals.
    """
    if N < 1 or m < 1:
        raise ValueError("N and m must be positive")
    n_prime = math.ceil(math.log2(4 * N))
    big_n = 4 * N
    big_m = 4 * m
    best = 0.0
    for k in range(1, n_prime + 1):
        xk = min(Fraction(big_n, 2**k), Fraction(big_m, k))
        best = max(best, math.sqrt(2.0**k) * float(xk))
    for k in range(1, n_prime + 1):
        for l in range(k + 1, n_prime + 1):
            det = 2**k * l - 2**l * k
            if det == 0:
                continue
            xk = Fraction(big_n * l - 2**l * big_m, det)
            xl = Fraction(2**k * big_m - big_n * k, det)
            if xk >= 0 and xl >= 0:
                best = max(
                    best,
                    math.sqrt(2.0**k) * float(xk) + math.sqrt(2.0**l) * float(xl),
                )
    return best


@dataclass(frozen=True)
class DualCertificate:
    y: float
    z: float
    dual_value: float
    min_slack: float
    feasible: bool
    n_prime: int
    d: float


def check_dual_certificate(N: int, m: int, tol: float = 1e-9) -> DualCertificate:
    """Evaluate the explicit dual point and check it satisfies every row.

    With ``d = log2(2N/m)`` (requires m <= N so d >= 1), the point is
    ``y = 1/sqrt(d 2^d)``, ``z = sqrt(2^d / d)``; feasibility means
    ``2^k y + k z >= sqrt(2^k)`` for every k up to ``ceil(log2(4N))``.
    Its objective ``4N y + 4m z`` upper-bounds the primal by weak duality.
    """
    if N < 1 or m < 1:
        raise ValueError("N and m must be positive")
    if m > N:
        raise ValueError("outside certificate regime (need m <= N so that d >= 1)")
    d = math.log2(2.0 * N / m)
    y = 1.0 / math.sqrt(d * 2.0**d)
    z = math.sqrt(2.0**d / d)
    n_prime = math.ceil(math.log2(4 * N))
    slacks = [2.0**k * y + k * z - math.sqrt(2.0**k) for k in range(1, n_prime + 1)]
    min_slack = min(slacks)
    return DualCertificate(
        y=y,
        z=z,
        dual_value=4.0 * N * y + 4.0 * m * z,
        min_slack=min_slack,
        feasible=min_slack >= -tol,
        n_prime=n_prime,
        d=d,
    )


def lower_bound_k(N: int, M: int) -> tuple[int, float]:
    """Best threshold weight and its lower-bound value sqrt((N-k+1) k).

    Scans k in [N] for the largest ``(N-k+1) k`` subject to
    ``C(N, k-1) + C(N, k) <= M`` (the weight-{k-1, k} class fits in the
    budget), using exact integer binomials.  Requires N < M <= 2^N; the
    smallest optimal k is returned on ties.
    """
    if not N < M <= (1 << N):
        raise ValueError(f"need N < M <= 2^{N}")
    best_k = None
    best_val = -1
    for k in range(1, N + 1):
        if math.comb(N, k - 1) + math.comb(N, k) <= M:
            val = (N - k + 1) * k
            if val > best_val:
                best_val, best_k = val, k
    assert best_k is not None  # k = 1 needs 1 + N <= M, granted by M > N
    return best_k, math.sqrt(best_val)


@dataclass(frozen=True)
class GammaHatResult:
    value: Fraction
    exact: bool
    witness: tuple[BitString, ...]

    def __float__(self) -> float:
        return float(self.value)


def gamma_hat(
    concept_class: ConceptClass,
    *,
    subset_samples: int | None = None,
    rng=None,
) -> GammaHatResult:
    """Worst-case best-single-query elimination fraction of a class.

    Over every subset S of at least two members (exhaustive up to 20
    members, sampled beyond -- pass ``subset_samples``), the adversary
    answers each queried bit so as to keep as many candidates as possible;
    the learner picks the bit whose worse answer still eliminates the
    largest fraction.  gamma_hat is the minimum over S of that guaranteed
    fraction, returned as an exact rational.  Sampling only ever
    overestimates (the true value is a minimum).
    """
    m = concept_class.size
    if m < 2:
        raise ValueError("need at least two members")
    n = concept_class.n
    values = concept_class.values
    # per bit: which member indices have that bit set, as an index bitmask
    columns = []
    for j in range(n):
        mask = 0
        for i, v in enumerate(values):
            if (v >> (n - 1 - j)) & 1:
                mask |= 1 << i
        columns.append(mask)

    if subset_samples is None:
        if m > 20:
            raise ValueError("exact mode caps at 20 members; pass subset_samples")
        subsets: Iterable[int] = (
            t for t in range(1, 1 << m) if t.bit_count() >= 2
        )
    else:
        gen = np.random.default_rng(rng)
        full = (1 << m) - 1
        sampled = {full}
        sampled.update(
            (1 << i) | (1 << k) for i in range(m) for k in range(i + 1, m)
        )
        for _ in range(subset_samples):
            t = int(gen.integers(1, full + 1))
            if t.bit_count() >= 2:
                sampled.add(t)
        subsets = sampled

    best_num, best_den = 1, 1  # running minimum fraction, starts at 1
    witness = 0
    for t in subsets:
        size = t.bit_count()
        top = 0
        for col in columns:
            ones = (t & col).bit_count()
            score = min(ones, size - ones)
            if score > top:
                top = score
        # min over subsets of top/size
        if top * best_den < best_num * size:
            best_num, best_den, witness = top, size, t
    members = tuple(
        concept_class.members[i] for i in range(m) if (witness >> i) & 1
    )
    return GammaHatResult(
        value=Fraction(best_num, best_den),
        exact=subset_samples is None,
        witness=members,
    )


@dataclass(frozen=True)
class LearningBound:
    query_bound: float  # sqrt((1/g) / log2(1/g)) * log2(M)
    trace_sum_bound: float  # log2(M) / g, bounding sum_i p_i on any run


def learning_bound(M: int, gamma) -> LearningBound:
    """Query bound implied by the elimination parameter, unit constant."""
    g = float(gamma)
    if not 0.0 < g < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if M < 2:
        raise ValueError("need at least two members")
    inv = 1.0 / g
    logm = math.log2(M)
    return LearningBound(
        query_bound=math.sqrt(inv / math.log2(inv)) * logm,
        trace_sum_bound=logm / g,
    )


@dataclass(frozen=True)
class Baselines:
    classical: int  # min(M, N)
    quantum: float  # sqrt(M)


def baseline_formulas(M: int, N: int) -> Baselines:
    if M < 1 or N < 1:
        raise ValueError("M and N must be positive")
    return Baselines(classical=min(M, N), quantum=math.sqrt(M))


CSV_HEADER = "M,N,brute_force_C,closed_form_C,lp_primal,lp_dual,k_lower,lower_value"


@dataclass(frozen=True)
class BoundReport:
    M: int
    N: int
    brute_force_C: float
    closed_form_C: float
    lp_primal: float
    lp_dual: float
    k_lower: int | None
    lower_value: float | None

    def to_csv_row(self) -> str:
        tail = (
            f"{self.k_lower},{self.lower_value!r}"
            if self.k_lower is not None
            else ","
        )
        return (
            f"{self.M},{self.N},{self.brute_force_C!r},{self.closed_form_C!r},"
            f"{self.lp_primal!r},{self.lp_dual!r},{tail}"
        )


def build_report(M: int, N: int) -> BoundReport:
    """One row of the bound sweep for a given (M, N)."""
    brute, _ = brute_force_cost(M, N)
    closed = closed_form_cost(M, N)  # also validates 2 <= M <= 2^N
    m = max(1, math.ceil(math.log2(M)))
    cert = check_dual_certificate(N, m)
    primal = lp_primal_opt(N, m)
    if M > N:
        k, value = lower_bound_k(N, M)
    else:
        k, value = None, None
    return BoundReport(
        M=M,
        N=N,
        brute_force_C=brute,
        closed_form_C=closed,
        lp_primal=primal,
        lp_dual=cert.dual_value,
        k_lower=k,
        lower_value=value,
    )
