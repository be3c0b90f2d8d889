"""Feasible solutions of the query-complexity vector program and their
compositions.

A solution assigns two vector families ``u[x, j]``, ``v[x, j]`` (one pair
per input ``x`` and bit position ``j``) to a target matrix ``A`` indexed by
the inputs.  Feasibility means

    sum over j with x_j != y_j of  <u[x, j], v[y, j]>  ==  A[x, y]

for every input pair, and the per-input cost is

    c(x) = max( sum_j ||u[x, j]||^2,  sum_j ||v[x, j]||^2 ).

For a function ``f`` with Gram matrix ``F`` (``F[x,y] = 1`` iff outputs are
equal), a feasible solution for ``J - F`` certifies a query procedure whose
per-input cost is ``c``; ``max_x c(x)`` bounds the worst case.  Everything
here is real-valued: all the explicit constructions use nonnegative
coordinates, and ambient dimensions are tracked by explicit disjoint-block
bookkeeping (direct sums concatenate blocks, output conditioning allocates
one block per output label, tensoring multiplies coordinate grids).

Three composition operators preserve feasibility:

* ``sum_compose``: solutions for A and B give one for A + B with cost at
  most ``c_A + c_B`` pointwise (block concatenation).
* ``output_conditioned_compose``: per-output-label solutions for the
  restricted targets ``J - G_e`` give one for ``F - F*G`` (elementwise
  product) with cost exactly ``c_{f(x)}(x)`` -- labels make cross-label
  inner products vanish.
* ``tensor_compose``: an outer solution whose input bits are realized by
  inner function instances gives one for the composed function, with cost
  at most the product of outer and worst inner cost.

``oracle_id_pipeline`` chains these to build, from the exact pruning tree
of the final identification algorithm, a feasible solution for full
identification (target ``J - I``) whose cost tracks the per-input trace
cost ``sum_i sqrt(p_i) + sqrt(width)`` without any error-reduction factor
for composing bounded-error stages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .bitstrings import BitString, ConceptClass, FunctionTable, GramMatrix, gram_of_function
from .ordering import _greedy, first_disagreement_rank

__all__ = [
    "SdpSolution",
    "CostFunction",
    "verify_feasible",
    "cost_of",
    "find_first_one_solution",
    "first_disagreement_table",
    "sum_compose",
    "output_conditioned_compose",
    "tensor_compose",
    "boolean_or_solution",
    "boolean_and_solution",
    "OracleIdPipeline",
    "oracle_id_pipeline",
    "oracle_id_solution",
]


@dataclass(frozen=True)
class SdpSolution:
    """Vector families ``u``, ``v`` of shape (inputs, bits, dimension)."""

    domain: tuple[BitString, ...]
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        m = len(self.domain)
        if m == 0:
            raise ValueError("empty domain")
        n = self.domain[0].n
        if any(x.n != n for x in self.domain):
            raise ValueError("domain strings must have uniform length")
        for name, arr in (("u", self.u), ("v", self.v)):
            if arr.ndim != 3 or arr.shape[0] != m or arr.shape[1] != n:
                raise ValueError(f"{name} must have shape ({m}, {n}, dim)")
        if self.u.shape[2] != self.v.shape[2]:
            raise ValueError("u and v must share the ambient dimension")
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(self.domain)})

    @property
    def size(self) -> int:
        return len(self.domain)

    @property
    def n_bits(self) -> int:
        return self.u.shape[1]

    @property
    def dim(self) -> int:
        return self.u.shape[2]

    def index(self, x: BitString) -> int:
        return self._index[x]


@dataclass(frozen=True)
class CostFunction:
    """Per-input cost ``c(x)`` of the solution it annotates."""

    domain: tuple[BitString, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(self.domain)})

    def __call__(self, x: BitString) -> float:
        return float(self.values[self._index[x]])

    @property
    def max_value(self) -> float:
        return float(self.values.max())


def _target_entries(A) -> np.ndarray:
    if isinstance(A, GramMatrix):
        return np.asarray(A.entries, dtype=float)
    return np.asarray(A, dtype=float)


def _domain_bits(domain: Sequence[BitString]) -> np.ndarray:
    n = domain[0].n
    return np.array([[x.bit(j) for j in range(n)] for x in domain], dtype=np.uint8)


def verify_feasible(
    A,
    sol: SdpSolution,
    *,
    pairs: np.ndarray | None = None,
    row_chunk: int = 1024,
) -> float:
    """Worst absolute violation of the bilinear constraints against ``A``.

    Checks every input pair by default (chunked so memory stays flat); pass
    an array of ``(i, j)`` index pairs to spot-check a sample instead.
    A return value at most the caller's tolerance certifies feasibility.
    """
    target = _target_entries(A)
    m = sol.size
    if target.shape != (m, m):
        raise ValueError(f"target must be {m}x{m}, got {target.shape}")
    bits = _domain_bits(sol.domain)
    n = sol.n_bits

    if pairs is not None:
        pairs = np.asarray(pairs, dtype=int)
        left, right = pairs[:, 0], pairs[:, 1]
        mask = bits[left] != bits[right]
        inner = np.einsum("pjd,pjd->pj", sol.u[left], sol.v[right])
        vals = (mask * inner).sum(axis=1)
        return float(np.abs(vals - target[left, right]).max())

    worst = 0.0
    for lo in range(0, m, row_chunk):
        hi = min(lo + row_chunk, m)
        got = np.zeros((hi - lo, m))
        for j in range(n):
            mask = bits[lo:hi, j][:, None] != bits[:, j][None, :]
            got += mask * (sol.u[lo:hi, j, :] @ sol.v[:, j, :].T)
        worst = max(worst, float(np.abs(got - target[lo:hi]).max()))
    return worst


def cost_of(sol: SdpSolution) -> CostFunction:
    cu = np.einsum("xjd,xjd->x", sol.u, sol.u)
    cv = np.einsum("xjd,xjd->x", sol.v, sol.v)
    return CostFunction(sol.domain, np.maximum(cu, cv))


def _full_cube(n: int) -> tuple[BitString, ...]:
    if n > 16:
        raise ValueError("refusing to materialize a cube beyond 2^16 inputs")
    return tuple(BitString(n, v) for v in range(1 << n))


def find_first_one_solution(
    n: int,
    sigma: Sequence[int] | None = None,
    s: BitString | None = None,
    *,
    domain: Sequence[BitString] | None = None,
    width: int | None = None,
) -> SdpSolution:
    """Feasible solution for finding the first scan-order disagreement.

    The underlying function maps ``x`` to the first rank ``t`` (1-based,
    scanning ``sigma`` up to ``width``) where ``x`` differs from ``s``, all
    inputs agreeing throughout getting one shared label.  Writing ``f`` for
    that rank, the vectors are scalars placed along the scan order:

        coordinate at sigma[t-1] = t**(-1/4)   for t < f   (ramp)
        coordinate at sigma[f-1] = f**(+1/4)   at the hit
        zero afterwards;

    agreeing inputs carry the full ramp.  Ramp times hit weight is 1 at the
    first place two inputs with different labels can disagree, which makes
    the solution feasible for ``J - F``; the cost is

        c(x) = sum_{t<f} 1/sqrt(t) + sqrt(f)  <=  3 sqrt(f).
    """
    sigma = tuple(sigma) if sigma is not None else tuple(range(n))
    if sorted(sigma) != list(range(n)):
        raise ValueError("sigma must be a permutation of the bit positions")
    s = s if s is not None else BitString.zeros(n)
    if s.n != n:
        raise ValueError("reference string length mismatch")
    width = n if width is None else width
    if not 0 <= width <= n:
        raise ValueError(f"width must lie in [0, {n}]")
    members = tuple(domain) if domain is not None else _full_cube(n)

    u = np.zeros((len(members), n, 1))
    for idx, x in enumerate(members):
        f = first_disagreement_rank(x, s, sigma, width)
        stop = width + 1 if f is None else f
        for t in range(1, stop):
            u[idx, sigma[t - 1], 0] = t**-0.25
        if f is not None:
            u[idx, sigma[f - 1], 0] = f**0.25
    return SdpSolution(members, u, u)


def first_disagreement_table(
    domain: ConceptClass,
    sigma: Sequence[int],
    s: BitString,
    width: int,
) -> FunctionTable:
    """Rank of the first scan-order disagreement per member (0 when none)."""
    outputs = tuple(
        first_disagreement_rank(x, s, sigma, width) or 0 for x in domain.members
    )
    return FunctionTable(domain, outputs)


def sum_compose(a: SdpSolution, b: SdpSolution) -> SdpSolution:
    """Direct sum: feasible for ``A + B`` with cost at most ``c_A + c_B``."""
    if a.domain != b.domain:
        raise ValueError("solutions must share a domain")
    u = np.concatenate([a.u, b.u], axis=2)
    v = np.concatenate([a.v, b.v], axis=2)
    return SdpSolution(a.domain, u, v)


def output_conditioned_compose(
    f: FunctionTable, blocks: Mapping[Hashable, SdpSolution]
) -> SdpSolution:
    """Stitch per-output solutions into one for ``F - F*G``.

    ``blocks[e]`` must be a solution on exactly the inputs with
    ``f(x) == e`` (for the target ``J - G_e``).  Each block is placed in
    its own coordinate range, so inputs with different labels have
    orthogonal vectors and their constraint sums vanish -- exactly where
    ``F`` is zero.  The composite cost at ``x`` equals the cost its own
    block assigned to it.
    """
    members = f.domain.members
    labels = f.labels
    offsets: dict[Hashable, int] = {}
    dim = 0
    for e in labels:
        if e not in blocks:
            raise ValueError(f"missing block for output label {e!r}")
        block = blocks[e]
        if block.domain != f.preimage(e):
            raise ValueError(f"block for {e!r} is not defined on exactly f^-1({e!r})")
        offsets[e] = dim
        dim += block.dim

    n = f.domain.n
    u = np.zeros((len(members), n, dim))
    v = np.zeros((len(members), n, dim))
    for gi, x in enumerate(members):
        e = f.outputs[gi]
        block = blocks[e]
        bi = block.index(x)
        lo = offsets[e]
        u[gi, :, lo : lo + block.dim] = block.u[bi]
        v[gi, :, lo : lo + block.dim] = block.v[bi]
    return SdpSolution(members, u, v)


def tensor_compose(
    outer: SdpSolution,
    inner: Sequence[tuple[SdpSolution, FunctionTable]],
    *,
    domain: Sequence[tuple[BitString, ...]] | None = None,
) -> SdpSolution:
    """Compose an outer solution with inner instances feeding its bits.

    ``inner[i]`` supplies the solution and 0/1-valued function table of the
    instance realizing the outer's ``i``-th input bit.  Composite inputs
    are concatenations of one member per instance; coordinates are tensor
    products ``u_outer[z, i] (x) u_inner[x_i, j]`` with ``z`` the string of
    inner outputs, giving per-pair constraint sums

        sum_i <u_f[z,i], v_f[z',i]> * (J - G_i)[x_i, y_i]  =  (J - F)[z, z'],

    i.e. feasibility for the composed function, and cost at most
    ``c_outer(z) * max_i c_i(x_i)``.
    """
    m = outer.n_bits
    if len(inner) != m:
        raise ValueError(f"need exactly {m} inner instances")
    for sol_i, table_i in inner:
        if set(table_i.outputs) - {0, 1}:
            raise ValueError("inner outputs must be bits")
        if sol_i.domain != table_i.domain.members:
            raise ValueError("inner solution and table must share a domain")

    if domain is None:
        combos: list[tuple[BitString, ...]] = [()]
        for sol_i, _ in inner:
            combos = [c + (x,) for c in combos for x in sol_i.domain]
            if len(combos) > 4096:
                raise ValueError("composite domain too large; pass one explicitly")
    else:
        combos = [tuple(c) for c in domain]

    widths = [sol_i.n_bits for sol_i, _ in inner]
    n_total = sum(widths)
    d_in = max(sol_i.dim for sol_i, _ in inner)
    dim = outer.dim * d_in

    members = []
    u = np.zeros((len(combos), n_total, dim))
    v = np.zeros((len(combos), n_total, dim))
    for row, combo in enumerate(combos):
        bits: list[int] = []
        for (sol_i, table_i), part in zip(inner, combo):
            bits.append(table_i(part))
        z = BitString.from_bits(bits)
        zi = outer.index(z)
        value = 0
        offset = 0
        for i, ((sol_i, _), part) in enumerate(zip(inner, combo)):
            value = (value << part.n) | part.value
            pi = sol_i.index(part)
            for j in range(sol_i.n_bits):
                grid_u = np.outer(outer.u[zi, i], sol_i.u[pi, j])
                grid_v = np.outer(outer.v[zi, i], sol_i.v[pi, j])
                u[row, offset + j, :] = _pad_grid(grid_u, d_in)
                v[row, offset + j, :] = _pad_grid(grid_v, d_in)
            offset += sol_i.n_bits
        members.append(BitString(n_total, value))
    return SdpSolution(tuple(members), u, v)


def _pad_grid(grid: np.ndarray, d_in: int) -> np.ndarray:
    """Flatten an (outer, inner) coordinate grid, inner side zero-padded to
    the common width so every instance strides identically."""
    if grid.shape[1] == d_in:
        return grid.reshape(-1)
    padded = np.zeros((grid.shape[0], d_in))
    padded[:, : grid.shape[1]] = grid
    return padded.reshape(-1)


def boolean_or_solution(m: int) -> tuple[SdpSolution, FunctionTable]:
    """Standard solution for m-bit OR: ramp on the zero string, one spike
    at the first 1 of everything else; cost sqrt(m) everywhere."""
    cube = ConceptClass.from_values(m, range(1 << m))
    u = np.zeros((cube.size, m, 1))
    low, high = m**-0.25, m**0.25
    outputs = []
    for idx, x in enumerate(cube.members):
        if x.value == 0:
            u[idx, :, 0] = low
            outputs.append(0)
        else:
            first = next(j for j in range(m) if x.bit(j))
            u[idx, first, 0] = high
            outputs.append(1)
    return SdpSolution(cube.members, u, u), FunctionTable(cube, tuple(outputs))


def boolean_and_solution(m: int) -> tuple[SdpSolution, FunctionTable]:
    """Same construction as OR with the roles of 0 and 1 swapped."""
    cube = ConceptClass.from_values(m, range(1 << m))
    u = np.zeros((cube.size, m, 1))
    low, high = m**-0.25, m**0.25
    all_ones = (1 << m) - 1
    outputs = []
    for idx, x in enumerate(cube.members):
        if x.value == all_ones:
            u[idx, :, 0] = low
            outputs.append(1)
        else:
            first = next(j for j in range(m) if not x.bit(j))
            u[idx, first, 0] = high
            outputs.append(0)
    return SdpSolution(cube.members, u, u), FunctionTable(cube, tuple(outputs))


@dataclass(frozen=True)
class OracleIdPipeline:
    """Staged feasible solution for identifying a member of a class.

    Stage ``k`` refines the knowledge from stages before it: its target is
    ``gram(f_{k-1}) - gram(f_k)`` where ``f_k`` maps each member to its
    first ``k`` disagreement ranks (0-padded once identification finished).
    The chained solution is feasible for ``J - I`` since the full rank
    sequence pins the member down.
    """

    concept_class: ConceptClass
    stage_tables: tuple[FunctionTable, ...]  # f_0 (constant) .. f_r
    stage_solutions: tuple[SdpSolution, ...]
    stage_targets: tuple[np.ndarray, ...]
    solution: SdpSolution
    cost: CostFunction


def oracle_id_pipeline(concept_class: ConceptClass) -> OracleIdPipeline:
    n = concept_class.n
    members = concept_class.members
    m = concept_class.size

    paths: dict[int, tuple] = {x.value: () for x in members}
    level: dict[tuple, list[int]] = {(): list(concept_class.values)}
    tables = [FunctionTable(concept_class, tuple(() for _ in members))]
    stage_solutions: list[SdpSolution] = []
    stage_targets: list[np.ndarray] = []
    prev_gram = gram_of_function(tables[0]).entries

    while any(len(vals) > 1 for vals in level.values()):
        blocks: dict[tuple, SdpSolution] = {}
        next_level: dict[tuple, list[int]] = {}
        for path, vals in level.items():
            block_members = tuple(BitString(n, v) for v in vals)
            if len(vals) == 1:
                blocks[path] = SdpSolution(
                    block_members, np.zeros((1, n, 1)), np.zeros((1, n, 1))
                )
                ranks = {vals[0]: 0}
            else:
                sigma, s_value, _, width = _greedy(n, tuple(vals))
                s = BitString(n, s_value)
                blocks[path] = find_first_one_solution(
                    n, sigma, s, domain=block_members, width=width
                )
                ranks = {
                    v: (first_disagreement_rank(BitString(n, v), s, sigma, width) or 0)
                    for v in vals
                }
            for v in vals:
                new_path = path + (ranks[v],)
                paths[v] = new_path
                next_level.setdefault(new_path, []).append(v)

        f_prev = tables[-1]
        stage_solutions.append(output_conditioned_compose(f_prev, blocks))
        f_next = FunctionTable(
            concept_class, tuple(paths[x.value] for x in members)
        )
        tables.append(f_next)
        next_gram = gram_of_function(f_next).entries
        stage_targets.append(prev_gram - next_gram)
        prev_gram = next_gram
        level = next_level

    if stage_solutions:
        combined = stage_solutions[0]
        for sol in stage_solutions[1:]:
            combined = sum_compose(combined, sol)
    else:  # singleton class: nothing to learn
        combined = SdpSolution(members, np.zeros((m, n, 1)), np.zeros((m, n, 1)))

    return OracleIdPipeline(
        concept_class=concept_class,
        stage_tables=tuple(tables),
        stage_solutions=tuple(stage_solutions),
        stage_targets=tuple(stage_targets),
        solution=combined,
        cost=cost_of(combined),
    )


def oracle_id_solution(concept_class: ConceptClass) -> tuple[SdpSolution, CostFunction]:
    """Feasible solution for ``J - I`` over the class, with its cost."""
    pipe = oracle_id_pipeline(concept_class)
    return pipe.solution, pipe.cost
