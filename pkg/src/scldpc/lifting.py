"""Graph lifting: replace each base-matrix one by an M x M permutation block.

A base one at (r, c) with permutation pi expands to ones (r*M + i, c*M + pi[i]);
a circulant shift s is the permutation pi[i] = (i + s) mod M.  Lifting a
4-cycle-free band keeps girth >= 6 for every permutation assignment, which is
what makes these protographs usable directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .matrices import ROLE_INFO, ROLE_PARITY, BandMatrix, build_band

SCHEMES = (
    "random",
    "circulant",
    "time_invariant_random",
    "time_invariant_circulant",
    "identity",
)

__all__ = [
    "SCHEMES",
    "LiftedCode",
    "lift",
    "expand",
    "search_girth6_lifting",
    "EdgeSpreadProto",
    "classical_edge_spread",
]


@dataclass(frozen=True)
class EdgeSpreadProto:
    """Classical edge-spreading of the block protograph with column weight J:
    the variable nodes of time t connect to checks t..t+J-1, giving a
    (J, nJ)-regular convolutional protograph with memory J-1 and single edges.
    """

    n: int
    J: int

    def __post_init__(self):
        if self.n < 2 or self.J < 1:
            raise ValueError("need n >= 2 and J >= 1")

    @property
    def memory(self) -> int:
        return self.J - 1

    @property
    def label(self) -> str:
        return f"edge-spread-n{self.n}-j{self.J}"

    def build(self, time_units: int) -> BandMatrix:
        exps = [tuple(range(self.J))] * self.n
        roles = [ROLE_INFO] * (self.n - 1) + [ROLE_PARITY]
        return build_band(exps, roles, time_units)


def classical_edge_spread(n: int, J: int) -> EdgeSpreadProto:
    return EdgeSpreadProto(n=n, J=J)


def _perm_of(value, M: int) -> np.ndarray:
    """Assignment value -> explicit permutation array."""
    if isinstance(value, (int, np.integer)):
        return (np.arange(M) + int(value)) % M
    return np.asarray(value, dtype=np.int64)


@dataclass(frozen=True)
class LiftedCode:
    """A base band matrix plus one permutation per base one.

    ``assignment`` maps (row, col) -> permutation array, or an int circulant
    shift.  ``expanded`` materializes the lifted BandMatrix.
    """

    base: BandMatrix
    M: int
    scheme: str
    seed: int
    assignment: dict

    def expanded(self) -> BandMatrix:
        return expand(self.base, self.M, self.assignment)

    def descriptor(self) -> dict:
        items = []
        for (r, c) in sorted(self.assignment):
            v = self.assignment[(r, c)]
            if isinstance(v, (int, np.integer)):
                items.append([int(r), int(c), int(v)])
            else:
                items.append([int(r), int(c), [int(x) for x in v]])
        return {
            "M": self.M,
            "scheme": self.scheme,
            "seed": self.seed,
            "assignment": items,
        }

    def to_json(self) -> str:
        return json.dumps(self.descriptor())

    @classmethod
    def from_descriptor(cls, base: BandMatrix, d: dict) -> "LiftedCode":
        assignment = {}
        for r, c, v in d["assignment"]:
            assignment[(int(r), int(c))] = (
                int(v) if isinstance(v, int) else np.asarray(v, dtype=np.int64)
            )
        return cls(base=base, M=int(d["M"]), scheme=d.get("scheme", "random"),
                   seed=int(d.get("seed", 0)), assignment=assignment)


def lift(base: BandMatrix, M: int, scheme: str = "random", seed: int = 0) -> LiftedCode:
    """Draw a permutation assignment for every base one.

    Random draws consume the generator in sorted (row, col) order, so a given
    (base, M, scheme, seed) always produces the same lifting.  Time-invariant
    schemes reuse one draw per (in-block column, exponent) template position
    across all time units.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng(seed)
    ones = [tuple(int(x) for x in rc) for rc in base.ones]
    ones.sort()
    assignment: dict = {}

    def draw():
        if scheme.endswith("circulant"):
            return int(rng.integers(0, M))
        return rng.permutation(M).astype(np.int64)

    if scheme == "identity":
        for rc in ones:
            assignment[rc] = 0
    elif scheme.startswith("time_invariant"):
        w = base.cols_per_time
        keys = sorted({(c % w, r - c // w) for r, c in ones})
        per_key = {k: draw() for k in keys}
        for r, c in ones:
            assignment[(r, c)] = per_key[(c % w, r - c // w)]
    else:
        for rc in ones:
            assignment[rc] = draw()
    return LiftedCode(base=base, M=M, scheme=scheme, seed=seed, assignment=assignment)


def expand(base: BandMatrix, M: int, assignment: dict) -> BandMatrix:
    """Substitute the permutation blocks into the base matrix."""
    E = len(base.ones)
    rows = np.empty(E * M, dtype=np.int64)
    cols = np.empty(E * M, dtype=np.int64)
    lanes = np.arange(M, dtype=np.int64)
    for k, (r, c) in enumerate(base.ones):
        pi = _perm_of(assignment[(int(r), int(c))], M)
        rows[k * M : (k + 1) * M] = r * M + lanes
        cols[k * M : (k + 1) * M] = c * M + pi
    roles = np.repeat(base.col_roles, M)
    return BandMatrix(
        rows=base.rows * M,
        cols=base.cols * M,
        ones=np.column_stack([rows, cols]),
        cols_per_time=base.cols_per_time * M,
        time_units=base.time_units,
        memory=base.memory,
        col_roles=roles,
        rows_per_time=base.rows_per_time * M,
    )


def search_girth6_lifting(
    base: BandMatrix, M: int, scheme: str = "random", seed: int = 0,
    max_tries: int = 64,
) -> LiftedCode | None:
    """Retry seeds until the expanded graph has girth >= 6; None if no try
    succeeds (e.g. M=1 over a base that already has 4-cycles)."""
    from .graphs import girth

    for k in range(max_tries):
        cand = lift(base, M, scheme=scheme, seed=seed + k)
        g = girth(cand.expanded())
        if g.girth is None or g.girth >= 6:
            return cand
    return None
