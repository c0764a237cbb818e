"""Rate-(n-1)/n self-orthogonal convolutional code specifications.

A code is given by n-1 sparse generator polynomials over GF(2), stored as
ascending exponent tuples.  Every polynomial has constant term 1 and Hamming
weight J, so each information bit participates in exactly J parity checks and
majority-logic decoding corrects floor(J/2) channel errors per constraint
length.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

__all__ = [
    "StructuralError",
    "GeneratorPolynomial",
    "CsocSpec",
    "CsocStub",
    "OrthogonalityReport",
    "validate_self_orthogonality",
    "search_csoc",
    "catalog",
    "catalog_stubs",
    "catalog_lookup",
]


class StructuralError(ValueError):
    """A polynomial set violates the structural rules (weight, constant term),
    as opposed to failing the orthogonality property."""


@dataclass(frozen=True)
class GeneratorPolynomial:
    """Sparse GF(2) polynomial, exponents ascending."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = self.exponents
        if len(exps) == 0:
            raise StructuralError("empty polynomial")
        if list(exps) != sorted(set(exps)):
            raise StructuralError(f"exponents must be strictly ascending: {exps}")
        if exps[0] != 0:
            raise StructuralError(f"constant term must be 1 (exponent 0 missing): {exps}")
        if exps[0] < 0:
            raise StructuralError(f"negative exponent: {exps}")

    @property
    def degree(self) -> int:
        return self.exponents[-1]

    @property
    def weight(self) -> int:
        return len(self.exponents)

    def differences(self) -> list[int]:
        """All positive pairwise differences of exponents (with multiplicity)."""
        return [b - a for a, b in combinations(self.exponents, 2)]


@dataclass(frozen=True)
class CsocSpec:
    """A rate (n-1)/n systematic self-orthogonal convolutional code.

    ``polys[i]`` is the generator polynomial g^(i+1) tying information stream
    i to the single parity stream; ``m`` is the maximum degree and ``J`` the
    common weight.
    """

    n: int
    m: int
    J: int
    polys: tuple[GeneratorPolynomial, ...]
    label: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise StructuralError(f"n must be >= 2, got {self.n}")
        if len(self.polys) != self.n - 1:
            raise StructuralError(
                f"need n-1={self.n - 1} polynomials, got {len(self.polys)}"
            )
        for g in self.polys:
            if g.weight != self.J:
                raise StructuralError(
                    f"polynomial {g.exponents} has weight {g.weight}, expected J={self.J}"
                )
        true_m = max(g.degree for g in self.polys)
        if true_m != self.m:
            raise StructuralError(f"m={self.m} but max degree is {true_m}")

    @classmethod
    def from_exponents(cls, exponent_sets, label: str = "") -> "CsocSpec":
        polys = tuple(GeneratorPolynomial(tuple(sorted(e))) for e in exponent_sets)
        n = len(polys) + 1
        m = max(g.degree for g in polys)
        return cls(n=n, m=m, J=polys[0].weight, polys=polys, label=label)

    @property
    def rate(self) -> float:
        return (self.n - 1) / self.n

    @property
    def constraint_length(self) -> int:
        """nu = n*(m+1), the span in code bits of one check's reach."""
        return self.n * (self.m + 1)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "J": self.J,
            "polys": [list(g.exponents) for g in self.polys],
            "label": self.label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "CsocSpec":
        try:
            polys = tuple(GeneratorPolynomial(tuple(p)) for p in d["polys"])
            spec = cls(n=d["n"], m=d["m"], J=d["J"], polys=polys, label=d.get("label", ""))
        except KeyError as exc:
            raise StructuralError(f"missing field {exc} in code spec") from exc
        return spec

    @classmethod
    def from_json(cls, s: str) -> "CsocSpec":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class CsocStub:
    """A code named only by its parameters; polynomials must be supplied by the
    user or found with :func:`search_csoc`."""

    n: int
    J: int
    label: str
    note: str = ""


@dataclass
class OrthogonalityReport:
    ok: bool
    # (poly index a, poly index b, repeated difference) with a <= b
    violations: list[tuple[int, int, int]] = field(default_factory=list)


def _difference_violations(spec: CsocSpec) -> list[tuple[int, int, int]]:
    """Duplicate positive exponent differences, within or across polynomials."""
    seen: dict[int, int] = {}
    bad: set[tuple[int, int, int]] = set()
    for idx, g in enumerate(spec.polys):
        for d in g.differences():
            if d in seen:
                a, b = sorted((seen[d], idx))
                bad.add((a, b, d))
            else:
                seen[d] = idx
    return sorted(bad)


def _has_four_cycle(matrix) -> bool:
    """Two check rows sharing two columns <=> a length-4 cycle in the Tanner graph."""
    sp = matrix.to_csr()
    gram = (sp @ sp.T).tocoo()
    mask = (gram.row != gram.col) & (gram.data >= 2)
    return bool(mask.any())


def validate_self_orthogonality(spec: CsocSpec) -> OrthogonalityReport:
    """Check that all J checks on each information bit are orthogonal.

    The difference analysis is a fast pre-filter; the decision of record is
    the absence of 4-cycles in the leading two constraint lengths of the
    systematic parity-check band, and the two must agree.
    """
    from . import matrices

    violations = _difference_violations(spec)
    h = matrices.build_systematic_H(spec, time_units=2 * (spec.m + 1))
    cyc = _has_four_cycle(h)
    if cyc != bool(violations):
        raise RuntimeError(
            "internal inconsistency: difference pre-filter and 4-cycle check disagree"
        )
    return OrthogonalityReport(ok=not violations, violations=violations)


def search_csoc(
    n: int,
    J: int,
    m_max: int,
    seed: int = 0,
    node_budget: int = 200_000,
    label: str = "",
) -> CsocSpec | None:
    """Find a self-orthogonal code by smallest-exponent-first backtracking.

    All positive exponent differences across the n-1 polynomials must be
    distinct.  Candidates are tried in ascending order with a small seeded
    jitter so near-equal choices are explored in different orders across
    seeds.  Returns None when the budget or the search space is exhausted.
    """
    if n < 2 or J < 1 or m_max < 0:
        raise ValueError("need n >= 2, J >= 1, m_max >= 0")
    rng = np.random.default_rng(seed)
    nodes = 0

    polys: list[list[int]] = [[0] for _ in range(n - 1)]
    used: set[int] = set()

    def candidates(poly: list[int]) -> list[int]:
        out = []
        for e in range(poly[-1] + 1, m_max + 1):
            diffs = [e - x for x in poly]
            if len(set(diffs)) == len(diffs) and not used.intersection(diffs):
                out.append(e)
        if len(out) > 1:
            jitter = rng.uniform(0.0, 2.0, size=len(out))
            out = [out[i] for i in np.argsort(np.arange(len(out)) + jitter, kind="stable")]
        return out

    def fill(idx: int) -> bool:
        nonlocal nodes
        if idx == n - 1:
            return True
        poly = polys[idx]
        if len(poly) == J:
            return fill(idx + 1)
        for e in candidates(poly):
            nodes += 1
            if nodes > node_budget:
                return False
            diffs = [e - x for x in poly]
            poly.append(e)
            used.update(diffs)
            if fill(idx):
                return True
            poly.pop()
            used.difference_update(diffs)
        return False

    if J == 1:
        found = True  # each polynomial is just {0}
    else:
        found = fill(0)
    if not found:
        return None
    m = max(p[-1] for p in polys)
    return CsocSpec.from_exponents(
        polys, label=label or f"search-n{n}-j{J}-m{m}-s{seed}"
    )


_CATALOG = (
    CsocSpec.from_exponents([(0, 8, 9, 12), (0, 6, 11, 13)], label="massey-r23-m13-j4"),
    CsocSpec.from_exponents(
        [(0, 6, 11, 13), (0, 8, 17, 18), (0, 3, 15, 19)], label="robinson-r34-m19-j4"
    ),
)

_STUBS = (
    CsocStub(n=15, J=3, label="stub-r1415-j3", note="rate 14/15; supply polynomials or search"),
    CsocStub(n=12, J=5, label="stub-r1112-j5", note="rate 11/12; supply polynomials or search"),
    CsocStub(n=4, J=3, label="stub-r34-j3", note="rate 3/4; supply polynomials or search"),
)


def catalog() -> tuple[CsocSpec, ...]:
    """Fully specified built-in codes (all pass validate_self_orthogonality)."""
    return _CATALOG


def catalog_stubs() -> tuple[CsocStub, ...]:
    """Parameter-only entries: known (n, J) combinations without pinned polynomials."""
    return _STUBS


def catalog_lookup(label: str) -> CsocSpec:
    for spec in _CATALOG:
        if spec.label == label:
            return spec
    raise KeyError(
        f"unknown catalog label {label!r}; available: {[s.label for s in _CATALOG]}"
    )
