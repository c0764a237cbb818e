"""Structural analysis of Tanner graphs: girth and bounded minimum distance.

Both searches exploit the band structure only through windowing — they accept
any BandMatrix.  Windowed results are sound lower-bound checks (removing
columns cannot create cycles or null combinations); enlarging the window
beyond 4(m+1) time units does not change the girth of a band matrix.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .matrices import BandMatrix

__all__ = ["GirthResult", "girth", "DistanceResult", "min_distance_bounded"]


@dataclass
class GirthResult:
    girth: int | None  # None = no cycle found within the window
    # alternating ("v", col) / ("c", row) vertices tracing one shortest cycle
    witness: list[tuple[str, int]] = field(default_factory=list)
    window_time_units: int | None = None


def _window_adjacency(matrix: BandMatrix, window_time_units):
    """Adjacency lists over vars [0..V) and checks [V..V+C) within the window."""
    ones = matrix.ones
    if window_time_units is not None and window_time_units * matrix.cols_per_time < matrix.cols:
        max_col = window_time_units * matrix.cols_per_time
        ones = ones[ones[:, 1] < max_col]
    else:
        max_col = matrix.cols
    used_rows = np.unique(ones[:, 0])
    row_id = {int(r): i for i, r in enumerate(used_rows)}
    V = max_col
    adj: list[list[int]] = [[] for _ in range(V + len(used_rows))]
    for r, c in ones:
        ci = V + row_id[int(r)]
        adj[int(c)].append(ci)
        adj[ci].append(int(c))
    return adj, V, used_rows


def girth(matrix: BandMatrix, window_time_units: int | None = None) -> GirthResult:
    """Shortest cycle length via BFS from every variable node.

    Defaults to a window of min(4(m+1), all) time units.  When a window is
    given explicitly it must cover at least 2(m+1) time units so that every
    4-cycle of a band matrix falls inside it.
    """
    if window_time_units is None:
        if matrix.memory > 0:
            window_time_units = min(4 * (matrix.memory + 1), matrix.time_units)
    elif matrix.memory > 0 and window_time_units < 2 * (matrix.memory + 1):
        raise ValueError(
            f"window of {window_time_units} time units cannot certify girth; "
            f"need at least {2 * (matrix.memory + 1)}"
        )
    adj, V, used_rows = _window_adjacency(matrix, window_time_units)
    n_nodes = len(adj)
    best = None
    best_closure = None  # (start, u, w)
    dist = np.empty(n_nodes, dtype=np.int32)
    parent = np.empty(n_nodes, dtype=np.int64)

    def bfs(start, limit, record):
        """Return shortest cycle through start found under the depth limit."""
        dist.fill(-1)
        parent.fill(-1)
        dist[start] = 0
        q = deque([start])
        found = None
        closure = None
        while q:
            u = q.popleft()
            du = dist[u]
            if limit is not None and 2 * du + 1 >= limit:
                continue
            for w in adj[u]:
                if w == parent[u]:
                    continue
                if dist[w] < 0:
                    dist[w] = du + 1
                    parent[w] = u
                    q.append(w)
                else:
                    cyc = du + dist[w] + 1
                    if found is None or cyc < found:
                        found = int(cyc)
                        closure = (u, w)
        if record and found is not None:
            return found, closure
        return found, closure

    for s in range(V):
        if not adj[s]:
            continue
        got, closure = bfs(s, best, False)
        if got is not None and (best is None or got < best):
            best = got
            best_closure = (s, *closure)
    if best is None:
        return GirthResult(girth=None, witness=[], window_time_units=window_time_units)

    # rebuild the witness from the recorded start
    s, _, _ = best_closure
    dist.fill(-1)
    parent.fill(-1)
    dist[s] = 0
    q = deque([s])
    closure = None
    while q and closure is None:
        u = q.popleft()
        for w in adj[u]:
            if w == parent[u]:
                continue
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                parent[w] = u
                q.append(w)
            elif dist[u] + dist[w] + 1 == best:
                closure = (u, w)
                break

    def path_to_root(x):
        out = [x]
        while parent[out[-1]] >= 0:
            out.append(int(parent[out[-1]]))
        return out

    u, w = closure
    pu, pw = path_to_root(u), path_to_root(w)
    cycle = pu[::-1] + pw[:-1]  # s..u, closure edge, then w back down to s
    if len(cycle) != best or len(set(cycle)) != len(cycle):
        raise RuntimeError("girth witness reconstruction failed")
    witness = []
    for node in cycle:
        if node < V:
            witness.append(("v", int(node)))
        else:
            witness.append(("c", int(used_rows[node - V])))
    return GirthResult(girth=best, witness=witness, window_time_units=window_time_units)


@dataclass
class DistanceResult:
    min_weight_found: int | None  # None = nothing at or under the bound
    witness_columns: list[int] = field(default_factory=list)
    exhaustive_up_to: int = 0
    span_time_units: int = 0


def min_distance_bounded(
    matrix: BandMatrix,
    w_max: int,
    span_time_units: int | None = None,
    node_budget: int = 5_000_000,
) -> DistanceResult:
    """Lightest column combination summing to zero, searched exhaustively up
    to weight w_max among supports that start in time unit 0.

    The matrix must carry all band coefficients (the builders' trailing rows),
    so every windowed null combination is a genuine codeword segment.  Raises
    RuntimeError when the node budget is exhausted rather than silently
    truncating the search.
    """
    if w_max < 1:
        raise ValueError("w_max must be >= 1")
    if span_time_units is None:
        span_time_units = min(2 * (matrix.memory + 1), matrix.time_units)
    max_col = min(span_time_units * matrix.cols_per_time, matrix.cols)

    # column -> row bitmask, restricted to the span
    col_masks = []
    ones = matrix.ones[matrix.ones[:, 1] < max_col]
    per_col: dict[int, int] = {c: 0 for c in range(max_col)}
    for r, c in ones:
        per_col[int(c)] |= 1 << int(r)
    col_masks = [per_col[c] for c in range(max_col)]
    row_adj: dict[int, list[int]] = {}
    for r, c in ones:
        row_adj.setdefault(int(r), []).append(int(c))
    max_col_weight = max((m.bit_count() for m in col_masks), default=0)

    block0 = list(range(min(matrix.cols_per_time, max_col)))
    for c in block0:
        if col_masks[c] == 0:
            return DistanceResult(
                min_weight_found=1, witness_columns=[c],
                exhaustive_up_to=w_max, span_time_units=span_time_units,
            )

    best: list[int] | None = None
    best_w = w_max + 1
    nodes = 0

    def dfs(chosen: list[int], synd: int, banned: set[int]):
        nonlocal best, best_w, nodes
        nodes += 1
        if nodes > node_budget:
            raise RuntimeError(
                f"distance search exceeded {node_budget} nodes; "
                "reduce w_max or the span"
            )
        if synd == 0:
            if len(chosen) < best_w:
                best_w = len(chosen)
                best = list(chosen)
            return
        depth_left = best_w - 1 - len(chosen)
        if depth_left <= 0:
            return
        if max_col_weight and (synd.bit_count() + max_col_weight - 1) // max_col_weight > depth_left:
            return
        r = (synd & -synd).bit_length() - 1  # lowest unsatisfied check
        local_ban = set(banned)
        for c in row_adj.get(r, ()):
            if c in chosen or c in local_ban:
                continue
            chosen.append(c)
            dfs(chosen, synd ^ col_masks[c], local_ban)
            chosen.pop()
            local_ban.add(c)
            if best_w <= len(chosen) + 1:
                return

    banned: set[int] = set()
    for c0 in block0:
        dfs([c0], col_masks[c0], banned)
        banned.add(c0)

    if best is None:
        return DistanceResult(
            min_weight_found=None, witness_columns=[],
            exhaustive_up_to=w_max, span_time_units=span_time_units,
        )
    combo = 0
    for c in best:
        combo ^= col_masks[c]
    if combo != 0:
        raise RuntimeError("distance witness failed re-verification")
    return DistanceResult(
        min_weight_found=best_w, witness_columns=sorted(best),
        exhaustive_up_to=w_max, span_time_units=span_time_units,
    )
