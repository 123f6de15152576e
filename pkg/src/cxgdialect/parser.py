"""Construction matching against annotated samples.

Two distinct jobs share the matcher: featurization counts every match,
overlaps included (bag of constructions), while MDL encoding picks a
minimum-cost non-overlapping cover by beam search. A first-slot index
keeps matching cheap: at each position only constructions whose first
constraint fits one of the token's three layer values are tried.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .induction import Construction, Grammar, LEX, SYN


def _value(asample, kind: int, pos: int) -> int:
    if kind == LEX:
        return asample.word_ids[pos]
    if kind == SYN:
        return asample.pos_ids[pos]
    return asample.domain_ids[pos]


def match_at(construction: Construction, asample, i: int) -> bool:
    """True iff every slot constraint holds at token i + slot offset.

    OOV layers hold the value -1, which no constraint can equal, so LEX
    and SEM constraints never match OOV tokens.
    """
    n = len(asample)
    if i < 0 or i + len(construction.slots) > n:
        raise ValueError(
            f"position {i} out of bounds for construction of length "
            f"{len(construction.slots)} in sample of {n} tokens")
    for offset, (kind, value) in enumerate(construction.slots):
        if _value(asample, kind, i + offset) != value:
            return False
    return True


class Matcher:
    """First-slot index over a grammar for fast per-position matching."""

    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        self._by_first: dict[tuple[int, int], list[Construction]] = {}
        for construction in grammar.constructions:
            self._by_first.setdefault(construction.slots[0], []).append(construction)

    def matches_at(self, asample, i: int) -> list[Construction]:
        n = len(asample)
        found: list[Construction] = []
        for kind in (0, 1, 2):
            head = self._by_first.get((kind, _value(asample, kind, i)))
            if not head:
                continue
            for construction in head:
                length = len(construction.slots)
                if i + length > n:
                    continue
                ok = True
                for offset in range(1, length):
                    k, v = construction.slots[offset]
                    if _value(asample, k, i + offset) != v:
                        ok = False
                        break
                if ok:
                    found.append(construction)
        return found

    def matches_by_position(self, asample) -> list[list[Construction]]:
        return [self.matches_at(asample, i) for i in range(len(asample))]


@dataclass
class FeatureVector:
    """Per-construction match counts for one sample."""

    counts: np.ndarray
    sample_id: str
    city_id: str
    country: str
    month: str


def count(grammar: Grammar, asample, matcher: Matcher | None = None) -> FeatureVector:
    """Count all matches of every construction, overlaps included."""
    if matcher is None:
        matcher = Matcher(grammar)
    counts = np.zeros(len(grammar.constructions), dtype=np.int64)
    for i in range(len(asample)):
        for construction in matcher.matches_at(asample, i):
            counts[construction.cid] += 1
    s = asample.sample
    return FeatureVector(counts=counts, sample_id=s.sample_id,
                         city_id=s.city_id, country=s.country, month=s.month)


def count_many(grammar: Grammar, corpus) -> list[FeatureVector]:
    matcher = Matcher(grammar)
    return [count(grammar, asample, matcher) for asample in corpus]


@dataclass(frozen=True)
class Encoding:
    """Non-overlapping cover: construction spans plus residual positions."""

    spans: tuple[tuple[int, int], ...]  # (start, cid)
    residuals: tuple[int, ...]
    n_uses: int
    n_residuals: int
    cost: float


def _move_groups(lengths: list[int], kappa: float, rho: float) -> list[int]:
    """Jump lengths ordered by per-token cost, cheapest first.

    The residual move appears as jump 1; construction moves cost
    kappa / length per token. The first entry is the locally best move,
    deviating to any later entry spends one unit of beam budget.
    """
    moves = [(rho, -1, 1)]
    for length in lengths:
        moves.append((kappa / length, -length, length))
    moves.sort()
    return [m[2] for m in moves]


def cover_counts(lengths_by_pos, n: int, beam_width: int | None,
                 kappa: float, rho: float) -> tuple[int, int]:
    """Minimum-cost cover counts: (construction uses, residual tokens).

    ``lengths_by_pos[i]`` lists the span lengths of constructions matching
    at position i; a residual move always exists. ``beam_width=None``
    gives the exact optimal cover by forward dynamic programming. A
    finite width W truncates the search to paths that deviate from the
    locally cheapest move (lowest per-token cost, longest span first) at
    most W - 1 times, so widening strictly enlarges the candidate path
    set and the returned cost is monotonically non-increasing in W.

    Costs compare as uses * kappa + resid * rho computed fresh from the
    counts, so covers with equal counts tie exactly and ties prefer
    fewer residuals.
    """
    if n == 0:
        return 0, 0
    inf = math.inf
    if beam_width is None:
        cost = [inf] * (n + 1)
        resid = [0] * (n + 1)
        uses = [0] * (n + 1)
        cost[0] = 0.0
        for pos in range(n):
            r = resid[pos]
            u = uses[pos]
            r1 = r + 1
            c1 = u * kappa + r1 * rho
            t = pos + 1
            if c1 < cost[t] or (c1 == cost[t] and r1 < resid[t]):
                cost[t], resid[t], uses[t] = c1, r1, u
            u1 = u + 1
            c2 = u1 * kappa + r * rho
            for length in lengths_by_pos[pos]:
                t = pos + length
                if c2 < cost[t] or (c2 == cost[t] and r < resid[t]):
                    cost[t], resid[t], uses[t] = c2, r, u1
        return uses[n], resid[n]

    budget = beam_width - 1
    width = budget + 1
    size = (n + 1) * width
    cost = [inf] * size
    resid = [0] * size
    uses = [0] * size
    cost[0] = 0.0
    for pos in range(n):
        base = pos * width
        moves = _move_groups(lengths_by_pos[pos], kappa, rho)
        for d in range(width):
            cell = base + d
            c = cost[cell]
            if c == inf:
                continue
            r = resid[cell]
            u = uses[cell]
            for rank, jump in enumerate(moves):
                nd = d if rank == 0 else d + 1
                if nd >= width:
                    break
                if jump == 1:
                    nr, nu = r + 1, u
                else:
                    nr, nu = r, u + 1
                nc = nu * kappa + nr * rho
                t = (pos + jump) * width + nd
                if nc < cost[t] or (nc == cost[t] and nr < resid[t]):
                    cost[t], resid[t], uses[t] = nc, nr, nu
    best = (inf, 0, 0)
    for d in range(width):
        cell = n * width + d
        if cost[cell] == inf:
            continue
        state = (cost[cell], resid[cell], uses[cell])
        if state < best:
            best = state
    return best[2], best[1]


def encode_sample(grammar: Grammar, asample, beam_width: int | None = None,
                  matcher: Matcher | None = None, track_spans: bool = True) -> Encoding:
    """Minimum-cost non-overlapping cover of the sample.

    States advance left to right; at each position the encoding either
    pays the residual cost for one token or a construction-pointer cost
    for a matching span. ``beam_width=None`` returns the exact optimum.
    A finite width W explores only paths deviating at most W - 1 times
    from the locally cheapest move, so the returned cost is
    monotonically non-increasing in W and a large enough W reproduces
    the exact dynamic program. Cost is computed from use/residual
    counts, so covers with equal counts compare exactly equal; remaining
    ties break on (fewer residuals, lower construction ids).
    """
    n = len(asample)
    kappa = math.log2(len(grammar.constructions) + 1)
    rho = math.log2(grammar.lexicon_size + 1)
    if matcher is None:
        matcher = Matcher(grammar)
    matches = matcher.matches_by_position(asample)

    if not track_spans:
        lengths = [sorted({len(c.slots) for c in row}) for row in matches]
        uses, resid = cover_counts(lengths, n, beam_width, kappa, rho)
        return Encoding(spans=(), residuals=(), n_uses=uses,
                        n_residuals=resid, cost=uses * kappa + resid * rho)

    # moves per position, grouped by per-token cost exactly as in
    # cover_counts; constructions of equal length share a budget rank
    moves_by_pos: list[list[tuple[int, list | None]]] = []
    for pos in range(n):
        by_len: dict[int, list] = {}
        for c in matches[pos]:
            by_len.setdefault(len(c.slots), []).append(c)
        groups: list[tuple[float, int, int, list | None]] = [(rho, -1, 1, None)]
        for length, cs in by_len.items():
            groups.append((kappa / length, -length, length,
                           sorted(cs, key=lambda c: c.cid)))
        groups.sort(key=lambda g: (g[0], g[1]))
        moves_by_pos.append([(g[2], g[3]) for g in groups])

    width = n + 1 if beam_width is None else beam_width
    # cell state: (cost, resid, cids, uses, spans, residuals)
    cells: list[list[tuple | None]] = [[None] * width for _ in range(n + 1)]
    cells[0][0] = (0.0, 0, (), 0, (), ())
    for pos in range(n):
        row = cells[pos]
        for d in range(width):
            cell = row[d]
            if cell is None:
                continue
            _, resid, cids, uses, spans, residuals = cell
            for rank, (jump, constructions) in enumerate(moves_by_pos[pos]):
                nd = d if rank == 0 else d + 1
                if nd >= width:
                    break
                if constructions is None:
                    nr = resid + 1
                    state = (uses * kappa + nr * rho, nr, cids, uses,
                             spans, residuals + (pos,))
                    target = cells[pos + 1]
                    if target[nd] is None or state[:3] < target[nd][:3]:
                        target[nd] = state
                else:
                    nu = uses + 1
                    nc = nu * kappa + resid * rho
                    target = cells[pos + jump]
                    for construction in constructions:
                        state = (nc, resid, cids + (construction.cid,), nu,
                                 spans + ((pos, construction.cid),), residuals)
                        if target[nd] is None or state[:3] < target[nd][:3]:
                            target[nd] = state
    final = None
    for d in range(width):
        cell = cells[n][d]
        if cell is not None and (final is None or cell[:3] < final[:3]):
            final = cell
    if final is None:  # empty sample
        final = (0.0, 0, (), 0, (), ())
    _, resid, _, uses, spans, residuals = final
    return Encoding(spans=spans, residuals=residuals, n_uses=uses,
                    n_residuals=resid, cost=uses * kappa + resid * rho)


def write_feature_matrix(features, matrix_path, meta_path, header: str = "") -> None:
    """Sparse triplet CSV plus a metadata sidecar, per the file contract."""
    with open(matrix_path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        fh.write("sample_id,construction_id,count\n")
        for fv in features:
            for cid in np.nonzero(fv.counts)[0]:
                fh.write(f"{fv.sample_id},{cid},{int(fv.counts[cid])}\n")
    with open(meta_path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        fh.write("sample_id,country,city_id,month\n")
        for fv in features:
            fh.write(f"{fv.sample_id},{fv.country},{fv.city_id},{fv.month}\n")
