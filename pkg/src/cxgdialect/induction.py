"""Grammar induction: delta-P association, candidate search, MDL selection.

A construction is an ordered sequence of slot constraints, each at one of
three representation levels: LEX (exact word), SYN (POS tag), SEM
(semantic domain). Candidates are contiguous corpus spans whose
best-scoring per-slot level assignment (found by beam search over level
choices, scored by summed adjacent delta-P) clears a threshold on every
adjacent transition. Selection is a single greedy pass ordered by
support x mean delta-P: a candidate enters the grammar only if it
strictly lowers the total description length (grammar bits plus corpus
encoding bits).

The encoding scheme is deliberately plain so every cost is auditable:
uniform codes over each inventory for grammar slots, a flat pointer code
over the grammar for construction uses, and a flat code over the lexicon
for residual tokens.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import UndefinedAssociationError
from .lexical_data import TAGSET

LEX, SYN, SEM = 0, 1, 2
KIND_NAMES = ("LEX", "SYN", "SEM")
KIND_IDS = {name: i for i, name in enumerate(KIND_NAMES)}


@dataclass(frozen=True)
class Construction:
    """Ordered slot constraints; each slot is a (kind, value) pair."""

    slots: tuple[tuple[int, int], ...]
    cid: int

    def __len__(self):
        return len(self.slots)


@dataclass(frozen=True)
class Grammar:
    constructions: tuple[Construction, ...]
    lexicon_size: int
    domain_count: int
    max_slots: int
    provenance: dict = field(default_factory=dict)
    selection_log: tuple[dict, ...] = ()

    def __len__(self):
        return len(self.constructions)

    def inventory_size(self, kind: int) -> int:
        if kind == LEX:
            return self.lexicon_size
        if kind == SYN:
            return len(TAGSET)
        return self.domain_count


def delta_p(a: int, b: int, c: int, d: int) -> float:
    """Directional association P(B|A) - P(B|not A) from contingency counts.

    a: A then B, b: A then not-B, c: not-A then B, d: not-A then not-B.
    """
    if a + b <= 0 or c + d <= 0:
        raise UndefinedAssociationError(f"zero margin in ({a},{b},{c},{d})")
    return a / (a + b) - c / (c + d)


class AssociationTable:
    """Adjacent-pair counts per level pairing, with on-demand delta-P.

    Counts are accumulated separately for each of the nine ordered level
    pairings (LEX-LEX, LEX-SYN, ..., SEM-SEM); pairs where either side is
    OOV at its level are skipped for that pairing, so every stored pair
    has positive margins.
    """

    def __init__(self):
        self.pair_counts: dict[tuple[int, int], dict[tuple[int, int], int]] = {
            (k1, k2): {} for k1 in range(3) for k2 in range(3)}
        self.first_margin: dict[tuple[int, int], dict[int, int]] = {}
        self.second_margin: dict[tuple[int, int], dict[int, int]] = {}
        self.totals: dict[tuple[int, int], int] = {}
        self._dp_cache: dict[tuple[int, int, int, int], float] = {}

    def _finalize(self):
        for pairing, counts in self.pair_counts.items():
            first: dict[int, int] = {}
            second: dict[int, int] = {}
            total = 0
            for (v1, v2), n in counts.items():
                first[v1] = first.get(v1, 0) + n
                second[v2] = second.get(v2, 0) + n
                total += n
            self.first_margin[pairing] = first
            self.second_margin[pairing] = second
            self.totals[pairing] = total

    def contingency(self, k1: int, k2: int, v1: int, v2: int) -> tuple[int, int, int, int]:
        pairing = (k1, k2)
        a = self.pair_counts[pairing].get((v1, v2), 0)
        n1 = self.first_margin[pairing].get(v1, 0)
        n2 = self.second_margin[pairing].get(v2, 0)
        n = self.totals[pairing]
        return a, n1 - a, n2 - a, n - n1 - n2 + a

    def delta_p(self, k1: int, k2: int, v1: int, v2: int) -> float:
        key = (k1, k2, v1, v2)
        cached = self._dp_cache.get(key)
        if cached is None:
            cached = delta_p(*self.contingency(k1, k2, v1, v2))
            self._dp_cache[key] = cached
        return cached

    def delta_p_or_none(self, k1, k2, v1, v2):
        try:
            return self.delta_p(k1, k2, v1, v2)
        except UndefinedAssociationError:
            return None


def _layer_value(asample, kind: int, pos: int) -> int:
    if kind == LEX:
        return asample.word_ids[pos]
    if kind == SYN:
        return asample.pos_ids[pos]
    return asample.domain_ids[pos]


def _available_kinds(asample, pos: int) -> tuple[int, ...]:
    # SYN is always defined; LEX and SEM only for in-lexicon tokens
    if asample.word_ids[pos] >= 0:
        return (LEX, SYN, SEM)
    return (SYN,)


def build_association(corpus) -> AssociationTable:
    """Count adjacent-token pairs at all nine level pairings."""
    table = AssociationTable()
    counts = table.pair_counts
    for asample in corpus:
        n = len(asample)
        for i in range(n - 1):
            ks1 = _available_kinds(asample, i)
            ks2 = _available_kinds(asample, i + 1)
            for k1 in ks1:
                v1 = _layer_value(asample, k1, i)
                for k2 in ks2:
                    v2 = _layer_value(asample, k2, i + 1)
                    pairing = counts[(k1, k2)]
                    key = (v1, v2)
                    pairing[key] = pairing.get(key, 0) + 1
    table._finalize()
    return table


@dataclass(frozen=True)
class Candidate:
    slots: tuple[tuple[int, int], ...]
    support: int
    mean_dp: float

    @property
    def score(self) -> float:
        return self.support * self.mean_dp


def generate_candidates(corpus, table: AssociationTable, theta: float,
                        max_slots: int = 5, beam_width: int | None = 8) -> list[Candidate]:
    """Extract construction candidates from every corpus span.

    For each span of length 2..max_slots a beam of width ``beam_width``
    searches per-slot level assignments, scored by the sum of adjacent
    delta-P values under the chosen levels; a span becomes a candidate
    when its best-scoring assignment has every adjacent delta-P >= theta.
    Identical candidates from different positions merge with summed
    support. ``beam_width=None`` means exhaustive search.
    """
    registry: dict[tuple[tuple[int, int], ...], int] = {}
    for asample in corpus:
        n = len(asample)
        if n < 2:
            continue
        avail = [_available_kinds(asample, i) for i in range(n)]
        values = [[_layer_value(asample, k, i) if k in avail[i] else None
                   for k in range(3)] for i in range(n)]
        # per adjacency: flat 9-entry list indexed k1 * 3 + k2, built lazily
        adj: list[list | None] = [None] * (n - 1)

        def adj_row(p):
            row = adj[p]
            if row is None:
                row = [None] * 9
                for k1 in avail[p]:
                    v1 = values[p][k1]
                    for k2 in avail[p + 1]:
                        row[k1 * 3 + k2] = table.delta_p_or_none(
                            k1, k2, v1, values[p + 1][k2])
                adj[p] = row
            return row

        for start in range(n - 1):
            states: list[tuple[float, float, tuple[int, ...]]] = [
                (0.0, math.inf, (k,)) for k in avail[start]]
            limit = min(max_slots, n - start)
            for length in range(2, limit + 1):
                pos = start + length - 1
                row = adj_row(pos - 1)
                extended: list[tuple[float, float, tuple[int, ...]]] = []
                for score, min_dp, kinds in states:
                    base = kinds[-1] * 3
                    for k2 in avail[pos]:
                        dp = row[base + k2]
                        if dp is None:
                            continue
                        extended.append((score + dp,
                                         dp if dp < min_dp else min_dp,
                                         kinds + (k2,)))
                if not extended:
                    break
                if beam_width is not None and len(extended) > beam_width:
                    extended.sort(key=lambda s: (-s[0], s[2]))
                    extended = extended[:beam_width]
                states = extended
                best_score, best_min, best_kinds = min(
                    extended, key=lambda s: (-s[0], s[2]))
                if best_min >= theta:
                    slots = tuple((k, values[start + j][k])
                                  for j, k in enumerate(best_kinds))
                    registry[slots] = registry.get(slots, 0) + 1
    out = []
    for slots, support in registry.items():
        dps = [table.delta_p(k1, k2, v1, v2)
               for (k1, v1), (k2, v2) in zip(slots, slots[1:])]
        out.append(Candidate(slots=slots, support=support,
                             mean_dp=sum(dps) / len(dps)))
    out.sort(key=lambda c: (-c.score, c.slots))
    return out


def grammar_cost(grammar: Grammar) -> float:
    """Bits to encode the grammar itself under uniform inventory codes."""
    length_prefix = math.log2(grammar.max_slots)
    bits = 0.0
    for construction in grammar.constructions:
        bits += length_prefix
        for kind, _value in construction.slots:
            bits += math.log2(3) + math.log2(grammar.inventory_size(kind))
    return bits


def data_cost(grammar: Grammar, corpus, beam_width: int | None = None) -> float:
    """Bits to encode the corpus as construction uses plus residual tokens.

    Each sample is encoded by its best non-overlapping construction
    cover (the exact minimum by default; pass ``beam_width`` to truncate
    the cover search). Construction uses cost log2(|G| + 1) bits each,
    residual tokens log2(lexicon size + 1).
    """
    from .parser import Matcher, encode_sample
    matcher = Matcher(grammar)
    return sum(encode_sample(grammar, asample, beam_width=beam_width,
                             matcher=matcher, track_spans=False).cost
               for asample in corpus)


def total_description_length(grammar: Grammar, corpus, beam_width: int | None = None) -> float:
    return grammar_cost(grammar) + data_cost(grammar, corpus, beam_width)


@dataclass(frozen=True)
class InductionConfig:
    lexicon_size: int
    domain_count: int
    theta: float = 0.1
    max_slots: int = 5
    beam_width: int = 8
    seed: int = 0
    corpus_id: str = ""

    def as_dict(self) -> dict:
        return {
            "theta": self.theta, "max_slots": self.max_slots,
            "beam_width": self.beam_width, "seed": self.seed,
            "lexicon_size": self.lexicon_size, "domain_count": self.domain_count,
        }


def _candidate_match_positions(slots, asample) -> list[int]:
    """Positions where the slot sequence matches; single-construction scan."""
    n = len(asample)
    length = len(slots)
    if length > n:
        return []
    layers = (asample.word_ids, asample.pos_ids, asample.domain_ids)
    k0, v0 = slots[0]
    first = layers[k0]
    tail = slots[1:]
    out = []
    for i in range(n - length + 1):
        if first[i] != v0:
            continue
        for j, (k, v) in enumerate(tail, start=1):
            if layers[k][i + j] != v:
                break
        else:
            out.append(i)
    return out


def induce(corpus, config: InductionConfig) -> Grammar:
    """Learn a grammar by greedy MDL selection over scored candidates.

    Candidates are visited once, in descending support x mean delta-P
    order; each is kept only if the total description length strictly
    drops. The per-acceptance before/after lengths are kept in the
    grammar's selection log so the decrease is replayable with
    grammar_cost + data_cost on the grammar prefixes.

    The corpus encoding is evaluated incrementally: per-sample covers
    under the current grammar are cached per grammar size, and a
    candidate only forces a fresh cover on the samples it matches. The
    resulting lengths are bit-identical to calling data_cost on the trial
    grammar, just cheaper.
    """
    from .parser import cover_counts
    table = build_association(corpus)
    candidates = generate_candidates(corpus, table, config.theta,
                                     config.max_slots, config.beam_width)
    provenance = {"corpus_id": config.corpus_id, "config": config.as_dict()}

    def make(constructions, log):
        return Grammar(constructions=tuple(constructions),
                       lexicon_size=config.lexicon_size,
                       domain_count=config.domain_count,
                       max_slots=config.max_slots,
                       provenance=provenance,
                       selection_log=tuple(log))

    rho = math.log2(config.lexicon_size + 1)
    sizes = [len(a) for a in corpus]
    base_lengths: list[list[list[int]]] = [[[] for _ in range(n)] for n in sizes]
    selected: list[Construction] = []
    log: list[dict] = []
    dl_current = total_description_length(make(selected, log), corpus)
    base_cache: dict[int, tuple[int, int]] = {}
    for cand in candidates:
        kappa = math.log2(len(selected) + 2)  # pointer cost in the trial grammar
        gcost = grammar_cost(make(
            selected + [Construction(cand.slots, cid=len(selected))], log))
        total = 0.0
        span = len(cand.slots)
        touched: list[tuple[int, int]] = []  # (sample idx, position) added rows
        for si, asample in enumerate(corpus):
            positions = _candidate_match_positions(cand.slots, asample)
            if positions:
                rows = base_lengths[si]
                for pos in positions:
                    if span not in rows[pos]:
                        rows[pos].append(span)
                        rows[pos].sort()
                        touched.append((si, pos))
                uses, resid = cover_counts(rows, sizes[si], None, kappa, rho)
            else:
                cached = base_cache.get(si)
                if cached is None:
                    cached = cover_counts(base_lengths[si], sizes[si],
                                          None, kappa, rho)
                    base_cache[si] = cached
                uses, resid = cached
            total += uses * kappa + resid * rho
        dl_trial = gcost + total
        if dl_trial < dl_current:
            log.append({
                "cid": len(selected),
                "slots": [list(s) for s in cand.slots],
                "dl_before": dl_current,
                "dl_after": dl_trial,
            })
            selected.append(Construction(cand.slots, cid=len(selected)))
            base_cache.clear()
            dl_current = dl_trial
        else:
            for si, pos in touched:
                base_lengths[si][pos].remove(span)
    return make(selected, log)


def slots_to_strings(slots, lexicon=None) -> list[str]:
    """Human-readable slot rendering, e.g. 'LEX:it' or 'SYN:AUX'."""
    out = []
    for kind, value in slots:
        if kind == SYN:
            out.append(f"SYN:{TAGSET[value]}")
        elif kind == LEX and lexicon is not None:
            out.append(f"LEX:{lexicon.words[value]}")
        else:
            out.append(f"{KIND_NAMES[kind]}:{value}")
    return out


def save_grammar(grammar: Grammar, path, lexicon=None) -> None:
    """Write the grammar file: provenance header plus constructions."""
    constructions = []
    for construction in grammar.constructions:
        slots = []
        for kind, value in construction.slots:
            slot = {"kind": KIND_NAMES[kind], "value": int(value)}
            if kind == SYN:
                slot["form"] = TAGSET[value]
            elif kind == LEX and lexicon is not None:
                slot["form"] = lexicon.words[value]
            slots.append(slot)
        constructions.append(slots)
    obj = {
        "provenance": dict(grammar.provenance),
        "lexicon_size": grammar.lexicon_size,
        "domain_count": grammar.domain_count,
        "max_slots": grammar.max_slots,
        "selection_log": list(grammar.selection_log),
        "constructions": constructions,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_grammar(path) -> Grammar:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    constructions = tuple(
        Construction(slots=tuple((KIND_IDS[s["kind"]], int(s["value"])) for s in slots),
                     cid=i)
        for i, slots in enumerate(obj["constructions"]))
    return Grammar(constructions=constructions,
                   lexicon_size=int(obj["lexicon_size"]),
                   domain_count=int(obj["domain_count"]),
                   max_slots=int(obj["max_slots"]),
                   provenance=obj.get("provenance", {}),
                   selection_log=tuple(obj.get("selection_log", ())))
