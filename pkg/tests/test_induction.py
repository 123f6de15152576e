import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cxgdialect.errors import UndefinedAssociationError
from cxgdialect.induction import (Construction, Grammar, InductionConfig,
                                  build_association, data_cost, delta_p,
                                  generate_candidates, grammar_cost, induce,
                                  total_description_length, LEX, SYN, SEM)
from cxgdialect.lexical_data import TAGSET
from cxgdialect.parser import count, match_at

from conftest import toy_annotated


def test_delta_p_worked_example():
    assert delta_p(30, 10, 20, 140) == pytest.approx(0.625, abs=1e-12)


def test_delta_p_independence_is_zero():
    assert delta_p(10, 10, 10, 10) == 0.0


def test_delta_p_zero_margin_raises():
    with pytest.raises(UndefinedAssociationError):
        delta_p(0, 0, 5, 5)
    with pytest.raises(UndefinedAssociationError):
        delta_p(5, 5, 0, 0)


@settings(max_examples=200)
@given(st.tuples(*[st.integers(min_value=0, max_value=10_000)] * 4))
def test_delta_p_bounds_and_exactness(counts):
    a, b, c, d = counts
    if a + b == 0 or c + d == 0:
        with pytest.raises(UndefinedAssociationError):
            delta_p(a, b, c, d)
        return
    value = delta_p(a, b, c, d)
    assert -1.0 <= value <= 1.0
    exact = Fraction(a, a + b) - Fraction(c, c + d)
    assert abs(value - float(exact)) < 1e-12


def lex_pairing_contingency(table, lexicon, w1, w2):
    return table.contingency(LEX, LEX, lexicon.word_id(w1), lexicon.word_id(w2))


def test_build_association_hand_count():
    corpus, lexicon, _ = toy_annotated(["a b a b"], n_domains=1)
    table = build_association(corpus)
    a, b, c, d = lex_pairing_contingency(table, lexicon, "a", "b")
    assert (a, b, c, d) == (2, 0, 0, 1)
    assert table.delta_p(LEX, LEX, lexicon.word_id("a"), lexicon.word_id("b")) == 1.0


def test_build_association_single_token_samples_empty():
    corpus, _, _ = toy_annotated(["a", "b", "c"], n_domains=1)
    table = build_association(corpus)
    assert all(total == 0 for total in table.totals.values())


def test_delta_p_is_directional():
    corpus, lexicon, _ = toy_annotated(["a b c a b a"], n_domains=1)
    table = build_association(corpus)
    ab = table.delta_p(LEX, LEX, lexicon.word_id("a"), lexicon.word_id("b"))
    ba = table.delta_p(LEX, LEX, lexicon.word_id("b"), lexicon.word_id("a"))
    assert ab != ba


def test_association_margins_sum_to_total():
    corpus, _, _ = toy_annotated(["it was shut so we went home"] * 3)
    table = build_association(corpus)
    for pairing, counts in table.pair_counts.items():
        assert sum(counts.values()) == table.totals[pairing]
        assert sum(table.first_margin[pairing].values()) == table.totals[pairing]


ABILITY_CORPUS = [
    "ability to focus on zkq",
    "ability to live in xvb",
    "ability to wait for zkq",
    "qrm went ability to focus",
    "xvb saw ability to wait",
    "ability to live with qrm",
]


def test_generate_candidates_finds_paper_style_span():
    # one semantic domain makes SEM uninformative, so the best third slot
    # is the POS constraint on the varying verb
    corpus, lexicon, _ = toy_annotated(ABILITY_CORPUS, n_domains=1)
    table = build_association(corpus)
    cands = generate_candidates(corpus, table, theta=0.2, max_slots=3)
    want = (
        (LEX, lexicon.word_id("ability")),
        (LEX, lexicon.word_id("to")),
        (SYN, TAGSET.index("VERB")),
    )
    assert want in {c.slots for c in cands}


def test_generate_candidates_unattainable_theta():
    corpus, _, _ = toy_annotated(ABILITY_CORPUS, n_domains=1)
    table = build_association(corpus)
    assert generate_candidates(corpus, table, theta=1.0 + 1e-9, max_slots=4) == []


def exhaustive_candidates(corpus, table, theta, max_slots):
    """Brute-force oracle: every span, every kind assignment."""
    from cxgdialect.induction import _available_kinds, _layer_value
    registry = {}
    for asample in corpus:
        n = len(asample)
        for start in range(n - 1):
            for length in range(2, min(max_slots, n - start) + 1):
                best = None
                for kinds in itertools.product(*[
                        _available_kinds(asample, start + j) for j in range(length)]):
                    dps = []
                    ok = True
                    for j in range(length - 1):
                        dp = table.delta_p_or_none(
                            kinds[j], kinds[j + 1],
                            _layer_value(asample, kinds[j], start + j),
                            _layer_value(asample, kinds[j + 1], start + j + 1))
                        if dp is None:
                            ok = False
                            break
                        dps.append(dp)
                    if not ok:
                        continue
                    state = (sum(dps), kinds, min(dps))
                    if best is None or state[0] > best[0] or \
                            (state[0] == best[0] and kinds < best[1]):
                        best = state
                if best is not None and best[2] >= theta:
                    slots = tuple(
                        (k, _layer_value(asample, k, start + j))
                        for j, k in enumerate(best[1]))
                    registry[slots] = registry.get(slots, 0) + 1
    return registry


def test_candidate_beam_unlimited_matches_exhaustive():
    texts = ["ability to focus on it was shut xvb qrm it was set",
             "it can go ability to wait zkq it was shut qrm xvb",
             "zkq xvb it was shut ability to live on qrm it can go"]
    corpus, _, _ = toy_annotated(texts, n_domains=3)
    table = build_association(corpus)
    for theta in (0.05, 0.3):
        beam = generate_candidates(corpus, table, theta=theta, max_slots=4,
                                   beam_width=None)
        oracle = exhaustive_candidates(corpus, table, theta=theta, max_slots=4)
        assert {c.slots: c.support for c in beam} == oracle


def test_grammar_cost_empty_is_zero():
    g = Grammar(constructions=(), lexicon_size=100_000, domain_count=1000,
                max_slots=5)
    assert grammar_cost(g) == 0.0


def test_grammar_cost_two_syn_slots():
    g = Grammar(constructions=(Construction(((SYN, 0), (SYN, 3)), cid=0),),
                lexicon_size=100_000, domain_count=1000, max_slots=5)
    expected = 2 * (math.log2(3) + math.log2(14)) + math.log2(5)
    assert grammar_cost(g) == pytest.approx(expected, abs=1e-12)


def test_grammar_cost_strictly_increases():
    c1 = Construction(((SYN, 0), (SYN, 1)), cid=0)
    c2 = Construction(((LEX, 5), (SEM, 2)), cid=1)
    g1 = Grammar(constructions=(c1,), lexicon_size=1000, domain_count=10, max_slots=5)
    g2 = Grammar(constructions=(c1, c2), lexicon_size=1000, domain_count=10, max_slots=5)
    assert grammar_cost(g2) > grammar_cost(g1)


def test_data_cost_null_grammar_baseline():
    corpus, lexicon, domains = toy_annotated(["it was shut so we went home"])
    g = Grammar(constructions=(), lexicon_size=len(lexicon),
                domain_count=domains.n_domains, max_slots=5)
    n = len(corpus[0])
    assert data_cost(g, corpus) == pytest.approx(
        n * math.log2(len(lexicon) + 1), abs=1e-12)


def test_data_cost_single_covering_construction_cheaper():
    corpus, lexicon, domains = toy_annotated(["it was shut"])
    asample = corpus[0]
    covering = Construction(
        tuple((LEX, w) for w in asample.word_ids), cid=0)
    g = Grammar(constructions=(covering,), lexicon_size=len(lexicon),
                domain_count=domains.n_domains, max_slots=5)
    cost = data_cost(g, corpus)
    assert cost == pytest.approx(math.log2(2), abs=1e-12)
    assert cost < 3 * math.log2(len(lexicon) + 1)


def test_data_cost_unchanged_by_never_matching_construction():
    corpus, lexicon, domains = toy_annotated(["it was shut"])
    empty = Grammar(constructions=(), lexicon_size=len(lexicon),
                    domain_count=domains.n_domains, max_slots=5)
    never = Grammar(constructions=(Construction(((LEX, 9999), (LEX, 9998)), cid=0),),
                    lexicon_size=len(lexicon), domain_count=domains.n_domains,
                    max_slots=5)
    assert data_cost(never, corpus) == data_cost(empty, corpus)


def induce_on(texts, theta=0.2, seed=0, n_domains=3):
    corpus, lexicon, domains = toy_annotated(texts, n_domains=n_domains, seed=seed)
    config = InductionConfig(lexicon_size=len(lexicon),
                             domain_count=domains.n_domains,
                             theta=theta, seed=seed, corpus_id="test")
    return induce(corpus, config), corpus, lexicon


def test_induce_compresses_repeated_pattern():
    grammar, corpus, _ = induce_on(["it was shut"] * 100)
    assert len(grammar.constructions) > 0
    empty = Grammar(constructions=(), lexicon_size=grammar.lexicon_size,
                    domain_count=grammar.domain_count, max_slots=grammar.max_slots)
    assert total_description_length(grammar, corpus) < \
        total_description_length(empty, corpus)
    # some construction matches the triple
    assert count(grammar, corpus[0]).counts.sum() > 0


def test_induce_unattainable_theta_gives_empty_grammar():
    grammar, corpus, _ = induce_on(["it was shut"] * 20, theta=1.5)
    assert grammar.constructions == ()
    assert grammar.selection_log == ()


def test_induce_deterministic():
    texts = ["it was shut qrm xvb", "xvb it was set", "it can go qrm"] * 10
    g1, _, _ = induce_on(texts, seed=7)
    g2, _, _ = induce_on(texts, seed=7)
    assert [c.slots for c in g1.constructions] == [c.slots for c in g2.constructions]
    assert g1.selection_log == g2.selection_log


def test_induce_log_replays_exactly():
    grammar, corpus, _ = induce_on(
        ["it was shut qrm", "it was set xvb", "qrm xvb it was shut"] * 8)
    assert grammar.selection_log  # the pattern is compressible
    for k, entry in enumerate(grammar.selection_log):
        prefix = Grammar(constructions=grammar.constructions[:k],
                         lexicon_size=grammar.lexicon_size,
                         domain_count=grammar.domain_count,
                         max_slots=grammar.max_slots)
        extended = Grammar(constructions=grammar.constructions[:k + 1],
                           lexicon_size=grammar.lexicon_size,
                           domain_count=grammar.domain_count,
                           max_slots=grammar.max_slots)
        assert total_description_length(prefix, corpus) == entry["dl_before"]
        assert total_description_length(extended, corpus) == entry["dl_after"]
        assert entry["dl_after"] < entry["dl_before"]


def test_grammar_json_round_trip(tmp_path):
    from cxgdialect.induction import load_grammar, save_grammar
    grammar, _, lexicon = induce_on(["it was shut qrm xvb"] * 20)
    path = tmp_path / "grammar.json"
    save_grammar(grammar, path, lexicon=lexicon)
    loaded = load_grammar(path)
    assert [c.slots for c in loaded.constructions] == \
        [c.slots for c in grammar.constructions]
    assert loaded.lexicon_size == grammar.lexicon_size
    assert loaded.domain_count == grammar.domain_count
    assert loaded.max_slots == grammar.max_slots
    # second round trip is byte-identical
    path2 = tmp_path / "grammar2.json"
    save_grammar(loaded, path2, lexicon=lexicon)
    assert path2.read_bytes() == path.read_bytes()