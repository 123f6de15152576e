"""Shared builders for toy corpora, grammars, and annotated samples."""

from __future__ import annotations

import numpy as np
import pytest

from cxgdialect.annotate import (AnnotatedSample, LexiconTagger, annotate,
                                 build_lexicon, build_ppmi_vectors,
                                 induce_domains)
from cxgdialect.corpus import GeoDoc, Sample
from cxgdialect.induction import Construction, Grammar, KIND_IDS
from cxgdialect.lexical_data import TAG_TO_ID, TAGSET


def make_docs(texts, city="c0", country="XX", month="2018-07"):
    return [GeoDoc(doc_id=f"d{i:03d}", city_id=city, country=country,
                   month=month, tokens=tuple(t.split()))
            for i, t in enumerate(texts)]


def toy_annotated(texts, n_domains=4, seed=0, cap=100):
    """Annotate each text as one sample through the real inventories."""
    docs = make_docs(texts)
    lexicon = build_lexicon(docs, cap)
    vectors = build_ppmi_vectors(docs, lexicon, dim=min(8, len(lexicon)), seed=seed)
    domains = induce_domains(vectors, min(n_domains, len(lexicon)), seed=seed)
    tagger = LexiconTagger()
    samples = [Sample(sample_id=f"s{i:03d}", city_id="c0", country="XX",
                      month="2018-07", tokens=d.tokens)
               for i, d in enumerate(docs)]
    corpus = [annotate(s, lexicon, tagger, domains) for s in samples]
    return corpus, lexicon, domains


def make_grammar(slot_specs, lexicon, domains=None, max_slots=5,
                 lexicon_size=None, domain_count=None):
    """Build a grammar from specs like [("LEX", "it"), ("SYN", "AUX")].

    SEM values may be ints (domain ids) or words looked up in domains.
    """
    constructions = []
    for cid, spec in enumerate(slot_specs):
        slots = []
        for kind_name, value in spec:
            kind = KIND_IDS[kind_name]
            if kind_name == "LEX":
                value = lexicon.word_id(value)
                assert value >= 0, f"word not in lexicon: {spec}"
            elif kind_name == "SYN":
                value = TAG_TO_ID[value]
            elif not isinstance(value, int):
                value = domains.domain_id(value)
            slots.append((kind, value))
        constructions.append(Construction(slots=tuple(slots), cid=cid))
    return Grammar(
        constructions=tuple(constructions),
        lexicon_size=len(lexicon) if lexicon_size is None else lexicon_size,
        domain_count=(domains.n_domains if domains is not None else 4)
        if domain_count is None else domain_count,
        max_slots=max_slots)


def random_annotated(rng, n_tokens, vocab=30, n_domains=6, oov_rate=0.1):
    """Random layer triples; OOV words get OOV domains."""
    word_ids, pos_ids, domain_ids = [], [], []
    for _ in range(n_tokens):
        if rng.random() < oov_rate:
            word_ids.append(-1)
            domain_ids.append(-1)
        else:
            word_ids.append(int(rng.integers(vocab)))
            domain_ids.append(int(rng.integers(n_domains)))
        pos_ids.append(int(rng.integers(len(TAGSET))))
    sample = Sample(sample_id="r", city_id="c0", country="XX",
                    month="2018-07", tokens=("tok",) * n_tokens)
    return AnnotatedSample(sample=sample, word_ids=tuple(word_ids),
                           pos_ids=tuple(pos_ids), domain_ids=tuple(domain_ids))


def random_grammar(rng, n_constructions, vocab=30, n_domains=6,
                   max_slots=5, lexicon_size=30):
    constructions = []
    seen = set()
    while len(constructions) < n_constructions:
        length = int(rng.integers(2, max_slots + 1))
        slots = []
        for _ in range(length):
            kind = int(rng.integers(3))
            if kind == 0:
                value = int(rng.integers(vocab))
            elif kind == 1:
                value = int(rng.integers(len(TAGSET)))
            else:
                value = int(rng.integers(n_domains))
            slots.append((kind, value))
        slots = tuple(slots)
        if slots in seen:
            continue
        seen.add(slots)
        constructions.append(Construction(slots=slots, cid=len(constructions)))
    return Grammar(constructions=tuple(constructions), lexicon_size=lexicon_size,
                   domain_count=n_domains, max_slots=max_slots)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
