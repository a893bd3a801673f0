"""Comparison baselines: behavior, determinism, shared budget semantics."""

from __future__ import annotations

import numpy as np
import pytest

from helpers import embed_with_vectors, make_corpus, make_topic, random_synthetic_topic, skey
from test_selection import FIXTURE_VECTORS, _fixture_embedded
from treesum.scoring import Hyperparams
from treesum.selection import Budget, sentence_refs
from treesum.variants import (
    METHODS,
    VariantSpec,
    summarize_comp1,
    summarize_comp2,
    summarize_comp3,
    summarize_comp4,
    summarize_topic,
)


def test_variant_spec_normalizes_and_validates():
    spec = VariantSpec(kind="ours-cs", hp=Hyperparams(), budget=Budget("words", 10), seed=1)
    assert spec.kind == "ours_cs"
    assert (spec.hp.alpha, spec.hp.beta, spec.hp.gamma) == (1.0, 0.0, 0.0)
    with pytest.raises(ValueError, match="unknown method"):
        VariantSpec(kind="comp9", hp=Hyperparams(), budget=Budget("words", 10), seed=1)


def test_comp1_identical_vectors_tiebreak():
    topic = make_topic("t", ["Alpha one two three. Alpha four five six.", "Bravo one two three."])
    same = (0.6, 0.8)
    embedded = embed_with_vectors(
        make_corpus(topic),
        {skey("t", 0, 0): same, skey("t", 0, 1): same, skey("t", 1, 0): same},
    )
    summary = summarize_comp1(topic, embedded, Budget("words", 4))
    assert summary.sentences[0].key == "t/d0/s0"


def test_comp1_centroid_direction_sentence_first():
    topic, embedded = _fixture_embedded()
    summary = summarize_comp1(topic, embedded, Budget("words", 4))
    # (0.70, 0.40) is the fixture sentence most aligned with the global
    # document centroid (0.566, 0.434).
    assert summary.sentences[0].key == "fix/d0/s1"


def test_comp1_budget_larger_than_topic_takes_everything():
    topic, embedded = _fixture_embedded()
    summary = summarize_comp1(topic, embedded, Budget("words", 9999))
    assert sorted(s.key for s in summary.sentences) == sorted(FIXTURE_VECTORS)


def test_comp1_orders_by_score_descending():
    topic, embedded = _fixture_embedded()
    summary = summarize_comp1(topic, embedded, Budget("words", 16))
    # Computed against the global centroid, the four best-aligned sentences
    # in score order.
    assert [s.key for s in summary.sentences] == [
        "fix/d0/s1", "fix/d2/s0", "fix/d2/s1", "fix/d0/s0",
    ]


def test_comp1_ignores_seed():
    topic, embedded = _fixture_embedded()
    outs = set()
    for seed in (0, 7, 123):
        spec = VariantSpec("comp1", Hyperparams(), Budget("words", 12), seed)
        outs.add(summarize_topic(topic, embedded, spec, max_nodes=3).text)
    assert len(outs) == 1


def test_comp2_identical_documents_single_cluster():
    topic = make_topic("t", ["Alpha one two three.", "Alpha one two three.", "Alpha one two three."])
    same = (0.6, 0.8)
    vectors = {skey("t", d, 0): same for d in range(3)}
    embedded = embed_with_vectors(make_corpus(topic), vectors)
    summary = summarize_comp2(topic, embedded, Hyperparams(), Budget("words", 4), seed=0)
    assert summary.sentences[0].key == "t/d0/s0"
    assert len(summary.sentences) == 1


def test_comp2_two_clusters_one_sentence_each():
    topic, embedded = _fixture_embedded()
    hp = Hyperparams(k_first=2)
    summary = summarize_comp2(topic, embedded, hp, Budget("words", 8), seed=3)
    assert len(summary.sentences) == 2
    docs = [s.doc_index for s in summary.sentences]
    assert docs[0] in (0, 1, 2) and docs[1] in (3, 4)  # big cluster first


def test_comp2_deterministic():
    topic, embedded = _fixture_embedded()
    hp = Hyperparams(k_first=2)
    a = summarize_comp2(topic, embedded, hp, Budget("words", 12), seed=9)
    b = summarize_comp2(topic, embedded, hp, Budget("words", 12), seed=9)
    assert a.text == b.text


def test_comp3_two_clusters_one_sentence_each():
    topic, embedded = _fixture_embedded()
    hp = Hyperparams(k_first=2)
    summary = summarize_comp3(topic, embedded, hp, Budget("words", 8), seed=3)
    assert len(summary.sentences) == 2
    docs = [s.doc_index for s in summary.sentences]
    assert docs[0] in (0, 1, 2) and docs[1] in (3, 4)


def test_comp3_deterministic():
    topic, embedded = _fixture_embedded()
    hp = Hyperparams(k_first=2)
    a = summarize_comp3(topic, embedded, hp, Budget("words", 12), seed=9)
    b = summarize_comp3(topic, embedded, hp, Budget("words", 12), seed=9)
    assert a.text == b.text


def test_single_document_comp2_comp3_reduce_to_comp1():
    topic = make_topic("t", ["First point made here. Second point made here. Third point made here."])
    vectors = {
        skey("t", 0, 0): (1.0, 0.1),
        skey("t", 0, 1): (0.5, 0.8),
        skey("t", 0, 2): (0.9, 0.4),
    }
    embedded = embed_with_vectors(make_corpus(topic), vectors)
    budget = Budget("words", 8)
    base = [s.key for s in summarize_comp1(topic, embedded, budget).sentences]
    for fn in (summarize_comp2, summarize_comp3):
        got = [s.key for s in fn(topic, embedded, Hyperparams(), budget, seed=1).sentences]
        assert got == base


def test_comp4_single_sentence_topic():
    topic = make_topic("t", ["Only sentence lives here."])
    embedded = embed_with_vectors(make_corpus(topic), {skey("t", 0, 0): (1.0, 0.0)})
    summary = summarize_comp4(topic, embedded, Hyperparams(), Budget("words", 4), seed=0, max_nodes=4)
    assert summary.text == "Only sentence lives here."


def test_comp4_sentence_clusters_trace():
    topic, embedded = _fixture_embedded()
    hp = Hyperparams(k_first=2)
    summary = summarize_comp4(topic, embedded, hp, Budget("words", 12), seed=5, max_nodes=3)
    keys = [s.key for s in summary.sentences]
    # Root of the sentence tree picks the sentence nearest the global
    # sentence centroid; the two sentence-cluster nodes then contribute one
    # sentence each, big cluster first.
    assert keys[0] == "fix/d0/s1"
    big = {skey("fix", d, s) for d in (0, 1, 2) for s in (0, 1)}
    small = {skey("fix", d, s) for d in (3, 4) for s in (0, 1)}
    assert keys[1] in big
    assert keys[2] in small


def test_comp4_deterministic():
    topic, embedded = _fixture_embedded()
    hp = Hyperparams(k_first=2)
    a = summarize_comp4(topic, embedded, hp, Budget("words", 16), seed=2, max_nodes=3)
    b = summarize_comp4(topic, embedded, hp, Budget("words", 16), seed=2, max_nodes=3)
    assert a.text == b.text


@pytest.mark.parametrize("method", METHODS)
def test_all_methods_share_budget_and_duplicate_semantics(method):
    rng = np.random.default_rng(31)
    for trial in range(4):
        topic, vectors = random_synthetic_topic(rng, f"t{trial}")
        embedded = embed_with_vectors(make_corpus(topic), vectors)
        sizes = {r.key: r.word_count for r in sentence_refs(topic)}
        limit = max(1, int(rng.integers(1, sum(sizes.values()) + 8)))
        spec = VariantSpec(method, Hyperparams(k_first=2), Budget("words", limit), seed=trial)
        summary = summarize_topic(topic, embedded, spec, max_nodes=4)
        keys = [s.key for s in summary.sentences]
        assert len(set(keys)) == len(keys)  # no duplicates
        consumed = sum(sizes[k] for k in keys)
        if len(keys) == len(sizes):
            assert consumed <= sum(sizes.values())  # exhausted topic
        else:
            assert consumed >= limit
            # The crossing sentence is somewhere in the summary (its exact
            # identity is checked at the engine level), so the overshoot is
            # below the largest selected sentence.
            assert consumed - limit < max(sizes[k] for k in keys)
