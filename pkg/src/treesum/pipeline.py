"""Corpus-level orchestration: embed once, summarize every topic.

Topics are independent, so they can be fanned out to a worker pool; results
are collected back in corpus order, which keeps output identical no matter
how many workers run.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .corpus import Corpus
from .embedding import EmbeddedCorpus
from .selection import Budget, Summary
from .tree import default_max_nodes
from .variants import VariantSpec, summarize_topic


def corpus_length_stats(corpus: Corpus) -> tuple[float, float]:
    """(avg words per sentence, avg bytes per word) over the whole corpus.

    Sentence texts are whitespace-normalized, so internal separators are
    single spaces and per-word byte cost excludes them.
    """
    total_sentences = 0
    total_words = 0
    total_word_bytes = 0
    for topic in corpus:
        for doc in topic.documents:
            for sent in doc.sentences:
                total_sentences += 1
                total_words += sent.word_count
                total_word_bytes += sent.byte_length - (sent.word_count - 1)
    avg_sentence_words = total_words / total_sentences
    avg_word_bytes = total_word_bytes / total_words
    return avg_sentence_words, avg_word_bytes


def resolve_max_nodes(corpus: Corpus, budget: Budget, max_nodes: int | None) -> int:
    """Node-count cap for tree construction.

    Defaults to the estimated number of sentences the summary needs: the
    budget expressed in words divided by the corpus' average sentence length
    (byte budgets are converted through the average word byte cost plus one
    joining space).
    """
    if max_nodes is not None:
        if max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")
        return max_nodes
    avg_sentence_words, avg_word_bytes = corpus_length_stats(corpus)
    if budget.unit == "words":
        target_words = float(budget.limit)
    else:
        target_words = budget.limit / (avg_word_bytes + 1.0)
    return default_max_nodes(target_words, avg_sentence_words)


def summarize_corpus(
    corpus: Corpus,
    embedded: EmbeddedCorpus,
    spec: VariantSpec,
    max_nodes: int,
    workers: int = 1,
) -> dict[str, Summary]:
    """One summary per topic, keyed by topic_id, in corpus order."""
    topics = list(corpus)
    if workers <= 1:
        results = [summarize_topic(t, embedded, spec, max_nodes) for t in topics]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(lambda t: summarize_topic(t, embedded, spec, max_nodes), topics)
            )
    return {topic.topic_id: summary for topic, summary in zip(topics, results)}
