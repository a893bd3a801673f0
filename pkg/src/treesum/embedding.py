"""Sentence and document embeddings through interchangeable providers.

Every sentence gets a fixed-length vector; each document vector is the
componentwise mean of its sentences' vectors. Three providers are available:

* ``provider_file``: precomputed vectors from a JSONL file, one record per
  line shaped ``{"key": "<topic_id>/d<doc_index>/s<sent_index>",
  "vector": [floats]}``.
* ``provider_builtin_tfidf``: a deterministic hashed tf-idf embedder that
  keeps the whole pipeline self-contained (tests, CI, demos).
* ``provider_remote``: a client for a sidecar embedding service speaking
  ``POST <endpoint>/embed`` with body ``{"texts": [str]}`` and response
  ``{"vectors": [[float]]}``.

All providers are safe for concurrent ``embed`` calls: the first two only
read prebuilt maps, and the remote client keeps no per-call state.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
import requests

from .corpus import Corpus, Topic

Vector = np.ndarray


class ProviderError(Exception):
    """Raised when an embedding provider cannot produce vectors."""


def sentence_key(topic_id: str, doc_index: int, sent_index: int) -> str:
    return f"{topic_id}/d{doc_index}/s{sent_index}"


def document_key(topic_id: str, doc_index: int) -> str:
    return f"{topic_id}/d{doc_index}"


class EmbeddingProvider(Protocol):
    def embed(self, keys: Sequence[str], texts: Sequence[str]) -> list[Vector]:
        """Vectors for the given sentences, in request order."""


@dataclass
class EmbeddedCorpus:
    """A corpus together with one vector per sentence and per document."""

    corpus: Corpus
    sentence_vectors: dict[str, Vector]
    document_vectors: dict[str, Vector]
    dim: int

    def doc_vectors_for(self, topic: Topic) -> dict[str, Vector]:
        """Ordered document-key -> vector map for one topic."""
        return {
            document_key(topic.topic_id, d.doc_index): self.document_vectors[
                document_key(topic.topic_id, d.doc_index)
            ]
            for d in topic.documents
        }

    def sentence_vectors_for(self, topic: Topic) -> dict[str, Vector]:
        """Ordered sentence-key -> vector map for one topic."""
        out: dict[str, Vector] = {}
        for doc in topic.documents:
            for sent in doc.sentences:
                key = sentence_key(topic.topic_id, doc.doc_index, sent.sent_index)
                out[key] = self.sentence_vectors[key]
        return out


def cosine_similarity(a: Vector, b: Vector) -> float:
    """Cosine of the angle between two vectors; 0.0 when either norm is 0.

    Both vectors are rescaled by their largest absolute component first, so
    squaring cannot underflow or overflow for extreme magnitudes. Raises
    ValueError on dimension mismatch so shape bugs surface instead of
    broadcasting silently.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    scale_a = float(np.max(np.abs(a)))
    scale_b = float(np.max(np.abs(b)))
    if scale_a == 0.0 or scale_b == 0.0:
        return 0.0
    a = a / scale_a
    b = b / scale_b
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def _as_vector(values, context: str) -> Vector:
    try:
        vec = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProviderError(f"{context}: vector is not numeric") from exc
    if vec.ndim != 1 or vec.size == 0:
        raise ProviderError(f"{context}: vector must be a non-empty flat list")
    if not np.all(np.isfinite(vec)):
        raise ProviderError(f"{context}: vector has non-finite components")
    return vec


class FileProvider:
    """Looks up precomputed vectors by sentence key."""

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._vectors: dict[str, Vector] = {}
        if not self._path.is_file():
            raise ProviderError(f"embedding file {self._path} does not exist")
        with self._path.open(encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    key = record["key"]
                    values = record["vector"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ProviderError(
                        f"malformed record on line {line_no} of {self._path}: {exc}"
                    ) from exc
                if key in self._vectors:
                    raise ProviderError(f"duplicate key {key!r} in {self._path}")
                self._vectors[key] = _as_vector(values, f"key {key!r}")

    def embed(self, keys: Sequence[str], texts: Sequence[str]) -> list[Vector]:
        out = []
        for key in keys:
            if key not in self._vectors:
                raise ProviderError(f"missing embedding for key {key!r}")
            out.append(self._vectors[key])
        return out


def provider_file(path: str | Path) -> FileProvider:
    return FileProvider(path)


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _hash_bucket(token: str, dim: int, seed_bytes: bytes) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=seed_bytes).digest()
    return int.from_bytes(digest, "little") % dim


class BuiltinTfidfProvider:
    """Deterministic hashed tf-idf sentence embedder.

    Lowercased alphanumeric tokens are hashed into ``dim`` buckets with a
    seeded hash; bucket weights are term frequency in the sentence times a
    smoothed inverse document frequency over the topic's documents
    (``ln((1+n_docs)/(1+df)) + 1``). Vectors are L2-normalized; a sentence
    with no tokens falls back to the unit basis vector e1. All vectors are
    precomputed at construction, so results are bitwise reproducible for a
    given (corpus, dim, seed).
    """

    def __init__(self, corpus: Corpus, dim: int, seed: int):
        if dim < 2:
            raise ValueError("builtin embedder needs dim >= 2")
        self.dim = dim
        seed_bytes = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
        self._vectors: dict[str, Vector] = {}
        for topic in corpus:
            df: Counter[str] = Counter()
            for doc in topic.documents:
                df.update({tok for s in doc.sentences for tok in _TOKEN_RE.findall(s.text.lower())})
            n_docs = len(topic.documents)
            idf = {tok: math.log((1 + n_docs) / (1 + count)) + 1.0 for tok, count in df.items()}
            for doc in topic.documents:
                for sent in doc.sentences:
                    vec = np.zeros(dim)
                    for tok, tf in Counter(_TOKEN_RE.findall(sent.text.lower())).items():
                        vec[_hash_bucket(tok, dim, seed_bytes)] += tf * idf[tok]
                    norm = float(np.linalg.norm(vec))
                    if norm == 0.0:
                        vec = np.zeros(dim)
                        vec[0] = 1.0
                    else:
                        vec = vec / norm
                    key = sentence_key(topic.topic_id, doc.doc_index, sent.sent_index)
                    self._vectors[key] = vec

    def embed(self, keys: Sequence[str], texts: Sequence[str]) -> list[Vector]:
        try:
            return [self._vectors[key] for key in keys]
        except KeyError as exc:
            raise ProviderError(f"unknown sentence key {exc.args[0]!r}") from exc


def provider_builtin_tfidf(corpus: Corpus, dim: int, seed: int) -> BuiltinTfidfProvider:
    return BuiltinTfidfProvider(corpus, dim, seed)


class RemoteProvider:
    """Client for an HTTP embedding service.

    Sends sentence texts in batches and expects vectors back in request
    order. Connection failures, timeouts and 5xx responses are retried a
    bounded number of times with a short backoff.
    """

    def __init__(
        self,
        endpoint_url: str,
        batch_size: int = 32,
        max_attempts: int = 3,
        timeout: float = 30.0,
        backoff: float = 0.5,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self._url = endpoint_url.rstrip("/") + "/embed"
        self._batch_size = batch_size
        self._max_attempts = max_attempts
        self._timeout = timeout
        self._backoff = backoff

    def _post_batch(self, batch: list[str]) -> list[Vector]:
        last_error: Exception | None = None
        for attempt in range(self._max_attempts):
            if attempt:
                time.sleep(self._backoff * attempt)
            try:
                response = requests.post(self._url, json={"texts": batch}, timeout=self._timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = ProviderError(
                    f"embedding service returned {response.status_code}"
                )
                continue
            if response.status_code != 200:
                raise ProviderError(
                    f"embedding service returned {response.status_code}: {response.text[:200]}"
                )
            try:
                vectors = response.json()["vectors"]
            except (ValueError, KeyError) as exc:
                raise ProviderError(f"malformed embedding response: {exc}") from exc
            if len(vectors) != len(batch):
                raise ProviderError(
                    f"embedding service returned {len(vectors)} vectors for {len(batch)} texts"
                )
            return [_as_vector(v, f"response vector {i}") for i, v in enumerate(vectors)]
        raise ProviderError(
            f"embedding service unreachable after {self._max_attempts} attempts: {last_error}"
        )

    def embed(self, keys: Sequence[str], texts: Sequence[str]) -> list[Vector]:
        out: list[Vector] = []
        for start in range(0, len(texts), self._batch_size):
            out.extend(self._post_batch(list(texts[start : start + self._batch_size])))
        return out


def provider_remote(endpoint_url: str, batch_size: int = 32, **kwargs) -> RemoteProvider:
    return RemoteProvider(endpoint_url, batch_size=batch_size, **kwargs)


def embed_corpus(corpus: Corpus, provider: EmbeddingProvider) -> EmbeddedCorpus:
    """Embed every sentence and derive document vectors as sentence means.

    All vectors in a run must share one dimension; a provider returning mixed
    dimensions raises ProviderError.
    """
    sentence_vectors: dict[str, Vector] = {}
    document_vectors: dict[str, Vector] = {}
    dim: int | None = None

    for topic in corpus:
        keys: list[str] = []
        texts: list[str] = []
        for doc in topic.documents:
            for sent in doc.sentences:
                keys.append(sentence_key(topic.topic_id, doc.doc_index, sent.sent_index))
                texts.append(sent.text)
        vectors = provider.embed(keys, texts)
        if len(vectors) != len(keys):
            raise ProviderError(
                f"provider returned {len(vectors)} vectors for {len(keys)} sentences"
            )
        for key, vec in zip(keys, vectors):
            vec = _as_vector(vec, f"key {key!r}")
            if dim is None:
                dim = int(vec.shape[0])
            elif vec.shape[0] != dim:
                raise ProviderError(
                    f"dimension mismatch: key {key!r} has dim {vec.shape[0]}, expected {dim}"
                )
            sentence_vectors[key] = vec
        for doc in topic.documents:
            stacked = np.stack(
                [
                    sentence_vectors[sentence_key(topic.topic_id, doc.doc_index, s.sent_index)]
                    for s in doc.sentences
                ]
            )
            document_vectors[document_key(topic.topic_id, doc.doc_index)] = stacked.mean(axis=0)

    assert dim is not None, "corpus has no sentences"
    return EmbeddedCorpus(
        corpus=corpus,
        sentence_vectors=sentence_vectors,
        document_vectors=document_vectors,
        dim=dim,
    )
