"""Corpus loading and sentence segmentation.

A corpus is a list of topics; each topic holds an ordered list of documents
plus optional reference summaries. Documents are segmented into sentences at
load time with a deterministic rule-based splitter, so identical inputs always
produce identical corpora.

Two on-disk layouts are supported:

* ``topic-dirs``: ``<root>/<topic_id>/docs/*.txt`` with one document per file,
  plus optional ``<root>/<topic_id>/refs/*.txt`` reference summaries.
  Documents are ordered by filename.
* ``jsonl``: one JSON record per topic, shaped as
  ``{"topic_id": str, "documents": [{"doc_id": str, "text": str}],
  "references": [str]}``. Documents keep file order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class CorpusError(Exception):
    """Raised when input data cannot be loaded into a valid corpus."""


@dataclass(frozen=True)
class Sentence:
    text: str
    sent_index: int
    word_count: int
    byte_length: int

    @property
    def position_1based(self) -> int:
        return self.sent_index + 1


@dataclass(frozen=True)
class Document:
    doc_id: str
    doc_index: int
    sentences: tuple[Sentence, ...]

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


@dataclass(frozen=True)
class Topic:
    topic_id: str
    documents: tuple[Document, ...]
    references: tuple[str, ...] = ()


@dataclass(frozen=True)
class Corpus:
    topics: tuple[Topic, ...] = field(default_factory=tuple)

    def __iter__(self):
        return iter(self.topics)

    def __len__(self) -> int:
        return len(self.topics)

    def topic(self, topic_id: str) -> Topic:
        for t in self.topics:
            if t.topic_id == topic_id:
                return t
        raise KeyError(topic_id)


# Tokens that end with a period without ending a sentence. Stored lowercase,
# without the final period ("u.s" covers "U.S."). Single capital letters
# ("John F. Kennedy") are handled separately.
_ABBREVIATIONS = frozenset(
    {
        "mr", "mrs", "ms", "dr", "prof", "rev", "hon", "st", "mt", "ft",
        "gen", "col", "maj", "capt", "cmdr", "adm", "sgt", "lt", "gov",
        "sen", "rep", "pres", "supt", "det", "jr", "sr", "no", "vs", "etc",
        "inc", "ltd", "co", "corp", "dept", "univ", "est", "fig", "al",
        "u.s", "u.k", "u.n", "d.c", "a.m", "p.m", "e.g", "i.e", "a.d", "b.c",
    }
)

_TERMINATORS = frozenset(".!?")


def count_words(text: str) -> int:
    """Number of maximal whitespace-delimited tokens in ``text``."""
    return len(text.split())


def _token_before(text: str, idx: int) -> str:
    """The run of non-whitespace characters immediately before ``text[idx]``."""
    j = idx
    while j > 0 and not text[j - 1].isspace():
        j -= 1
    return text[j:idx]


def _is_abbreviation_dot(text: str, idx: int) -> bool:
    """True when the period at ``idx`` belongs to an abbreviation.

    Covers a stoplist of common titles and dotted initialisms, plus the
    single-capital-letter rule for personal initials. Periods inside decimal
    numbers never reach this check: a digit follows them, so the
    terminator-then-whitespace condition already fails.
    """
    token = _token_before(text, idx)
    # Drop opening punctuation such as quotes or parentheses.
    token = token.lstrip("\"'([{“‘")
    if not token:
        return False
    if len(token) == 1 and token.isalpha() and token.isupper():
        return True
    return token.lower() in _ABBREVIATIONS


def segment_sentences(document_text: str) -> list[Sentence]:
    """Split raw document text into sentences.

    A sentence ends at ``.``, ``!`` or ``?`` followed by whitespace or end of
    input, except when the period closes a known abbreviation. Whitespace
    inside each sentence is collapsed to single spaces; whitespace-only input
    yields an empty list. Sentence indices are assigned in order, so positions
    run 1..n with no gaps.
    """
    spans: list[str] = []
    start = 0
    n = len(document_text)
    for i, ch in enumerate(document_text):
        if ch not in _TERMINATORS:
            continue
        at_end = i + 1 >= n
        if not at_end and not document_text[i + 1].isspace():
            continue
        if ch == "." and _is_abbreviation_dot(document_text, i):
            continue
        spans.append(document_text[start : i + 1])
        start = i + 1
    if start < n:
        spans.append(document_text[start:])

    sentences: list[Sentence] = []
    for raw in spans:
        text = " ".join(raw.split())
        if not text:
            continue
        sentences.append(
            Sentence(
                text=text,
                sent_index=len(sentences),
                word_count=count_words(text),
                byte_length=len(text.encode("utf-8")),
            )
        )
    return sentences


def _build_document(doc_id: str, doc_index: int, text: str, origin: str) -> Document:
    sentences = segment_sentences(text)
    if not sentences:
        raise CorpusError(f"document {doc_id!r} in {origin} produced zero sentences")
    return Document(doc_id=doc_id, doc_index=doc_index, sentences=tuple(sentences))


def _load_topic_dir(topic_dir: Path) -> Topic:
    docs_dir = topic_dir / "docs"
    if not docs_dir.is_dir():
        raise CorpusError(f"topic {topic_dir.name!r} has no docs/ directory")
    doc_files = sorted(p for p in docs_dir.iterdir() if p.suffix == ".txt" and p.is_file())
    if not doc_files:
        raise CorpusError(f"topic {topic_dir.name!r} contains zero documents")

    documents = []
    for doc_index, path in enumerate(doc_files):
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise CorpusError(f"cannot read document file {path}: {exc}") from exc
        documents.append(_build_document(path.stem, doc_index, text, f"topic {topic_dir.name!r}"))

    references = []
    refs_dir = topic_dir / "refs"
    if refs_dir.is_dir():
        for path in sorted(p for p in refs_dir.iterdir() if p.suffix == ".txt" and p.is_file()):
            try:
                references.append(path.read_text(encoding="utf-8").strip())
            except OSError as exc:
                raise CorpusError(f"cannot read reference file {path}: {exc}") from exc

    return Topic(topic_id=topic_dir.name, documents=tuple(documents), references=tuple(references))


def _load_topic_record(record: dict, line_no: int) -> Topic:
    try:
        topic_id = record["topic_id"]
        raw_docs = record["documents"]
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"malformed topic record on line {line_no}: {exc}") from exc
    if not isinstance(topic_id, str) or not topic_id:
        raise CorpusError(f"topic record on line {line_no} has an empty topic_id")
    if not raw_docs:
        raise CorpusError(f"topic {topic_id!r} contains zero documents")

    documents = []
    for doc_index, raw in enumerate(raw_docs):
        try:
            doc_id = raw["doc_id"]
            text = raw["text"]
        except (KeyError, TypeError) as exc:
            raise CorpusError(f"malformed document record in topic {topic_id!r}: {exc}") from exc
        documents.append(_build_document(doc_id, doc_index, text, f"topic {topic_id!r}"))

    references = tuple(record.get("references") or ())
    return Topic(topic_id=topic_id, documents=tuple(documents), references=references)


def load_corpus(root_path: str | Path, layout: str = "topic-dirs") -> Corpus:
    """Load a corpus from disk.

    ``layout`` selects between ``topic-dirs`` and ``jsonl`` (see module
    docstring for the on-disk formats). Loading is order-stable: the same
    input always yields the same topic order and doc_index assignments.
    """
    root = Path(root_path)
    if layout == "topic-dirs":
        if not root.is_dir():
            raise CorpusError(f"corpus root {root} is not a directory")
        topic_dirs = sorted(p for p in root.iterdir() if p.is_dir())
        if not topic_dirs:
            raise CorpusError(f"no topics found under {root}")
        topics = tuple(_load_topic_dir(d) for d in topic_dirs)
    elif layout == "jsonl":
        if not root.is_file():
            raise CorpusError(f"corpus file {root} does not exist")
        topics_list = []
        with root.open(encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"invalid JSON on line {line_no} of {root}: {exc}") from exc
                topics_list.append(_load_topic_record(record, line_no))
        if not topics_list:
            raise CorpusError(f"no topics found in {root}")
        topics = tuple(topics_list)
    else:
        raise CorpusError(f"unknown corpus layout {layout!r}")

    seen: set[str] = set()
    for topic in topics:
        if topic.topic_id in seen:
            raise CorpusError(f"duplicate topic_id {topic.topic_id!r}")
        seen.add(topic.topic_id)
    return Corpus(topics=topics)
