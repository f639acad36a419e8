"""Python bindings for the filler-gap dependency toolkit."""

import json

from . import _fgd
from ._fgd import (
    BracketParseError,
    CorpusError,
    __version__,
    family_of,
    gold_labels,
    labels,
    log_ratio,
    normalize_tree,
    tree_leaves,
    wilson,
)


def detect(record, embedding_verbs=()):
    """Detect labels on one corpus record (dict or JSON text)."""
    text = record if isinstance(record, str) else json.dumps(record)
    return json.loads(_fgd.detect(text, list(embedding_verbs)))


def score_pairs(items, scores):
    """Accuracy over minimal-pair items given {"request_id", "logprob"} records."""
    def jsonl(rows):
        return rows if isinstance(rows, str) else "\n".join(json.dumps(r) for r in rows)
    return _fgd.score_pairs(jsonl(items), jsonl(scores))


__all__ = [
    "BracketParseError",
    "CorpusError",
    "__version__",
    "detect",
    "family_of",
    "gold_labels",
    "labels",
    "log_ratio",
    "normalize_tree",
    "score_pairs",
    "tree_leaves",
    "wilson",
]
