"""Embedding bundles, IDF tables, and per-layer token measures.

Bundle file format (UTF-8, line-delimited JSON): the first line is a header
object {"format_version": 1, "L": ..., "d": ...}; every following line is a
record {"id": str, "tokens": [n strings], "layers": L x n x d numbers}.
Scientific-notation floats are accepted. All records must match the header's
L and d.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCorpus,
    ParseError,
    SchemaError,
)
from .measures import DiscreteMeasure

FORMAT_VERSION = 1


@dataclass
class LayeredEmbedding:
    """One text's tokens with their L x n x d per-layer embeddings."""

    text_id: str
    tokens: list[str]
    tensor: np.ndarray

    def __post_init__(self):
        tensor = np.asarray(self.tensor, dtype=np.float64)
        if tensor.ndim != 3:
            raise SchemaError(
                f"record {self.text_id!r}: tensor must be L x n x d, "
                f"got shape {tensor.shape}"
            )
        n_layers, n_tokens, dim = tensor.shape
        if n_layers < 1 or n_tokens < 1 or dim < 1:
            raise SchemaError(
                f"record {self.text_id!r}: empty axis in shape {tensor.shape}"
            )
        if len(self.tokens) != n_tokens:
            raise SchemaError(
                f"record {self.text_id!r}: {len(self.tokens)} tokens but "
                f"{n_tokens} embedding rows"
            )
        if not np.all(np.isfinite(tensor)):
            layer = int(np.argwhere(~np.isfinite(tensor))[0][0])
            raise SchemaError(
                f"record {self.text_id!r}: non-finite value in layer {layer}"
            )
        self.tensor = tensor

    @property
    def n_layers(self) -> int:
        return self.tensor.shape[0]

    @property
    def n_tokens(self) -> int:
        return self.tensor.shape[1]

    @property
    def dim(self) -> int:
        return self.tensor.shape[2]


@dataclass
class IdfTable:
    """Smoothed inverse document frequencies: ln((1+N)/(1+df)) + 1.

    Strictly positive, so IDF values are valid point masses. Tokens never
    seen in the corpus fall back to default_idf (the df = 0 value).
    """

    doc_count: int
    entries: dict[str, float]
    default_idf: float

    def __post_init__(self):
        if self.doc_count < 1:
            raise EmptyCorpus("IDF table requires a positive document count")
        if self.default_idf <= 0 or any(v <= 0 for v in self.entries.values()):
            raise SchemaError("idf values must be strictly positive")

    def idf(self, token: str) -> float:
        return self.entries.get(token, self.default_idf)

    def weights_for(self, tokens) -> np.ndarray:
        """IDF masses for a token sequence, normalized to sum to 1."""
        raw = np.array([self.idf(tok) for tok in tokens], dtype=np.float64)
        return raw / raw.sum()


@dataclass
class MeasureBundle:
    """One text's L layer measures; identical weights across layers."""

    layer_measures: list[DiscreteMeasure]

    def __post_init__(self):
        if not self.layer_measures:
            raise SchemaError("a measure bundle needs at least one layer")
        first = self.layer_measures[0]
        for idx, measure in enumerate(self.layer_measures[1:], start=1):
            if measure.size != first.size or measure.dim != first.dim:
                raise DimensionMismatch(
                    f"layer {idx} has shape ({measure.size}, {measure.dim}), "
                    f"layer 0 has ({first.size}, {first.dim})"
                )
            if not np.array_equal(measure.weights, first.weights):
                raise SchemaError("layer weights differ across layers")

    @property
    def n_layers(self) -> int:
        return len(self.layer_measures)


def compute_idf(documents) -> IdfTable:
    """IDF table over tokenized documents (document = list of tokens).

    Invariant to document order and within-document repetition; a token in
    all N documents gets the table minimum, exactly 1.0.
    """
    documents = list(documents)
    if not documents:
        raise EmptyCorpus("IDF needs at least one document")
    n_docs = len(documents)
    doc_freq: dict[str, int] = {}
    for doc in documents:
        for token in set(doc):
            doc_freq[token] = doc_freq.get(token, 0) + 1
    entries = {
        token: math.log((1 + n_docs) / (1 + df)) + 1.0
        for token, df in doc_freq.items()
    }
    return IdfTable(
        doc_count=n_docs,
        entries=entries,
        default_idf=math.log(1 + n_docs) + 1.0,
    )


def build_measures(emb: LayeredEmbedding, idf: IdfTable | None,
                   weighting: str = "idf") -> MeasureBundle:
    """The L empirical measures of one text: layer l's support is the token
    embedding rows of layer l; the weight vector is shared across layers.

    weighting='idf' uses normalized IDF masses (every token kept, no
    filtering); weighting='uniform' uses 1/n.
    """
    if weighting == "idf":
        if idf is None:
            raise ValueError("idf weighting requires an IdfTable")
        weights = idf.weights_for(emb.tokens)
    elif weighting == "uniform":
        weights = np.full(emb.n_tokens, 1.0 / emb.n_tokens)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    measures = [
        DiscreteMeasure(emb.tensor[layer], weights)
        for layer in range(emb.n_layers)
    ]
    return MeasureBundle(measures)


# ---------------------------------------------------------------------------
# Bundle file IO
# ---------------------------------------------------------------------------

def _parse_header(line: str):
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in header: {exc.msg}", line_no=1) from exc
    if not isinstance(header, dict) or "format_version" not in header:
        raise ParseError("first line must be the bundle header object", line_no=1)
    if header.get("format_version") != FORMAT_VERSION:
        raise SchemaError(
            f"unsupported format_version {header.get('format_version')!r}"
        )
    try:
        n_layers = int(header["L"])
        dim = int(header["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("header must carry integer L and d", line_no=1) from exc
    if n_layers < 1 or dim < 1:
        raise SchemaError(f"header L={n_layers}, d={dim} must be positive")
    return n_layers, dim


def _record_to_embedding(obj, n_layers, dim, line_no) -> LayeredEmbedding:
    if not isinstance(obj, dict):
        raise ParseError("record is not an object", line_no=line_no)
    for key in ("id", "tokens", "layers"):
        if key not in obj:
            raise ParseError(f"record missing field {key!r}", line_no=line_no)
    text_id = obj["id"]
    tokens = obj["tokens"]
    layers = obj["layers"]
    if not isinstance(text_id, str):
        raise SchemaError(f"line {line_no}: id must be a string")
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise SchemaError(f"record {text_id!r}: tokens must be a list of strings")
    if len(tokens) < 1:
        raise SchemaError(f"record {text_id!r}: empty token list")
    if not isinstance(layers, list) or len(layers) != n_layers:
        raise SchemaError(
            f"record {text_id!r}: expected {n_layers} layers, "
            f"got {len(layers) if isinstance(layers, list) else 'non-list'}"
        )
    n_tokens = len(tokens)
    for l_idx, layer in enumerate(layers):
        if not isinstance(layer, list) or len(layer) != n_tokens:
            raise SchemaError(
                f"record {text_id!r}: ragged layer {l_idx} "
                f"({len(layer) if isinstance(layer, list) else 'non-list'} rows "
                f"for {n_tokens} tokens)"
            )
        for row in layer:
            if not isinstance(row, list) or len(row) != dim:
                raise SchemaError(
                    f"record {text_id!r}: layer {l_idx} row of width "
                    f"{len(row) if isinstance(row, list) else 'non-list'}, "
                    f"expected d={dim}"
                )
    tensor = np.asarray(layers, dtype=np.float64)
    return LayeredEmbedding(text_id=text_id, tokens=list(tokens), tensor=tensor)


def iter_bundle(path):
    """Yield LayeredEmbedding records from a bundle file, validating as it goes."""
    with open(path, "r", encoding="utf-8") as handle:
        first = handle.readline()
        if not first.strip():
            raise ParseError("missing bundle header", line_no=1)
        n_layers, dim = _parse_header(first)
        for line_no, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(
                    f"invalid JSON: {exc.msg}", line_no=line_no
                ) from exc
            yield _record_to_embedding(obj, n_layers, dim, line_no)


def read_header(path):
    """(L, d) from a bundle file without materializing any record."""
    with open(path, "r", encoding="utf-8") as handle:
        first = handle.readline()
        if not first.strip():
            raise ParseError("missing bundle header", line_no=1)
        return _parse_header(first)


def load_bundle(path) -> list[LayeredEmbedding]:
    """All records of a bundle file, in file order."""
    return list(iter_bundle(path))


def write_bundle(path, embeddings) -> None:
    """Write records in the bundle format. repr-based float serialization
    round-trips exactly, so write-then-load is bit-for-bit stable."""
    embeddings = list(embeddings)
    if not embeddings:
        raise SchemaError("cannot write an empty bundle")
    n_layers = embeddings[0].n_layers
    dim = embeddings[0].dim
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(
            json.dumps({"format_version": FORMAT_VERSION, "L": n_layers, "d": dim})
            + "\n"
        )
        for emb in embeddings:
            if emb.n_layers != n_layers or emb.dim != dim:
                raise DimensionMismatch(
                    f"record {emb.text_id!r} has L={emb.n_layers}, d={emb.dim}; "
                    f"bundle header says L={n_layers}, d={dim}"
                )
            record = {
                "id": emb.text_id,
                "tokens": emb.tokens,
                "layers": emb.tensor.tolist(),
            }
            handle.write(json.dumps(record) + "\n")
