"""Run a pretrained contextual encoder over texts and emit embedding bundles.

Output format (one JSON object per line, UTF-8): a header
{"format_version": 1, "L": ..., "d": ...} followed by one record per input
line, {"id", "tokens", "layers"}, where layers is L x n x d. Floats are
serialized with 9 significant digits, enough to round-trip float32 hidden
states exactly, so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

import numpy as np
import torch

FORMAT_VERSION = 1


@dataclass
class ExtractionJob:
    model: str
    input_path: str
    output_path: str
    layers: list[int] | None = None  # None = all hidden states
    max_tokens: int = 512
    include_special_tokens: bool = False
    batch_size: int = 8


@dataclass
class ExtractionReport:
    records_written: int = 0
    skipped_ids: list[str] = field(default_factory=list)
    truncated_ids: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "records_written": self.records_written,
            "skipped": self.skipped_ids,
            "truncated": self.truncated_ids,
        }, indent=2)


class ExtractionError(RuntimeError):
    pass


def _load_encoder(model_id: str):
    from transformers import AutoModel, AutoTokenizer
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id, output_hidden_states=True)
    except Exception as exc:
        raise ExtractionError(f"cannot load encoder {model_id!r}: {exc}") from exc
    model.eval()
    if tokenizer.pad_token is None:
        tokenizer.pad_token = tokenizer.eos_token or tokenizer.unk_token
    return tokenizer, model


def _format_row(row) -> str:
    return "[" + ",".join(format(float(v), ".9g") for v in row) + "]"


def _format_layers(layer_arrays) -> str:
    layers = ",".join(
        "[" + ",".join(_format_row(row) for row in layer) + "]"
        for layer in layer_arrays
    )
    return "[" + layers + "]"


def _resolve_layer_indices(job: ExtractionJob, total_layers: int) -> list[int]:
    if job.layers is None:
        return list(range(total_layers))
    for idx in job.layers:
        if not 0 <= idx < total_layers:
            raise ExtractionError(
                f"layer index {idx} outside [0, {total_layers}); the encoder "
                f"reports {total_layers} hidden states"
            )
    if not job.layers:
        raise ExtractionError("layer set must be non-empty")
    return list(job.layers)


def run_extraction(job: ExtractionJob, log=None) -> ExtractionReport:
    """Extract per-layer token embeddings. One record per non-empty input
    line, in input order; the sidecar report at <output>.report.json lists
    skipped and truncated ids."""
    if log is None:
        log = lambda message: print(message, file=sys.stderr)
    tokenizer, model = _load_encoder(job.model)

    with open(job.input_path, "r", encoding="utf-8") as handle:
        texts = [(f"text-{i:06d}", line.rstrip("\n"))
                 for i, line in enumerate(handle)]
    if not texts:
        raise ExtractionError(f"input {job.input_path} is empty")

    report = ExtractionReport()
    pending = []
    for text_id, text in texts:
        if not text.strip():
            report.skipped_ids.append(text_id)
            log(f"warning: {text_id} is empty, skipped")
            continue
        pending.append((text_id, text))

    # embeddings layer + one hidden state per transformer layer
    total_layers = model.config.num_hidden_layers + 1
    hidden_size = model.config.hidden_size
    layer_indices = _resolve_layer_indices(job, total_layers)

    records = []
    for start in range(0, len(pending), job.batch_size):
        batch = pending[start:start + job.batch_size]
        batch_ids = [text_id for text_id, _ in batch]
        batch_texts = [text for _, text in batch]
        untruncated = tokenizer(batch_texts)["input_ids"]
        encoded = tokenizer(
            batch_texts,
            return_tensors="pt",
            padding=True,
            truncation=True,
            max_length=job.max_tokens,
            return_special_tokens_mask=True,
        )
        with torch.no_grad():
            output = model(
                input_ids=encoded["input_ids"],
                attention_mask=encoded["attention_mask"],
            )
        # (selected layers) x batch x seq x d, as float64 numpy
        stacked = torch.stack(
            [output.hidden_states[i] for i in layer_indices]
        ).to(torch.float64).numpy()

        for pos, text_id in enumerate(batch_ids):
            if len(untruncated[pos]) > job.max_tokens:
                report.truncated_ids.append(text_id)
            keep = encoded["attention_mask"][pos].bool()
            if not job.include_special_tokens:
                keep &= encoded["special_tokens_mask"][pos] == 0
            keep_idx = keep.nonzero(as_tuple=True)[0]
            if keep_idx.numel() == 0:
                report.skipped_ids.append(text_id)
                log(f"warning: {text_id} has no tokens after filtering, skipped")
                continue
            tokens = tokenizer.convert_ids_to_tokens(
                encoded["input_ids"][pos][keep_idx].tolist())
            tensor = stacked[:, pos, keep_idx.numpy(), :]
            if not np.all(np.isfinite(tensor)):
                raise ExtractionError(
                    f"{text_id}: encoder produced non-finite values")
            records.append((text_id, tokens, tensor))

    if report.truncated_ids:
        log(f"warning: truncated to {job.max_tokens} tokens: "
            + ", ".join(report.truncated_ids))

    with open(job.output_path, "w", encoding="utf-8") as out:
        out.write(json.dumps({
            "format_version": FORMAT_VERSION,
            "L": len(layer_indices),
            "d": hidden_size,
        }) + "\n")
        for text_id, tokens, tensor in records:
            out.write(
                '{"id": ' + json.dumps(text_id)
                + ', "tokens": ' + json.dumps(tokens, ensure_ascii=False)
                + ', "layers": ' + _format_layers(tensor) + "}\n"
            )
    report.records_written = len(records)

    with open(job.output_path + ".report.json", "w", encoding="utf-8") as out:
        out.write(report.to_json() + "\n")
    return report
