"""Builds a tiny randomly-initialized local encoder so tests run offline."""

import os

import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

WORDS = [
    "the", "a", "cat", "dog", "sat", "ran", "on", "under", "mat", "tree",
    "big", "small", "red", "blue", "bird", "fish", "sky", "sun", "moon",
    "fast", "slow", "old", "new", "house", "river",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    model_dir = tmp_path_factory.mktemp("tiny-encoder")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"] + WORDS
    vocab_file = model_dir / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab_file))
    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=16,
        num_hidden_layers=3,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=128,
    )
    model = BertModel(config)
    model.save_pretrained(model_dir)
    tokenizer.save_pretrained(model_dir)
    return str(model_dir)


@pytest.fixture()
def corpus_100(tmp_path):
    """100 texts of varied length (1..20 words), deterministic content."""
    lines = []
    for i in range(100):
        length = (i % 20) + 1
        words = [WORDS[(i * 7 + j * 3) % len(WORDS)] for j in range(length)]
        lines.append(" ".join(words))
    path = tmp_path / "texts.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
