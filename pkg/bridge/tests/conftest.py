"""Session fixtures: a tiny randomly initialized dual encoder saved to a
temp directory, and bridges loaded from it.

The model is built in-process from a config (2 layers, 2 heads, 64px
images with 16px patches, 24-dim projection) with a fixed torch seed, so
no weights are ever fetched and every session sees identical parameters.
The tokenizer is a minimal printable-ASCII BPE with the usual start/end
specials; the model only needs token ids, not real subword semantics.
"""

import os

import pytest
import torch

os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("HF_HUB_OFFLINE", "1")

TINY_SEED = 20240817


def build_tiny_model_dir(target: str) -> str:
    from tokenizers import Tokenizer, models, pre_tokenizers, processors
    from transformers import (
        CLIPConfig,
        CLIPImageProcessor,
        CLIPModel,
        CLIPTextConfig,
        CLIPVisionConfig,
        PreTrainedTokenizerFast,
    )
    from transformers.utils import logging as hf_logging

    hf_logging.disable_progress_bar()

    vocab = {"<|startoftext|>": 0, "<|endoftext|>": 1}
    for code in range(32, 127):
        vocab.setdefault(chr(code), len(vocab))
    tok = Tokenizer(models.BPE(vocab=vocab, merges=[], unk_token="<|endoftext|>"))
    tok.pre_tokenizer = pre_tokenizers.Split("", "isolated")
    tok.post_processor = processors.TemplateProcessing(
        single="<|startoftext|> $A <|endoftext|>",
        special_tokens=[("<|startoftext|>", 0), ("<|endoftext|>", 1)],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        bos_token="<|startoftext|>",
        eos_token="<|endoftext|>",
        unk_token="<|endoftext|>",
        pad_token="<|endoftext|>",
        model_max_length=77,
    )

    torch.manual_seed(TINY_SEED)
    config = CLIPConfig(
        text_config=CLIPTextConfig(
            vocab_size=len(vocab),
            hidden_size=32,
            intermediate_size=64,
            num_hidden_layers=2,
            num_attention_heads=2,
            max_position_embeddings=77,
            bos_token_id=0,
            eos_token_id=1,
        ),
        vision_config=CLIPVisionConfig(
            hidden_size=32,
            intermediate_size=64,
            num_hidden_layers=2,
            num_attention_heads=2,
            image_size=64,
            patch_size=16,
        ),
        projection_dim=24,
    )
    model = CLIPModel(config)
    processor = CLIPImageProcessor(
        size={"shortest_edge": 64}, crop_size={"height": 64, "width": 64}
    )
    model.save_pretrained(target)
    processor.save_pretrained(target)
    tokenizer.save_pretrained(target)
    return target


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    return build_tiny_model_dir(str(tmp_path_factory.mktemp("tiny-clip")))


@pytest.fixture(scope="session")
def bridge(tiny_model_dir):
    from tzr_bridge import BridgeConfig, ClipBridge

    return ClipBridge(BridgeConfig(model=tiny_model_dir))


@pytest.fixture(scope="session")
def bridge_client(bridge):
    from fastapi.testclient import TestClient

    from tzr_bridge import build_app

    with TestClient(build_app(bridge)) as client:
        yield client


@pytest.fixture(scope="session")
def test_encoder_client():
    """The engine's built-in deterministic encoder, served over the same
    wire protocol, as the second conformance backend."""
    from fastapi.testclient import TestClient

    from tzr import TestEncoder, build_encoder_app

    with TestClient(build_encoder_app(TestEncoder())) as client:
        yield client
