"""Bridge configuration: which model to serve, on what device, with which
attention derivation, and where to bind."""

import json
from dataclasses import dataclass, fields

ATTENTION_METHODS = ("last_layer_cls_mean_heads", "rollout")


@dataclass(frozen=True)
class BridgeConfig:
    """Everything the bridge needs to come up.

    `model` is a Hugging Face model id or a local directory holding a
    saved dual encoder (model, tokenizer, and image processor).
    """

    model: str
    device: str = "cpu"
    attention: str = "last_layer_cls_mean_heads"
    host: str = "127.0.0.1"
    port: int = 8100

    def __post_init__(self):
        if not self.model:
            raise ValueError("model identifier must be nonempty")
        if not self.device:
            raise ValueError("device must be nonempty")
        if self.attention not in ATTENTION_METHODS:
            raise ValueError(
                f"attention must be one of {ATTENTION_METHODS}, got {self.attention!r}"
            )
        if not (1 <= self.port <= 65535):
            raise ValueError("port must lie in 1..65535")


def load_config(path=None, **overrides) -> BridgeConfig:
    """Build a config from an optional JSON file plus keyword overrides.

    Flags beat the file: any override that is not None replaces the file
    value. Unknown keys in the file are rejected rather than ignored.
    """
    known = {f.name for f in fields(BridgeConfig)}
    merged: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(data)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if "model" not in merged:
        raise ValueError("no model identifier given (flag or config file)")
    return BridgeConfig(**merged)
