"""Reference implementation of the encoder wire protocol, backed by a real
vision-language dual encoder so the retrieval engine can run on real
images. Point the engine at it with TZR_ENCODER_URL=http://host:port."""

from .attention import DERIVATIONS, cls_attention_last_layer, cls_attention_rollout, to_heatmap
from .config import ATTENTION_METHODS, BridgeConfig, load_config
from .model import BridgeError, BridgeInfo, ClipBridge
from .server import build_app, serve

__version__ = "0.1.0"

__all__ = [
    "ATTENTION_METHODS",
    "BridgeConfig",
    "BridgeError",
    "BridgeInfo",
    "ClipBridge",
    "DERIVATIONS",
    "build_app",
    "cls_attention_last_layer",
    "cls_attention_rollout",
    "load_config",
    "serve",
    "to_heatmap",
]
