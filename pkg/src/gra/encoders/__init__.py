"""GCN, GAT and simplicial encoders producing the representations an attacker sees."""

from dataclasses import dataclass

from ..exceptions import ConfigError
from ._base import (Representations, cross_entropy_loss, glorot_uniform, softmax)
from .gat import GATEncoder, gat_attention, gat_forward
from .gcn import GCNEncoder, gcn_forward
from .snn import SNN_MODES, SNNEncoder, snn_forward, snn_operator

MODELS = ("gcn", "gat", "snn")


@dataclass(frozen=True)
class EncoderConfig:
    model: str = "gcn"
    hidden_dim: int = None
    heads: int = 8
    snn_mode: str = "edge-lifted-d1"
    q_norm: str = "abs"
    activation: str = "relu"
    output_layer: str = "post-activation"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.hidden_dim is not None and self.hidden_dim < 1:
            raise ConfigError("hidden_dim must be >= 1")
        if self.heads < 1:
            raise ConfigError("heads must be >= 1")
        if self.snn_mode not in SNN_MODES:
            raise ConfigError(f"snn_mode must be one of {SNN_MODES}")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.01
    weight_decay: float = 5e-4
    seed: int = 0
    optimizer: str = "adam"

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")


def make_encoder(encoder_config=None, train_config=None):
    """Instantiate the estimator described by the two configs."""
    ec = encoder_config or EncoderConfig()
    tc = train_config or TrainConfig()
    common = dict(activation=ec.activation, output_layer=ec.output_layer, epochs=tc.epochs,
                  learning_rate=tc.learning_rate, weight_decay=tc.weight_decay,
                  optimizer=tc.optimizer, random_state=tc.seed)
    if ec.model == "gcn":
        return GCNEncoder(hidden_dim=ec.hidden_dim or 16, **common)
    if ec.model == "gat":
        return GATEncoder(hidden_dim=ec.hidden_dim or 8, heads=ec.heads, **common)
    return SNNEncoder(hidden_dim=ec.hidden_dim or 16, snn_mode=ec.snn_mode,
                      q_norm=ec.q_norm, **common)


def train_encoder(bundle, encoder_config=None, train_config=None):
    """Fit on the bundle's training mask; return ``(params, representations, encoder)``."""
    enc = make_encoder(encoder_config, train_config)
    enc.fit(bundle.features, bundle.labels, graph=bundle.graph, train_mask=bundle.train_mask)
    reps = enc.representations(bundle.features, graph=bundle.graph)
    return enc.params_, reps, enc


def gradients(encoder, params, bundle, mask=None):
    """Exact gradients of the masked cross-entropy (no weight decay) for every parameter."""
    mask = bundle.train_mask if mask is None else mask
    _, grads = encoder.loss_and_gradients(params, bundle.features, bundle.labels,
                                          graph=bundle.graph, mask=mask)
    return grads


__all__ = [
    "EncoderConfig", "GATEncoder", "GCNEncoder", "MODELS", "Representations", "SNNEncoder",
    "TrainConfig", "cross_entropy_loss", "gat_attention", "gat_forward", "gcn_forward",
    "glorot_uniform", "gradients", "make_encoder", "snn_forward", "snn_operator", "softmax",
    "train_encoder",
]
