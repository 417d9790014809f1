"""Hyperparameters of the character-level translation model.

The defaults are the production configuration: 256-dim character
embeddings, 688 convolution filters spread over widths 1..7, max-pooling
every 5 positions, a 2-layer highway block, a bidirectional gated
recurrent encoder, and a 2-layer attentional decoder trained with ADAM
(batch 32, initial learning rate 1e-3, halved when dev loss rises).
Smaller configurations are legal and are what the test suite trains.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields


@dataclass(frozen=True)
class ModelConfig:
    embed_dim: int = 256
    conv_filter_counts: tuple[int, ...] = (16, 32, 64, 64, 128, 128, 256)
    conv_filter_widths: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7)
    pool_interval: int = 5
    highway_layers: int = 2
    encoder_hidden: int = 256
    decoder_layers: int = 2
    decoder_hidden: int = 512
    attention_dim: int = 256
    batch_size: int = 32
    initial_lr: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    max_decode_factor: int = 4
    max_decode_slack: int = 10
    max_epochs: int = 50
    min_lr: float = 1e-6
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "conv_filter_counts", tuple(self.conv_filter_counts)
        )
        object.__setattr__(
            self, "conv_filter_widths", tuple(self.conv_filter_widths)
        )
        if len(self.conv_filter_counts) != len(self.conv_filter_widths):
            raise ValueError("conv filter counts and widths must pair up")
        if not self.conv_filter_counts:
            raise ValueError("need at least one convolution filter group")
        dims = (
            self.embed_dim,
            *self.conv_filter_counts,
            *self.conv_filter_widths,
            self.encoder_hidden,
            self.decoder_hidden,
            self.attention_dim,
            self.batch_size,
        )
        if any(d < 1 for d in dims):
            raise ValueError("all dimensions must be positive")
        if self.pool_interval < 1:
            raise ValueError("pool_interval must be >= 1")
        if self.highway_layers < 0:
            raise ValueError("highway_layers must be >= 0")
        if self.decoder_layers < 1:
            raise ValueError("decoder_layers must be >= 1")

    @property
    def total_filters(self) -> int:
        return sum(self.conv_filter_counts)

    @classmethod
    def from_dict(cls, overrides: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**overrides)
