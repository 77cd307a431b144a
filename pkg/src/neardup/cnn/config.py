"""Network and training configuration."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ModelConfig:
    """Architecture of the 6-channel pair network.

    Five conv blocks followed by a single-neuron fully connected layer and
    a sigmoid. The first conv runs at stride 4 and skips batch norm; blocks
    1-4 subsample 2x2; the last conv feeds the FC layer directly (no norm,
    activation or pooling). ``pool_layers`` is per-block so reduced test
    configurations stay valid.
    """

    input_size: int = 128
    in_channels: int = 6
    filters: tuple = (64, 32, 16, 6, 1)
    kernel_size: int = 3
    strides: tuple = (4, 1, 1, 1, 1)
    pool_layers: tuple = (True, True, True, True, False)
    pool_kind: str = "max"  # or "avg"
    leaky_slope: float = 0.2
    batchnorm_eps: float = 1e-5
    batchnorm_momentum: float = 0.1
    dtype: str = "float32"

    def __post_init__(self):
        if len(self.filters) != 5:
            raise ValueError("exactly 5 conv layers required")
        if self.filters[-1] != 1:
            raise ValueError("last conv layer must have 1 filter")
        if len(self.strides) != 5 or len(self.pool_layers) != 5:
            raise ValueError("strides and pool_layers must have 5 entries")
        if self.pool_kind not in ("max", "avg"):
            raise ValueError("pool_kind must be 'max' or 'avg'")

    # batch norm on all conv layers except the first and the last
    @property
    def bn_layers(self) -> tuple:
        return (False, True, True, True, False)

    # LeakyReLU on all conv layers except the last
    @property
    def act_layers(self) -> tuple:
        return (True, True, True, True, False)

    def feature_sizes(self) -> list[int]:
        """Spatial size after each block (post-pool)."""
        s = self.input_size
        sizes = []
        k = self.kernel_size
        for stride, pooled in zip(self.strides, self.pool_layers):
            s = (s + 2 - k) // stride + 1  # pad 1
            if pooled:
                s = s // 2
            if s < 1:
                raise ValueError("feature map collapsed below 1x1; adjust config")
            sizes.append(s)
        return sizes

    @property
    def fc_inputs(self) -> int:
        return self.filters[-1] * self.feature_sizes()[-1] ** 2


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 35
    batch_size: int = 16
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rng_seed: int = 0
    checkpoint_every: int | None = None

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
