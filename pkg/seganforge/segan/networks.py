"""Generator and discriminator networks built from tensorgrad ops"""

from collections.abc import Mapping

import numpy as np

from seganforge.exceptions import ArchitectureMismatchError, ShapeError
from seganforge.models.schemas import DiscriminatorConfig, GeneratorConfig
from seganforge.tensorgrad import (
    Parameter,
    Tensor,
    concat_channels,
    conv1d,
    conv_transpose1d,
    get_default_dtype,
    leaky_relu,
    parameter,
    prelu,
    reshape,
    tanh,
)

Shape = tuple[int, ...]


def generator_parameter_shapes(config: GeneratorConfig) -> dict[str, Shape]:
    """
    Expected parameter names and shapes, in creation order.

    Encoder layer i maps ch[i-1] -> ch[i] channels (ch[-1] = 1 for the waveform). Decoder layer j
    reads the concatenation of the previous output and the mirrored skip, 2 * ch[n-1-j] channels,
    and writes the input width of encoder layer n-1-j.
    """
    channels = config.encoder_channels
    n = config.n_layers
    kernel = config.kernel_width
    shapes: dict[str, Shape] = {}
    c_in = 1
    for i, c_out in enumerate(channels):
        shapes[f"g.enc.{i}.weight"] = (c_out, c_in, kernel)
        shapes[f"g.enc.{i}.bias"] = (c_out,)
        shapes[f"g.enc.{i}.alpha"] = (c_out,)
        c_in = c_out
    for j in range(n):
        dec_in = 2 * channels[n - 1 - j]
        dec_out = channels[n - 2 - j] if j < n - 1 else 1
        shapes[f"g.dec.{j}.weight"] = (dec_in, dec_out, kernel)
        shapes[f"g.dec.{j}.bias"] = (dec_out,)
        if j < n - 1:
            shapes[f"g.dec.{j}.alpha"] = (dec_out,)
    return shapes


def discriminator_parameter_shapes(config: DiscriminatorConfig) -> dict[str, Shape]:
    kernel = config.kernel_width
    shapes: dict[str, Shape] = {}
    c_in = 2
    for i, c_out in enumerate(config.channels):
        shapes[f"d.conv.{i}.weight"] = (c_out, c_in, kernel)
        shapes[f"d.conv.{i}.bias"] = (c_out,)
        c_in = c_out
    shapes["d.squeeze.weight"] = (1, c_in, 1)
    shapes["d.squeeze.bias"] = (1,)
    shapes["d.fc.weight"] = (1, 1, config.output_length)
    shapes["d.fc.bias"] = (1,)
    return shapes


def _initial_value(name: str, shape: Shape, rng: np.random.Generator) -> np.ndarray:
    if name.endswith((".bias", ".alpha")):
        return np.zeros(shape)
    # Glorot uniform over the receptive field
    if name.startswith("g.dec."):
        fan_in, fan_out = shape[0] * shape[2], shape[1] * shape[2]
    else:
        fan_in, fan_out = shape[1] * shape[2], shape[0] * shape[2]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Network:
    """Ordered set of named parameters"""

    def __init__(self, shapes: Mapping[str, Shape], rng: np.random.Generator):
        self.shapes = dict(shapes)
        self.parameters: dict[str, Parameter] = {
            name: parameter(name, _initial_value(name, shape, rng)) for name, shape in self.shapes.items()
        }

    def __getitem__(self, name: str) -> Tensor:
        return self.parameters[name].tensor

    def parameter_list(self) -> list[Parameter]:
        return list(self.parameters.values())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: param.data.copy() for name, param in self.parameters.items()}

    def load_state_dict(self, arrays: Mapping[str, np.ndarray]) -> None:
        """
        Replace every parameter value.

        Raises:
            ArchitectureMismatchError: Missing, unexpected or wrongly shaped arrays
        """
        missing = sorted(set(self.shapes) - set(arrays))
        unexpected = sorted(set(arrays) - set(self.shapes))
        if missing or unexpected:
            raise ArchitectureMismatchError(
                f"Parameter names differ | missing={missing[:5]} | unexpected={unexpected[:5]}"
            )
        for name, shape in self.shapes.items():
            value = np.asarray(arrays[name])
            if value.shape != shape:
                raise ArchitectureMismatchError(
                    f"Parameter shape mismatch | name={name} | expected={shape} | got={value.shape}"
                )
            tensor = self.parameters[name].tensor
            tensor.data = np.array(value, dtype=get_default_dtype())
            tensor.grad = None

    def set_trainable(self, trainable: bool) -> None:
        for param in self.parameters.values():
            param.tensor.requires_grad = trainable
            param.tensor.grad = None


class Generator(Network):
    """Strided-conv encoder, latent concatenation with z, transposed-conv decoder with skips"""

    def __init__(self, config: GeneratorConfig, rng: np.random.Generator | None = None):
        self.config = config
        super().__init__(generator_parameter_shapes(config), rng or np.random.default_rng(0))

    def encode(self, x_tilde: Tensor) -> tuple[Tensor, list[Tensor]]:
        """Encoder output c and every intermediate feature map (the skip sources)"""
        cfg = self.config
        if x_tilde.data.ndim != 3 or x_tilde.shape[1] != 1:
            raise ShapeError(f"Generator input must be [B, 1, W], got {x_tilde.shape}")
        if x_tilde.shape[2] % cfg.stride**cfg.n_layers != 0:
            raise ShapeError(
                f"Generator input length {x_tilde.shape[2]} not divisible by "
                f"{cfg.stride**cfg.n_layers}"
            )
        h = x_tilde
        features: list[Tensor] = []
        for i in range(cfg.n_layers):
            h = conv1d(h, self[f"g.enc.{i}.weight"], self[f"g.enc.{i}.bias"], cfg.stride, cfg.padding)
            h = prelu(h, self[f"g.enc.{i}.alpha"])
            features.append(h)
        return h, features

    def forward(self, x_tilde: Tensor, z: Tensor) -> Tensor:
        cfg = self.config
        n = cfg.n_layers
        c, features = self.encode(x_tilde)
        if z.shape != c.shape:
            raise ShapeError(f"z shape {z.shape} does not match encoder output {c.shape}")
        h = concat_channels(c, z)
        for j in range(n):
            h = conv_transpose1d(
                h,
                self[f"g.dec.{j}.weight"],
                self[f"g.dec.{j}.bias"],
                cfg.stride,
                cfg.padding,
                cfg.output_padding,
            )
            if j < n - 1:
                h = prelu(h, self[f"g.dec.{j}.alpha"])
                h = concat_channels(h, features[n - 2 - j])
            else:
                h = tanh(h)
        return h

    def sample_z(self, batch: int, rng: np.random.Generator) -> Tensor:
        return Tensor(rng.standard_normal((batch, *self.config.z_dims)))


class Discriminator(Network):
    """Scores a candidate waveform conditioned on the noisy input"""

    def __init__(self, config: DiscriminatorConfig, rng: np.random.Generator | None = None):
        self.config = config
        super().__init__(discriminator_parameter_shapes(config), rng or np.random.default_rng(0))

    def forward(self, candidate: Tensor, x_tilde: Tensor) -> Tensor:
        cfg = self.config
        if candidate.shape != x_tilde.shape:
            raise ShapeError(
                f"Discriminator inputs differ in shape: {candidate.shape} vs {x_tilde.shape}"
            )
        if candidate.data.ndim != 3 or candidate.shape[1] != 1 or candidate.shape[2] != cfg.window_len:
            raise ShapeError(f"Discriminator input must be [B, 1, {cfg.window_len}], got {candidate.shape}")
        batch = candidate.shape[0]
        h = concat_channels(candidate, x_tilde)
        for i in range(len(cfg.channels)):
            h = conv1d(h, self[f"d.conv.{i}.weight"], self[f"d.conv.{i}.bias"], cfg.stride, cfg.padding)
            h = leaky_relu(h, cfg.leaky_slope)
        h = conv1d(h, self["d.squeeze.weight"], self["d.squeeze.bias"])
        # linear reduction over the remaining time axis
        h = conv1d(h, self["d.fc.weight"], self["d.fc.bias"])
        return reshape(h, (batch, 1))


def generator_forward(generator: Generator, x_tilde: Tensor, z: Tensor) -> Tensor:
    return generator.forward(x_tilde, z)


def discriminator_forward(discriminator: Discriminator, candidate: Tensor, x_tilde: Tensor) -> Tensor:
    return discriminator.forward(candidate, x_tilde)
