"""Network topologies: gated 1-D generators and 2-D patch discriminators.

Generators preserve the channels x frames shape: an input convolution, two
stride-2 downsampling stages, residual blocks at the bottleneck, two
nearest-neighbour upsampling stages, and a raw output convolution. Hidden
layers are instance-normalized and gated; the output layer is linear.
Discriminators stack four stride-(2,2) 2-D convolutions over the feature
map viewed as a one-channel image and emit a grid of raw patch scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from prosodia.errors import ValidationError
from prosodia.nn.tensor import (
    Tensor,
    add,
    conv1d,
    conv2d,
    glu,
    instance_norm,
    leaky_relu,
    upsample2,
)

GENERATOR_KIND = "generator-1d"
DISCRIMINATOR_KIND = "discriminator-2d"

GEN_KERNELS = (15, 5, 3, 5, 15)  # input, downsample, residual, upsample, output
DISC_KERNEL = (3, 4)


@dataclass(frozen=True)
class NetworkConfig:
    kind: str
    in_channels: int
    base_channels: int = 32
    n_downsample: int = 2
    n_residual: int = 4
    n_upsample: int = 2
    kernel_sizes: tuple = GEN_KERNELS

    def __post_init__(self):
        if self.kind not in (GENERATOR_KIND, DISCRIMINATOR_KIND):
            raise ValidationError(f"unknown network kind {self.kind!r}")
        if self.in_channels < 1 or self.base_channels < 1:
            raise ValidationError("channel counts must be >= 1")
        if self.kind == GENERATOR_KIND:
            if self.n_downsample != self.n_upsample:
                raise ValidationError(
                    "generators must have n_downsample == n_upsample "
                    f"(got {self.n_downsample}/{self.n_upsample})"
                )
            if len(self.kernel_sizes) != 5:
                raise ValidationError("generator kernel_sizes must list 5 entries")
        object.__setattr__(self, "kernel_sizes", tuple(self.kernel_sizes))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "in_channels": self.in_channels,
            "base_channels": self.base_channels,
            "n_downsample": self.n_downsample,
            "n_residual": self.n_residual,
            "n_upsample": self.n_upsample,
            "kernel_sizes": list(self.kernel_sizes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        return cls(
            kind=d["kind"],
            in_channels=int(d["in_channels"]),
            base_channels=int(d["base_channels"]),
            n_downsample=int(d["n_downsample"]),
            n_residual=int(d["n_residual"]),
            n_upsample=int(d["n_upsample"]),
            kernel_sizes=tuple(
                tuple(k) if isinstance(k, list) else k for k in d["kernel_sizes"]
            ),
        )


def generator_config(in_channels: int, base_channels: int = 32, n_residual: int = 4) -> NetworkConfig:
    return NetworkConfig(
        kind=GENERATOR_KIND,
        in_channels=in_channels,
        base_channels=base_channels,
        n_residual=n_residual,
    )


def discriminator_config(in_channels: int, base_channels: int = 32) -> NetworkConfig:
    """``in_channels`` is the feature-map height (the conv sees 1 channel)."""
    return NetworkConfig(
        kind=DISCRIMINATOR_KIND,
        in_channels=in_channels,
        base_channels=base_channels,
        n_downsample=4,
        n_residual=0,
        n_upsample=0,
        kernel_sizes=(DISC_KERNEL,) * 4,
    )


class ParamStore:
    """Named, insertion-ordered map of trainable tensors."""

    def __init__(self, params: dict, rng_seed: int):
        self.params = params
        self.rng_seed = rng_seed

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __iter__(self):
        return iter(self.params.items())

    def __len__(self):
        return len(self.params)

    def names(self):
        return list(self.params.keys())

    def clear_grads(self) -> None:
        for p in self.params.values():
            p.grad = None

    def n_values(self) -> int:
        return sum(p.values.size for p in self.params.values())


def _gen_widths(config: NetworkConfig) -> list[int]:
    """Channel widths after the input conv and each downsampling stage."""
    b = config.base_channels
    return [b] + [min(b * 2**j, 2 * b) for j in range(1, config.n_downsample + 1)]


def _disc_widths(config: NetworkConfig) -> list[int]:
    b = config.base_channels
    return [b, 2 * b, 4 * b, 1]


def init_params(config: NetworkConfig, seed: int) -> ParamStore:
    """Fan-in-scaled Gaussian weights, zero biases, unit norm gains."""
    rng = np.random.default_rng(seed)
    params: dict[str, Tensor] = {}

    def conv_w(name, c_out, c_in, *kernel, bias=True):
        # Convolutions feeding a norm layer are bias-free: the norm removes
        # per-channel means, so such a bias would have an identically zero
        # gradient.
        fan_in = c_in * int(np.prod(kernel))
        w = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(c_out, c_in, *kernel))
        params[f"{name}.w"] = Tensor(w, requires_grad=True)
        if bias:
            params[f"{name}.b"] = Tensor(np.zeros(c_out), requires_grad=True)

    def norm(name, channels):
        params[f"{name}.gain"] = Tensor(np.ones(channels), requires_grad=True)
        params[f"{name}.bias"] = Tensor(np.zeros(channels), requires_grad=True)

    if config.kind == GENERATOR_KIND:
        k_in, k_down, k_res, k_up, k_out = config.kernel_sizes
        widths = _gen_widths(config)
        conv_w("in", 2 * widths[0], config.in_channels, k_in, bias=False)
        norm("in.norm", 2 * widths[0])
        for j in range(1, config.n_downsample + 1):
            conv_w(f"down{j}", 2 * widths[j], widths[j - 1], k_down, bias=False)
            norm(f"down{j}.norm", 2 * widths[j])
        bottleneck = widths[-1]
        for r in range(1, config.n_residual + 1):
            conv_w(f"res{r}.conv1", 2 * bottleneck, bottleneck, k_res, bias=False)
            norm(f"res{r}.norm1", 2 * bottleneck)
            conv_w(f"res{r}.conv2", bottleneck, bottleneck, k_res, bias=False)
            norm(f"res{r}.norm2", bottleneck)
        for j in range(1, config.n_upsample + 1):
            c_in = widths[config.n_upsample - j + 1]
            c_out = widths[config.n_upsample - j]
            conv_w(f"up{j}", 2 * c_out, c_in, k_up, bias=False)
            norm(f"up{j}.norm", 2 * c_out)
        conv_w("out", config.in_channels, widths[0], k_out)
    else:
        # No norm on the first layer: scale information must reach the patch
        # scores or the adversarial objective cannot match feature magnitudes.
        widths = _disc_widths(config)
        c_prev = 1
        for j, c_out in enumerate(widths, start=1):
            kh, kw = config.kernel_sizes[j - 1]
            conv_w(f"layer{j}", c_out, c_prev, kh, kw, bias=j in (1, len(widths)))
            if 1 < j < len(widths):
                norm(f"layer{j}.norm", c_out)
            c_prev = c_out
    return ParamStore(params, rng_seed=seed)


def forward_generator(params: ParamStore, config: NetworkConfig, x: Tensor) -> Tensor:
    """Shape-preserving generator forward over a [channels, frames] tensor."""
    if config.kind != GENERATOR_KIND:
        raise ValidationError(f"forward_generator needs a generator config, got {config.kind}")
    if x.values.ndim != 2 or x.shape[0] != config.in_channels:
        raise ValidationError(
            f"generator input must be [{config.in_channels}, frames], got {x.shape}"
        )
    frames = x.shape[1]
    factor = 2**config.n_downsample
    if frames < factor or frames % factor:
        raise ValidationError(
            f"generator frame count must be a positive multiple of {factor}, got {frames}"
        )
    k_in, k_down, k_res, k_up, k_out = config.kernel_sizes

    h = conv1d(x, params["in.w"], None, stride=1, padding=k_in // 2)
    h = glu(instance_norm(h, params["in.norm.gain"], params["in.norm.bias"]))
    for j in range(1, config.n_downsample + 1):
        h = conv1d(h, params[f"down{j}.w"], None, stride=2, padding=k_down // 2)
        h = glu(instance_norm(h, params[f"down{j}.norm.gain"], params[f"down{j}.norm.bias"]))
    for r in range(1, config.n_residual + 1):
        skip = h
        h = conv1d(h, params[f"res{r}.conv1.w"], None, 1, k_res // 2)
        h = glu(instance_norm(h, params[f"res{r}.norm1.gain"], params[f"res{r}.norm1.bias"]))
        h = conv1d(h, params[f"res{r}.conv2.w"], None, 1, k_res // 2)
        h = instance_norm(h, params[f"res{r}.norm2.gain"], params[f"res{r}.norm2.bias"])
        h = add(h, skip)
    for j in range(1, config.n_upsample + 1):
        h = upsample2(h)
        h = conv1d(h, params[f"up{j}.w"], None, stride=1, padding=k_up // 2)
        h = glu(instance_norm(h, params[f"up{j}.norm.gain"], params[f"up{j}.norm.bias"]))
    return conv1d(h, params["out.w"], params["out.b"], stride=1, padding=k_out // 2)


def forward_discriminator(params: ParamStore, config: NetworkConfig, x: Tensor) -> Tensor:
    """Patch scores for a single [1, channels, frames] feature map."""
    if config.kind != DISCRIMINATOR_KIND:
        raise ValidationError(
            f"forward_discriminator needs a discriminator config, got {config.kind}"
        )
    if x.values.ndim != 3 or x.shape[0] != 1 or x.shape[1] != config.in_channels:
        raise ValidationError(
            f"discriminator input must be [1, {config.in_channels}, frames], got {x.shape}"
        )
    h = x
    n_layers = len(_disc_widths(config))
    for j in range(1, n_layers + 1):
        kh, kw = config.kernel_sizes[j - 1]
        final = j == n_layers
        h = conv2d(
            h,
            params[f"layer{j}.w"],
            params[f"layer{j}.b"] if (final or j == 1) else None,
            stride=(2, 2),
            padding=((kh - 1) // 2, (kw - 1) // 2),
        )
        if not final:
            if j > 1:
                h = instance_norm(
                    h, params[f"layer{j}.norm.gain"], params[f"layer{j}.norm.bias"]
                )
            h = leaky_relu(h, 0.2)
    return h
