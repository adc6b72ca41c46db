"""
Complex-valued masking network

    X_m (per channel) -> encoder (shared)  -> concat over channels
      -> fc_in  (h_in)  -> complex GRU (h_out) -> fc_out
      -> decoder (shared, per channel) -> bounded complex mask M_m

fc_in is the first layer that sees all channels at once; its output and
the GRU output are the two feature taps. All parameters are float64 real
and imaginary parts, so autograd yields the Wirtinger gradients as
ordinary gradients of the real parameterization.
"""

import hashlib
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
import torch
from torch import nn

from .config import ModelConfig
from .errors import ConfigError, NumericInstabilityError, ShapeError
from .spectral import SpectralTensor

logger = logging.getLogger(__name__)

DTYPE = torch.float64
_EPS = 1e-12


def split_tanh(z: torch.Tensor) -> torch.Tensor:
    return torch.complex(torch.tanh(z.real), torch.tanh(z.imag))


def compress(z: torch.Tensor, power: float) -> torch.Tensor:
    """|z|^power * exp(j angle(z)), smooth at zero"""
    return z * (z.real ** 2 + z.imag ** 2 + _EPS) ** ((power - 1.0) / 2.0)


def bounded(z: torch.Tensor, cap: float) -> torch.Tensor:
    """Keep the phase, squash the magnitude below `cap`"""
    r = torch.sqrt(z.real ** 2 + z.imag ** 2 + _EPS)
    return z * (cap * torch.tanh(r / cap) / r)


# ============================================================================
# Layers
# ============================================================================

class ComplexLinear(nn.Module):
    """y = W z + b with complex W, b stored as real/imaginary parameter pairs"""

    def __init__(self, in_features: int, out_features: int, generator: Optional[torch.Generator] = None):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        # Complex Glorot-style init: Var(W) = 1 / fan_in split over re and im
        std = (2.0 * in_features) ** -0.5
        self.weight_re = nn.Parameter(torch.randn(out_features, in_features, generator=generator, dtype=DTYPE) * std)
        self.weight_im = nn.Parameter(torch.randn(out_features, in_features, generator=generator, dtype=DTYPE) * std)
        self.bias_re = nn.Parameter(torch.zeros(out_features, dtype=DTYPE))
        self.bias_im = nn.Parameter(torch.zeros(out_features, dtype=DTYPE))

    @property
    def weight(self) -> torch.Tensor:
        return torch.complex(self.weight_re, self.weight_im)

    @property
    def bias(self) -> torch.Tensor:
        return torch.complex(self.bias_re, self.bias_im)

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        return z @ self.weight.transpose(0, 1) + self.bias

    def extra_repr(self) -> str:
        return f"in_features={self.in_features}, out_features={self.out_features}"


class ComplexGRUCell(nn.Module):
    """
    GRU with complex weights

        r  = sigmoid(Re(W_r x + U_r h + b_r))
        z  = sigmoid(Re(W_z x + U_z h + b_z))
        n  = split_tanh(W_n x + b_n + r * (U_n h + c_n))
        h' = (1 - z) * n + z * h

    Gates are real and scale complex states. |Re n|, |Im n| < 1, so the state
    stays bounded for any input.
    """

    def __init__(self, input_size: int, hidden_size: int, generator: Optional[torch.Generator] = None):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.input_map = ComplexLinear(input_size, 3 * hidden_size, generator)
        self.hidden_map = ComplexLinear(hidden_size, 3 * hidden_size, generator)

    def forward(self, x: torch.Tensor, h: torch.Tensor) -> torch.Tensor:
        gi_r, gi_z, gi_n = self.input_map(x).chunk(3, dim=-1)
        gh_r, gh_z, gh_n = self.hidden_map(h).chunk(3, dim=-1)
        r = torch.sigmoid((gi_r + gh_r).real)
        z = torch.sigmoid((gi_z + gh_z).real)
        n = split_tanh(gi_n + r * gh_n)
        return (1.0 - z) * n + z * h

    def initial_state(self) -> torch.Tensor:
        return torch.zeros(self.hidden_size, dtype=torch.complex128)


def complex_gru_step(state: torch.Tensor, inp: torch.Tensor, cell: ComplexGRUCell) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    One recurrent update

    Returns:
        (new_state, output); the output of a GRU layer is its new state
    """
    if state.shape[-1] != cell.hidden_size or inp.shape[-1] != cell.input_size:
        raise ShapeError(f"GRU step: state {tuple(state.shape)}, input {tuple(inp.shape)} "
                         f"do not match cell ({cell.input_size} -> {cell.hidden_size})")
    new_state = cell(inp, state)
    if not torch.isfinite(torch.view_as_real(new_state)).all():
        raise NumericInstabilityError("complex GRU state became non-finite")
    return new_state, new_state


class ComplexGRU(nn.Module):
    """Runs a ComplexGRUCell over a (frames, features) sequence from a zero state"""

    def __init__(self, input_size: int, hidden_size: int, generator: Optional[torch.Generator] = None):
        super().__init__()
        self.cell = ComplexGRUCell(input_size, hidden_size, generator)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.cell.initial_state()
        outputs = []
        for tau in range(x.shape[0]):
            h = self.cell(x[tau], h)
            outputs.append(h)
        out = torch.stack(outputs)
        if not torch.isfinite(torch.view_as_real(out)).all():
            raise NumericInstabilityError("complex GRU state became non-finite")
        return out


class Identity(nn.Module):
    """Stand-in for the GRU in the memoryless variant"""

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x


# ============================================================================
# Network
# ============================================================================

class MaskNet(nn.Module):
    """Encoder / compandor / decoder masking network"""

    def __init__(self, config: ModelConfig, memoryless: bool = False):
        super().__init__()
        config.validate()
        if memoryless and config.u_in != config.u_out:
            raise ConfigError("memoryless variant needs u_in == u_out")
        self.config = config
        self.memoryless = memoryless

        g = torch.Generator().manual_seed(config.seed)
        e0, e1 = config.encoder_widths
        d0, d1 = config.decoder_widths
        M, F = config.num_mics, config.num_bins

        self.encoder = nn.ModuleList([ComplexLinear(F, e0, g), ComplexLinear(e0, e1, g)])
        self.fc_in = ComplexLinear(M * e1, config.u_in, g)
        self.gru = Identity() if memoryless else ComplexGRU(config.u_in, config.u_out, g)
        self.fc_out = ComplexLinear(config.u_out, M * d0, g)
        self.decoder = nn.ModuleList([ComplexLinear(d0, d1, g), ComplexLinear(d1, F, g)])

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """
        Args:
            x: complex STFT, shape (M, T, F)
        Returns:
            complex mask, shape (M, T, F)
        """
        M, F = self.config.num_mics, self.config.num_bins
        if x.dim() != 3 or x.shape[0] != M or x.shape[2] != F:
            raise ShapeError(f"network expects (M={M}, T, F={F}) input, got {tuple(x.shape)}")
        T = x.shape[1]

        e = compress(x, self.config.compression)
        for layer in self.encoder:
            e = split_tanh(layer(e))

        fused = e.permute(1, 0, 2).reshape(T, -1)
        h_in = self.fc_in(fused)
        h_out = self.gru(h_in)
        d = split_tanh(self.fc_out(h_out)).reshape(T, M, -1).permute(1, 0, 2)

        d = split_tanh(self.decoder[0](d))
        return bounded(self.decoder[1](d), self.config.mask_cap)


# ============================================================================
# Domain types and taps
# ============================================================================

@dataclass(frozen=True, eq=False)
class ComplexMask:
    values: np.ndarray  # (M, T, F) complex


@dataclass(frozen=True, eq=False)
class FeatureTrace:
    h_in_raw: np.ndarray   # (T, U_in) complex
    h_out_raw: np.ndarray  # (T, U_out) complex
    model_checksum: str = ""
    sequence_id: str = ""

    @property
    def num_frames(self) -> int:
        return self.h_in_raw.shape[0]

    def raw(self, tap: str) -> np.ndarray:
        if tap == "input":
            return self.h_in_raw
        if tap == "output":
            return self.h_out_raw
        raise ConfigError(f"unknown tap '{tap}' (expected 'input' or 'output')")


def parameter_arrays(model: nn.Module) -> Dict[str, np.ndarray]:
    """Named parameters as float64 arrays, in state_dict order"""
    return {name: t.detach().cpu().numpy().astype("<f8") for name, t in model.state_dict().items()}


def model_checksum(model: nn.Module) -> str:
    digest = hashlib.sha256()
    for name, array in parameter_arrays(model).items():
        digest.update(name.encode())
        digest.update(np.ascontiguousarray(array).tobytes())
    return digest.hexdigest()


def to_torch(tensor: SpectralTensor) -> torch.Tensor:
    return torch.tensor(tensor.data, dtype=torch.complex128)


@contextmanager
def feature_taps(model: MaskNet):
    """Capture fc_in and GRU outputs of every forward pass inside the block"""
    captured: Dict[str, torch.Tensor] = {}

    def hook(name):
        def store(module, inputs, output):
            captured[name] = output.detach()
        return store

    handles = [model.fc_in.register_forward_hook(hook("input")),
               model.gru.register_forward_hook(hook("output"))]
    try:
        yield captured
    finally:
        for handle in handles:
            handle.remove()


def _check_framing(model: MaskNet, tensor: SpectralTensor):
    if tensor.num_channels != model.config.num_mics or tensor.num_bins != model.config.num_bins:
        raise ShapeError(f"tensor is ({tensor.num_channels} ch, {tensor.num_bins} bins), model expects "
                         f"({model.config.num_mics} ch, {model.config.num_bins} bins)")


def forward(model: MaskNet, tensor: SpectralTensor, sequence_id: str = "") -> Tuple[ComplexMask, FeatureTrace]:
    """Mask and bottleneck features for one sequence (no gradients)"""
    _check_framing(model, tensor)
    with torch.no_grad(), feature_taps(model) as taps:
        mask = model(to_torch(tensor))
    trace = FeatureTrace(taps["input"].numpy(), taps["output"].numpy(), model_checksum(model), sequence_id)
    return ComplexMask(mask.numpy()), trace


def tap_features(model: MaskNet, tensor: SpectralTensor, sequence_id: str = "") -> FeatureTrace:
    return forward(model, tensor, sequence_id)[1]


def masked_sum(mask: torch.Tensor, x: torch.Tensor) -> torch.Tensor:
    """S(tau, f) = sum_m M_m(tau, f) X_m(tau, f), keeping a channel axis of 1"""
    return (mask * x).sum(dim=0, keepdim=True)


def apply_mask(mask: Union[ComplexMask, np.ndarray], tensor: SpectralTensor) -> SpectralTensor:
    values = mask.values if isinstance(mask, ComplexMask) else np.asarray(mask)
    if values.shape != tensor.data.shape:
        raise ShapeError(f"mask shape {values.shape} does not match tensor shape {tensor.data.shape}")
    return tensor.like(np.sum(values * tensor.data, axis=0, keepdims=True))
