"""End-to-end classifier: token gates, wavelet stage, gated-input ReLU
recurrence, and the regularized linear head.

The pipeline per patch volume (P x P x C*):
tokens -> gates -> regridded volumes -> Haar subband stack -> linear
projection to the embedding -> recurrent state update over the spatial
scan -> linear head.  With the wavelet stage disabled the sequence is
built directly from the two gated volumes concatenated channelwise.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ShapeMismatch

PARAM_NAMES = (
    "gate_spatial_w",
    "gate_spatial_b",
    "gate_spectral_w",
    "gate_spectral_b",
    "input_proj_w",
    "input_proj_b",
    "transition_w",
    "update_w",
    "classifier_w",
)


@dataclass
class ModelConfig:
    patch_side: int
    reduced_bands: int
    num_classes: int
    embed_dim: int = 64
    state_dim: int = 128
    dropout: float = 0.1
    weight_decay: float = 0.01
    wavelet_enabled: bool = True
    head: str = "softmax"  # or "sigmoid"
    depth: int = 1

    def __post_init__(self):
        if self.patch_side < 2 or self.patch_side % 2:
            raise ValueError(f"patch side must be even and >= 2, got {self.patch_side}")
        if self.num_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.num_classes}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.weight_decay < 0:
            raise ValueError("weight decay must be >= 0")
        if min(self.reduced_bands, self.embed_dim, self.state_dim, self.depth) < 1:
            raise ValueError("dims must be >= 1")
        if self.head not in ("softmax", "sigmoid"):
            raise ValueError(f"unknown head {self.head!r}")

    @property
    def in_channels(self) -> int:
        return (8 if self.wavelet_enabled else 2) * self.reduced_bands

    @property
    def seq_len(self) -> int:
        half = self.patch_side // 2
        return half * half if self.wavelet_enabled else self.patch_side**2

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls(**json.loads(text))


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(cfg: ModelConfig, rng: np.random.Generator) -> dict[str, Tensor]:
    c = cfg.reduced_bands
    d = cfg.embed_dim
    s = cfg.state_dim
    k = cfg.num_classes
    ch = cfg.in_channels
    params = {
        "gate_spatial_w": _xavier(rng, c, c, (c, c)),
        "gate_spatial_b": np.zeros(c),
        "gate_spectral_w": _xavier(rng, c, c, (c, c)),
        "gate_spectral_b": np.zeros(c),
        "input_proj_w": _xavier(rng, ch, d, (ch, d)),
        "input_proj_b": np.zeros(d),
        "transition_w": _xavier(rng, s, s, (s, s)),
        "update_w": _xavier(rng, d, s, (d, s)),
        "classifier_w": _xavier(rng, s, k, (s, k)),
    }
    return {name: Tensor(v, requires_grad=True) for name, v in params.items()}


def _as_batch(volume) -> tuple[Tensor, bool]:
    t = volume if isinstance(volume, Tensor) else Tensor(volume)
    if t.data.ndim == 3:
        return t.reshape(1, *t.data.shape), True
    if t.data.ndim != 4:
        raise ShapeMismatch(f"expected (B, P, P, C) or (P, P, C), got {t.shape}")
    return t, False


def make_token_tensors(volume: Tensor) -> tuple[Tensor, Tensor]:
    """Spatial tokens (B, C, P^2) and spectral tokens (B, P^2, C)."""
    b, p, q, c = volume.data.shape
    spectral = volume.reshape(b, p * q, c)
    return spectral.transpose(0, 2, 1), spectral


def gate_tokens(
    spatial: Tensor, spectral: Tensor, params: dict[str, Tensor]
) -> tuple[Tensor, Tensor]:
    """Sigmoid gates from the mean spectrum, applied per band to both tokens."""
    b, n, c = spectral.data.shape
    if params["gate_spatial_w"].shape != (c, c):
        raise ShapeMismatch(
            f"gate weights {params['gate_spatial_w'].shape} vs {c} bands"
        )
    context = spectral.mean(axis=1)  # (B, C)
    g_spatial = ad.sigmoid(
        ad.matmul(context, params["gate_spatial_w"].transpose(1, 0))
        + params["gate_spatial_b"]
    )
    g_spectral = ad.sigmoid(
        ad.matmul(context, params["gate_spectral_w"].transpose(1, 0))
        + params["gate_spectral_b"]
    )
    gated_spatial = spatial * g_spatial.reshape(b, c, 1)
    gated_spectral = spectral * g_spectral.reshape(b, 1, c)
    return gated_spatial, gated_spectral


def reshape_gated(gated_spatial: Tensor, gated_spectral: Tensor) -> tuple[Tensor, Tensor]:
    """Lay both gated token matrices back onto the (B, P, P, C) grid."""
    b, c, n = gated_spatial.data.shape
    p = int(round(np.sqrt(n)))
    s_vol = gated_spatial.transpose(0, 2, 1).reshape(b, p, p, c)
    f_vol = gated_spectral.reshape(b, p, p, c)
    return s_vol, f_vol


def build_sequence(
    stack: Tensor,
    params: dict[str, Tensor],
    cfg: ModelConfig,
    training: bool,
    rng: np.random.Generator,
) -> Tensor:
    """Row-major scan of the stack -> projected, dropout-regularized embeddings
    (B, T, d)."""
    b, h, w, ch = stack.data.shape
    flat = stack.reshape(b, h * w, ch)
    embedded = ad.matmul(flat, params["input_proj_w"]) + params["input_proj_b"]
    return ad.dropout(embedded, cfg.dropout, training, rng)


def ssm_forward(sequence: Tensor, params: dict[str, Tensor], h0: Tensor | None = None) -> Tensor:
    """h_t = relu(h_{t-1} W_transition^T + E_t W_update); returns h_T (B, S)."""
    b, t_steps, _ = sequence.data.shape
    s = params["transition_w"].shape[0]
    h = h0 if h0 is not None else Tensor(np.zeros((b, s)))
    w_transition_t = params["transition_w"].transpose(1, 0)
    for t in range(t_steps):
        step = sequence[:, t, :]
        h = ad.relu(ad.matmul(h, w_transition_t) + ad.matmul(step, params["update_w"]))
    return h


def classify(hidden: Tensor, params: dict[str, Tensor], cfg: ModelConfig) -> np.ndarray:
    """Class probabilities from the final hidden state."""
    logits = ad.matmul(hidden, params["classifier_w"]).data
    if cfg.head == "sigmoid":
        probs = 1.0 / (1.0 + np.exp(-logits))
        return probs / probs.sum(axis=-1, keepdims=True)
    return ad.softmax(logits)


def forward_logits(
    volume,
    params: dict[str, Tensor],
    cfg: ModelConfig,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Full pipeline up to the linear head; returns (B, K) logits."""
    batch, _ = _as_batch(volume)
    rng = rng if rng is not None else np.random.default_rng(0)
    spatial, spectral = make_token_tensors(batch)
    gated_spatial, gated_spectral = gate_tokens(spatial, spectral, params)
    s_vol, f_vol = reshape_gated(gated_spatial, gated_spectral)
    if cfg.wavelet_enabled:
        stack = ad.concat([ad.haar_subbands(s_vol), ad.haar_subbands(f_vol)], axis=-1)
    else:
        stack = ad.concat([s_vol, f_vol], axis=-1)
    hidden = None
    sequence = build_sequence(stack, params, cfg, training, rng)
    for _ in range(cfg.depth):
        hidden = ssm_forward(sequence, params, h0=hidden)
    return ad.matmul(hidden, params["classifier_w"])


def model_forward(
    volume,
    params: dict[str, Tensor],
    cfg: ModelConfig,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Class probability vector(s) for one patch volume or a batch."""
    batch, squeezed = _as_batch(volume)
    logits = forward_logits(batch, params, cfg, training, rng).data
    if cfg.head == "sigmoid":
        probs = 1.0 / (1.0 + np.exp(-logits))
        probs = probs / probs.sum(axis=-1, keepdims=True)
    else:
        probs = ad.softmax(logits)
    return probs[0] if squeezed else probs


def training_loss(
    volumes,
    targets,
    params: dict[str, Tensor],
    cfg: ModelConfig,
    rng: np.random.Generator | None = None,
    training: bool = True,
) -> Tensor:
    """Mean classification loss over the batch plus the L2 head penalty."""
    targets = np.asarray(targets, dtype=np.int64)
    if targets.size == 0:
        raise ValueError("batch must be nonempty")
    logits = forward_logits(volumes, params, cfg, training, rng)
    if cfg.head == "sigmoid":
        data_loss = ad.sigmoid_binary_cross_entropy(logits, targets)
    else:
        data_loss = ad.softmax_cross_entropy(logits, targets)
    return data_loss + ad.l2_penalty(params["classifier_w"], cfg.weight_decay)
