"""
Checkpoint container

Binary layout (little-endian):

    magic (8) | version (2) | header_len (4) | header JSON | blobs | sha256 (32)

The JSON header holds the model config, training step, thread count,
optimizer hyper-parameters and an index of blobs (name, shape). Blobs
are raw float64 arrays in index order. The trailing SHA-256 covers
everything before it.
"""

import copy
import hashlib
import json
import logging
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import torch

from .config import ModelConfig
from .errors import ManifestError
from .network import MaskNet, model_checksum, parameter_arrays

logger = logging.getLogger(__name__)

MAGIC = b"STAPCKPT"
VERSION = 1

# magic (8) | version (2) | header_len (4)
PREAMBLE_FMT = "<8sHI"
PREAMBLE_SIZE = 14
DIGEST_SIZE = 32


class CheckpointError(ManifestError):
    """Unreadable, truncated or tampered checkpoint"""


@dataclass
class Checkpoint:
    config: ModelConfig
    params: Dict[str, np.ndarray]
    step: int = 0
    epoch: int = 0
    threads: int = 1
    memoryless: bool = False
    optimizer: Optional[Dict[str, Any]] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    # ------------------------------------------------------------------

    @classmethod
    def capture(cls, model: MaskNet, optimizer: Optional[torch.optim.Optimizer] = None,
                step: int = 0, epoch: int = 0, threads: int = 1, **extra) -> "Checkpoint":
        return cls(model.config, parameter_arrays(model), step, epoch, threads, model.memoryless,
                   copy.deepcopy(optimizer.state_dict()) if optimizer is not None else None, dict(extra))

    def build_model(self) -> MaskNet:
        model = MaskNet(self.config, memoryless=self.memoryless)
        state = {name: torch.from_numpy(np.array(array, dtype=np.float64)) for name, array in self.params.items()}
        missing, unexpected = model.load_state_dict(state, strict=False)
        if missing or unexpected:
            raise CheckpointError(f"parameter mismatch: missing {missing}, unexpected {unexpected}")
        return model

    def load_optimizer(self, optimizer: torch.optim.Optimizer):
        if self.optimizer is not None:
            optimizer.load_state_dict(self.optimizer)

    @property
    def checksum(self) -> str:
        return model_checksum(self.build_model())

    # ------------------------------------------------------------------

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_bytes(encode_checkpoint(self))
        tmp.replace(path)
        logger.debug("checkpoint step %d -> %s", self.step, path)
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Checkpoint":
        try:
            data = Path(path).read_bytes()
        except FileNotFoundError:
            raise CheckpointError(f"checkpoint not found: {path}")
        return decode_checkpoint(data)


# ============================================================================
# Encoding
# ============================================================================

def _split_optimizer(state: Optional[Dict]) -> Tuple[Optional[Dict], Dict[str, np.ndarray]]:
    """Optimizer state_dict -> (JSON part, tensor blobs)"""
    if state is None:
        return None, {}
    blobs: Dict[str, np.ndarray] = {}
    per_param: Dict[str, Dict] = {}
    for index, entry in state["state"].items():
        scalars = {}
        for key, value in entry.items():
            if torch.is_tensor(value) and value.dim() > 0:
                blobs[f"optimizer/{index}/{key}"] = value.detach().cpu().numpy().astype("<f8")
            else:
                scalars[key] = float(value)
        per_param[str(index)] = scalars
    return {"param_groups": state["param_groups"], "state": per_param}, blobs


def _join_optimizer(meta: Optional[Dict], blobs: Dict[str, np.ndarray]) -> Optional[Dict]:
    if meta is None:
        return None
    state: Dict[int, Dict] = {}
    for index, scalars in meta["state"].items():
        state[int(index)] = {key: torch.tensor(value, dtype=torch.float64) for key, value in scalars.items()}
    for name, array in blobs.items():
        _, index, key = name.split("/", 2)
        state.setdefault(int(index), {})[key] = torch.from_numpy(np.array(array, dtype=np.float64))
    return {"state": state, "param_groups": meta["param_groups"]}


def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    optimizer_meta, optimizer_blobs = _split_optimizer(ckpt.optimizer)
    blobs = {**{f"param/{k}": v for k, v in ckpt.params.items()}, **optimizer_blobs}

    header = {
        "config": _model_config_dict(ckpt.config),
        "step": ckpt.step,
        "epoch": ckpt.epoch,
        "threads": ckpt.threads,
        "memoryless": ckpt.memoryless,
        "optimizer": optimizer_meta,
        "extra": ckpt.extra,
        "blobs": [{"name": name, "shape": list(array.shape)} for name, array in blobs.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    body = struct.pack(PREAMBLE_FMT, MAGIC, VERSION, len(header_bytes)) + header_bytes
    body += b"".join(np.ascontiguousarray(array, dtype="<f8").tobytes() for array in blobs.values())
    return body + hashlib.sha256(body).digest()


def decode_checkpoint(data: bytes) -> Checkpoint:
    if len(data) < PREAMBLE_SIZE + DIGEST_SIZE:
        raise CheckpointError(f"checkpoint too short ({len(data)} bytes)")
    magic, version, header_len = struct.unpack(PREAMBLE_FMT, data[:PREAMBLE_SIZE])
    if magic != MAGIC:
        raise CheckpointError("not a spatialtap checkpoint (bad magic)")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")

    body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError("checkpoint checksum mismatch")

    try:
        header = json.loads(body[PREAMBLE_SIZE:PREAMBLE_SIZE + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"corrupt checkpoint header: {e}")

    offset = PREAMBLE_SIZE + header_len
    blobs: Dict[str, np.ndarray] = {}
    for item in header["blobs"]:
        shape = tuple(item["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(body):
            raise CheckpointError(f"checkpoint truncated inside blob '{item['name']}'")
        blobs[item["name"]] = np.frombuffer(body[offset:end], dtype="<f8").reshape(shape).copy()
        offset = end
    if offset != len(body):
        raise CheckpointError(f"{len(body) - offset} trailing bytes after blobs")

    params = {k[len("param/"):]: v for k, v in blobs.items() if k.startswith("param/")}
    optimizer_blobs = {k: v for k, v in blobs.items() if k.startswith("optimizer/")}
    config = header["config"]
    config = ModelConfig(**{k: tuple(v) if isinstance(v, list) else v for k, v in config.items()})

    return Checkpoint(config, params, int(header["step"]), int(header["epoch"]), int(header["threads"]),
                      bool(header["memoryless"]), _join_optimizer(header["optimizer"], optimizer_blobs),
                      header.get("extra", {}))


def _model_config_dict(config: ModelConfig) -> Dict[str, Any]:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(config).items()}
