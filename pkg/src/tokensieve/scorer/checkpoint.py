"""Single-file binary checkpoints with a versioned header.

Layout (little-endian): magic b"TKSV", u32 format version, nine i64 config
fields (vocab_size, d_model, n_heads, n_layers, n_causal, d_ff, max_seq,
tag_set_size, seed), then every weight tensor as raw float64 in declaration
order.  Loading validates the header and every tensor shape against the
reconstructed ScorerConfig.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .config import ScorerConfig
from .model import Parameters, param_spec

MAGIC = b"TKSV"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sI9q")

_CONFIG_FIELDS = (
    "vocab_size",
    "d_model",
    "n_heads",
    "n_layers",
    "n_causal",
    "d_ff",
    "max_seq",
    "tag_set_size",
    "seed",
)


def save_checkpoint(path: str | Path, params: Parameters, cfg: ScorerConfig) -> None:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, *(getattr(cfg, f) for f in _CONFIG_FIELDS))
    with open(path, "wb") as fh:
        fh.write(header)
        for name, shape in param_spec(cfg):
            arr = params[name]
            if arr.shape != shape:
                raise ValueError(f"parameter {name} has shape {arr.shape}, expected {shape}")
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[Parameters, ScorerConfig]:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise ValueError("checkpoint truncated: missing header")
    magic, version, *fields = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ValueError(f"bad checkpoint magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    cfg = ScorerConfig(**dict(zip(_CONFIG_FIELDS, (int(f) for f in fields))))
    params: Parameters = {}
    offset = _HEADER.size
    for name, shape in param_spec(cfg):
        count = int(np.prod(shape))
        nbytes = count * 8
        if offset + nbytes > len(blob):
            raise ValueError(f"checkpoint truncated inside tensor {name}")
        params[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += nbytes
    if offset != len(blob):
        raise ValueError(f"checkpoint has {len(blob) - offset} trailing bytes")
    return params, cfg
