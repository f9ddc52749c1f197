"""Versioned binary checkpoints for maps and full training state.

Layout, all little-endian:

    bytes 0..7    magic b"MMDCKPT\\n"
    bytes 8..11   format version (uint32), currently 1
    bytes 12..15  JSON header length H (uint32)
    bytes 16..    H bytes of UTF-8 JSON with sorted keys
    then          raw float64 array payloads, C order, in header order

The header's ``arrays`` list gives each payload array's name and shape, so
the payload offsets are implied. ``kind`` is ``map`` (parameters only) or
``train_state`` (parameters, Adam moments, step counter, epoch). Identical
inputs produce byte-identical files, and loading restores every float
bit-exactly, which is what makes checkpoint-resume reproduce an
uninterrupted run.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InputError
from .nn import MlpParams, ParamGrads
from .optim import AdamHyper, AdamState
from .util import atomic_write_bytes

MAGIC = b"MMDCKPT\n"
FORMAT_VERSION = 1

KIND_MAP = "map"
KIND_TRAIN_STATE = "train_state"


def _param_arrays(params: MlpParams) -> list[tuple[str, np.ndarray]]:
    out = []
    for l, (w, b) in enumerate(zip(params.weights, params.biases)):
        out.append((f"w{l}", w))
        out.append((f"b{l}", b))
    return out


def _moment_arrays(prefix: str, grads: ParamGrads) -> list[tuple[str, np.ndarray]]:
    out = []
    for l, (w, b) in enumerate(zip(grads.weights, grads.biases)):
        out.append((f"{prefix}_w{l}", w))
        out.append((f"{prefix}_b{l}", b))
    return out


def _encode(kind: str, meta: dict, arrays: list[tuple[str, np.ndarray]]) -> bytes:
    header = dict(meta)
    header["kind"] = kind
    header["arrays"] = [{"name": n, "shape": list(a.shape)} for n, a in arrays]
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(header_bytes)), header_bytes]
    for _, a in arrays:
        parts.append(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return b"".join(parts)


def _decode(path: Path) -> tuple[dict, dict[str, np.ndarray]]:
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(blob) < len(MAGIC) + 8 or blob[: len(MAGIC)] != MAGIC:
        raise InputError(f"{path} is not a checkpoint (bad magic)")
    version, header_len = struct.unpack_from("<II", blob, len(MAGIC))
    if version != FORMAT_VERSION:
        raise InputError(f"{path}: unsupported checkpoint version {version}")
    start = len(MAGIC) + 8
    if len(blob) < start + header_len:
        raise InputError(f"{path}: truncated checkpoint header")
    try:
        header = json.loads(blob[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: corrupt checkpoint header: {exc}") from exc
    offset = start + header_len
    arrays: dict[str, np.ndarray] = {}
    for entry in header.get("arrays", []):
        shape = tuple(int(v) for v in entry["shape"])
        size = int(np.prod(shape, dtype=np.int64)) if shape else 1
        end = offset + 8 * size
        if end > len(blob):
            raise InputError(f"{path}: truncated checkpoint payload")
        arr = np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape)
        arrays[entry["name"]] = arr.astype(np.float64, copy=True)
        offset = end
    if offset != len(blob):
        raise InputError(f"{path}: {len(blob) - offset} trailing bytes after payload")
    return header, arrays


def _params_from(header: dict, arrays: dict[str, np.ndarray]) -> MlpParams:
    acts = header.get("activations")
    if not isinstance(acts, list) or not acts:
        raise InputError("checkpoint header lacks activations")
    weights, biases = [], []
    for l in range(len(acts)):
        try:
            weights.append(arrays[f"w{l}"])
            biases.append(arrays[f"b{l}"])
        except KeyError as exc:
            raise InputError(f"checkpoint payload missing array {exc}") from exc
    try:
        return MlpParams(weights, biases, acts)
    except (InputError, ValueError) as exc:
        raise InputError(f"checkpoint holds an inconsistent network: {exc}") from exc


def save_params(path, params: MlpParams) -> None:
    """Write a map-only checkpoint."""
    meta = {"activations": [a.value for a in params.activations]}
    atomic_write_bytes(Path(path), _encode(KIND_MAP, meta, _param_arrays(params)))


def load_params(path) -> MlpParams:
    """Read the network from a checkpoint of either kind."""
    header, arrays = _decode(Path(path))
    if header.get("kind") not in (KIND_MAP, KIND_TRAIN_STATE):
        raise InputError(f"{path}: unknown checkpoint kind {header.get('kind')!r}")
    return _params_from(header, arrays)


def save_train_state(path, params: MlpParams, opt: AdamState, epoch: int) -> None:
    """Write a resumable checkpoint: parameters, Adam moments, counters."""
    meta = {
        "activations": [a.value for a in params.activations],
        "epoch": int(epoch),
        "step_count": int(opt.step_count),
        "adam": {
            "learning_rate": opt.hyper.learning_rate,
            "beta1": opt.hyper.beta1,
            "beta2": opt.hyper.beta2,
            "eps": opt.hyper.eps,
        },
    }
    arrays = (
        _param_arrays(params)
        + _moment_arrays("m", opt.first_moment)
        + _moment_arrays("v", opt.second_moment)
    )
    atomic_write_bytes(Path(path), _encode(KIND_TRAIN_STATE, meta, arrays))


def load_train_state(path) -> tuple[MlpParams, AdamState, int]:
    """Read back (params, optimizer state, completed epoch count)."""
    header, arrays = _decode(Path(path))
    if header.get("kind") != KIND_TRAIN_STATE:
        raise InputError(f"{path}: not a training-state checkpoint")
    params = _params_from(header, arrays)
    n = params.n_layers
    try:
        adam_cfg = header["adam"]
        hyper = AdamHyper(
            learning_rate=float(adam_cfg["learning_rate"]),
            beta1=float(adam_cfg["beta1"]),
            beta2=float(adam_cfg["beta2"]),
            eps=float(adam_cfg["eps"]),
        )
        first = ParamGrads(
            [arrays[f"m_w{l}"] for l in range(n)], [arrays[f"m_b{l}"] for l in range(n)]
        )
        second = ParamGrads(
            [arrays[f"v_w{l}"] for l in range(n)], [arrays[f"v_b{l}"] for l in range(n)]
        )
        epoch = int(header["epoch"])
        step_count = int(header["step_count"])
    except KeyError as exc:
        raise InputError(f"{path}: checkpoint missing field {exc}") from exc
    for name, (p, m) in enumerate(zip(params.weights + params.biases,
                                      first.weights + first.biases)):
        if p.shape != m.shape:
            raise InputError(f"{path}: moment array {name} does not match parameters")
    opt = AdamState(hyper=hyper, first_moment=first, second_moment=second, step_count=step_count)
    return params, opt, epoch
