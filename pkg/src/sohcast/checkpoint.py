"""Versioned binary checkpoint container ("DLNT").

Layout: magic "DLNT" | u16 version | u8 kind | u8 flags | u32 header
length | JSON header | tensor payload | trailing CRC32 of everything
before it. The header carries scalar hyperparameters and a tensor index
(name, dtype, dims, encoding, offset, nbytes). Float tensors are stored
dense little-endian (pruned weights stay dense with their masks packed
alongside; size reduction happens at int8 export). Round-trips are
bit-exact; the checksum is verified on load.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from .compression import PruneMask
from .errors import CheckpointError
from .models import StudentModel, TeacherModel
from .quantization import QuantizedModel, QuantParams, QuantScheme

MAGIC = b"DLNT"
VERSION = 1
KINDS = {"teacher": 0, "student": 1, "quantized": 2}
KIND_NAMES = {v: k for k, v in KINDS.items()}

_DT = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8"), "<i1": np.dtype("<i1"),
       "<u1": np.dtype("<u1")}


def _dt_code(arr: np.ndarray) -> str:
    code = {"float32": "<f4", "float64": "<f8", "int8": "<i1", "uint8": "<u1"}.get(arr.dtype.name)
    if code is None:
        raise CheckpointError(f"unsupported tensor dtype {arr.dtype}")
    return code


def _encode_tensor(arr: np.ndarray) -> tuple[int, bytes]:
    return 0, np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes()


def _decode_tensor(enc: int, blob: bytes, dtype_code: str, dims) -> np.ndarray:
    if enc != 0:
        raise CheckpointError(f"unknown tensor encoding {enc}")
    dt = _DT[dtype_code]
    size = int(np.prod(dims)) if dims else 1
    arr = np.frombuffer(blob, dt, count=size).copy()
    return arr.astype(dt.newbyteorder("=")).reshape(dims)


def _pack(kind: str, scalars: dict, tensors: list[tuple[str, np.ndarray]]) -> bytes:
    index = []
    payload = bytearray()
    for name, arr in tensors:
        enc, blob = _encode_tensor(np.asarray(arr))
        index.append([name, _dt_code(np.asarray(arr)), list(np.asarray(arr).shape),
                      enc, len(payload), len(blob)])
        payload += blob
    header = json.dumps({"scalars": scalars, "tensors": index},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = MAGIC + struct.pack("<HBBI", VERSION, KINDS[kind], 0, len(header)) + header + bytes(payload)
    return body + struct.pack("<I", zlib.crc32(body))


def _unpack(blob: bytes):
    if len(blob) < 16 or blob[:4] != MAGIC:
        raise CheckpointError("not a DLNT checkpoint")
    body, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(body) != crc:
        raise CheckpointError("checksum mismatch: corrupt checkpoint")
    version, kind, _flags, hlen = struct.unpack("<HBBI", blob[4:12])
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    header = json.loads(blob[12:12 + hlen].decode("utf-8"))
    payload = blob[12 + hlen:-4]
    tensors = {}
    for name, dtc, dims, enc, off, nbytes in header["tensors"]:
        tensors[name] = _decode_tensor(enc, payload[off:off + nbytes], dtc, dims)
    return KIND_NAMES[kind], header["scalars"], tensors


def _model_tensors(m) -> list[tuple[str, np.ndarray]]:
    return [(p.name, p.data) for p in m.params()]


def serialize_model(m, mask: PruneMask | None = None) -> bytes:
    scalars = {
        "window": m.window, "horizon": m.horizon, "hidden_dim": m.hidden_dim,
        "enc_width": m.enc_width, "dec_width": m.dec_width, "dec_mid": m.dec_mid,
        "dropout_p": m.dropout_p, "t_end": m.t_end,
        "dtype": "<f4" if m.dtype == np.float32 else "<f8",
    }
    tensors = _model_tensors(m)
    if m.kind == "teacher":
        scalars["steps"] = m.steps
    else:
        scalars["rank"] = m.rank
        scalars["euler_steps"] = m.euler_steps
    if mask is not None:
        scalars["mask_sparsity"] = mask.sparsity
        for name, arr in mask.masks.items():
            tensors.append((f"mask:{name}", np.packbits(arr.astype(np.uint8).ravel())))
            scalars.setdefault("mask_shapes", {})[name] = list(arr.shape)
    return _pack(m.kind, scalars, tensors)


def deserialize_model(blob: bytes):
    """Returns (model, mask_or_None)."""
    kind, s, tensors = _unpack(blob)
    dtype = np.float32 if s["dtype"] == "<f4" else np.float64
    common = dict(window=s["window"], horizon=s["horizon"], hidden_dim=s["hidden_dim"],
                  enc_width=s["enc_width"], dec_width=s["dec_width"], dec_mid=s["dec_mid"],
                  dropout_p=s["dropout_p"], t_end=s["t_end"], dtype=dtype, seed=0)
    if kind == "teacher":
        m = TeacherModel(steps=s["steps"], **common)
    elif kind == "student":
        m = StudentModel(rank=s["rank"], euler_steps=s["euler_steps"], **common)
    else:
        raise CheckpointError("use deserialize_quantized for quantized checkpoints")
    for p in m.params():
        if p.name not in tensors:
            raise CheckpointError(f"missing tensor {p.name}")
        arr = tensors[p.name].astype(dtype)
        if arr.shape != p.data.shape:
            raise CheckpointError(f"shape mismatch for {p.name}")
        p.data = arr
    mask = None
    if "mask_sparsity" in s:
        masks = {}
        for name, dims in s["mask_shapes"].items():
            size = int(np.prod(dims))
            bits = np.unpackbits(tensors[f"mask:{name}"], count=size)
            masks[name] = bits.reshape(dims).astype(np.uint8)
        mask = PruneMask(sparsity=s["mask_sparsity"], masks=masks)
    return m, mask


def serialize_quantized(qm: QuantizedModel) -> bytes:
    scalars = {
        "window": qm.window, "horizon": qm.horizon, "hidden_dim": qm.hidden_dim,
        "enc_width": qm.enc_width, "dec_width": qm.dec_width, "dec_mid": qm.dec_mid,
        "rank": qm.rank, "euler_steps": qm.euler_steps, "dt": qm.dt,
        "alpha": qm.alpha, "beta": qm.beta, "sparsity": qm.sparsity,
        "weight_scales": {k: v.scale for k, v in qm.weight_q.items()},
        "act_scales": [q.scale for q in qm.act],
        "act_zps": [q.zero_point for q in qm.act],
    }
    tensors = [(f"q:{k}", v) for k, v in sorted(qm.weights.items())]
    tensors += [(f"b:{k}", v) for k, v in sorted(qm.biases.items())]
    for k, (g, b) in sorted(qm.norms.items()):
        tensors += [(f"ng:{k}", g), (f"nb:{k}", b)]
    return _pack("quantized", scalars, tensors)


def deserialize_quantized(blob: bytes) -> QuantizedModel:
    kind, s, tensors = _unpack(blob)
    if kind != "quantized":
        raise CheckpointError(f"expected quantized checkpoint, got {kind}")
    weights = {k[2:]: v for k, v in tensors.items() if k.startswith("q:")}
    biases = {k[2:]: v for k, v in tensors.items() if k.startswith("b:")}
    gains = {k[3:]: v for k, v in tensors.items() if k.startswith("ng:")}
    shifts = {k[3:]: v for k, v in tensors.items() if k.startswith("nb:")}
    return QuantizedModel(
        window=s["window"], horizon=s["horizon"], hidden_dim=s["hidden_dim"],
        enc_width=s["enc_width"], dec_width=s["dec_width"], dec_mid=s["dec_mid"],
        rank=s["rank"], euler_steps=s["euler_steps"], dt=s["dt"], alpha=s["alpha"],
        beta=s["beta"], sparsity=s["sparsity"], weights=weights,
        weight_q={k: QuantParams(v, 0, QuantScheme.SYMMETRIC_WEIGHT)
                  for k, v in s["weight_scales"].items()},
        biases=biases, norms={k: (gains[k], shifts[k]) for k in gains},
        act=[QuantParams(sc, zp, QuantScheme.AFFINE_ACTIVATION)
             for sc, zp in zip(s["act_scales"], s["act_zps"])])


def save(path, blob: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(blob)


def load(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def serialized_size(m, mask: PruneMask | None = None) -> int:
    return len(serialize_model(m, mask))
