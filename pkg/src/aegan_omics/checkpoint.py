"""Versioned binary container for models and stage state.

Layout: 8-byte magic, little-endian uint64 header length, a JSON header
(format tag, version, kind, free-form metadata, array table), then the raw
little-endian array bytes in table order. Output bytes depend only on the
content, so identical inputs give identical files.
"""
import json
import struct

import numpy as np

from . import nn
from .errors import ArtifactError

MAGIC = b"AEGANCK\x00"
FORMAT = "aegan-checkpoint"
VERSION = 1

_DTYPES = {"f8": "<f8", "i8": "<i8", "b1": "|b1"}


def _code(arr):
    if arr.dtype == np.bool_:
        return "b1"
    if np.issubdtype(arr.dtype, np.integer):
        return "i8"
    return "f8"


def save_checkpoint(path, kind, meta=None, arrays=None):
    arrays = arrays or {}
    table, blobs, offset = [], [], 0
    for name in sorted(arrays):
        arr = np.asarray(arrays[name])
        code = _code(arr)
        data = np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes()
        table.append({"name": name, "dtype": code, "shape": list(arr.shape),
                      "offset": offset, "nbytes": len(data)})
        blobs.append(data)
        offset += len(data)
    header = {"format": FORMAT, "version": VERSION, "kind": kind, "meta": meta or {},
              "arrays": table}
    hb = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(hb)))
        fh.write(hb)
        for b in blobs:
            fh.write(b)


def load_checkpoint(path, kind=None):
    """Return ``(meta, arrays)``; raises :class:`ArtifactError` on any mismatch."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError:
        raise ArtifactError(f"missing artifact {path}") from None
    if raw[:8] != MAGIC:
        raise ArtifactError(f"{path}: not a checkpoint file")
    (hlen,) = struct.unpack("<Q", raw[8:16])
    try:
        header = json.loads(raw[16:16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ArtifactError(f"{path}: corrupt checkpoint header") from None
    if header.get("format") != FORMAT or header.get("version") != VERSION:
        raise ArtifactError(f"{path}: checkpoint version {header.get('format')!r}/"
                            f"{header.get('version')!r} does not match {FORMAT}/{VERSION}")
    if kind is not None and header.get("kind") != kind:
        raise ArtifactError(f"{path}: expected a {kind!r} checkpoint, found {header.get('kind')!r}")
    body = raw[16 + hlen:]
    arrays = {}
    for entry in header["arrays"]:
        start = entry["offset"]
        chunk = body[start:start + entry["nbytes"]]
        if len(chunk) != entry["nbytes"]:
            raise ArtifactError(f"{path}: truncated array {entry['name']!r}")
        arrays[entry["name"]] = np.frombuffer(chunk, dtype=_DTYPES[entry["dtype"]]).reshape(
            entry["shape"]).copy()
    return header["meta"], arrays


def network_arrays(prefix, network):
    out = {}
    for i, layer in enumerate(network):
        out[f"{prefix}/{i}/W"] = layer.weights
        out[f"{prefix}/{i}/b"] = layer.biases
    return out


def network_from_arrays(prefix, activations, arrays):
    return [nn.DenseLayer(arrays[f"{prefix}/{i}/W"], arrays[f"{prefix}/{i}/b"], act)
            for i, act in enumerate(activations)]


def activations_of(network):
    return [layer.activation for layer in network]
