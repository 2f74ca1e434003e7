"""Checkpoint files: a textual manifest followed by a raw float64 blob.

Layout (single file):

    navgate-checkpoint v1
    meta <key> <value>          # flat metadata, sorted by key
    param <name> <d0,d1,..> <0|1 trainable>
    blob_bytes <N>
    ---
    <N bytes of little-endian float64, parameters concatenated in manifest order>

Round-trips are bit-exact; values are stored exactly as held in memory.
"""

from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np

from .autodiff.params import ParameterStore
from .errors import CheckpointError

MAGIC = "navgate-checkpoint v1"


def _encode_meta_value(v) -> str:
    s = str(v)
    if "\n" in s:
        raise CheckpointError("metadata values must be single-line")
    return s


def save_checkpoint(path: str | os.PathLike, store: ParameterStore, meta: dict[str, str]) -> None:
    head = io.StringIO()
    head.write(MAGIC + "\n")
    for key in sorted(meta):
        if " " in key:
            raise CheckpointError(f"metadata key may not contain spaces: {key!r}")
        head.write(f"meta {key} {_encode_meta_value(meta[key])}\n")

    blobs = []
    for name, t in store.items():
        if " " in name:
            raise CheckpointError(f"parameter name may not contain spaces: {name!r}")
        shape = ",".join(str(d) for d in t.data.shape) or "scalar"
        head.write(f"param {name} {shape} {1 if t.requires_grad else 0}\n")
        blobs.append(np.ascontiguousarray(t.data, dtype="<f8").tobytes())
    blob = b"".join(blobs)
    head.write(f"blob_bytes {len(blob)}\n---\n")

    tmp = Path(path).with_suffix(Path(path).suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(head.getvalue().encode("utf-8"))
        f.write(blob)
    os.replace(tmp, path)


def load_checkpoint(path: str | os.PathLike) -> tuple[ParameterStore, dict[str, str]]:
    with open(path, "rb") as f:
        raw = f.read()
    sep = raw.find(b"\n---\n")
    if sep < 0:
        raise CheckpointError(f"{path}: missing manifest/blob separator")
    try:
        lines = raw[:sep].decode("utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise CheckpointError(f"{path}: manifest is not valid utf-8") from e
    blob = raw[sep + 5:]

    if not lines or lines[0] != MAGIC:
        raise CheckpointError(f"{path}: bad magic line")
    meta: dict[str, str] = {}
    entries: list[tuple[str, tuple[int, ...], bool]] = []
    declared = None
    for line in lines[1:]:
        kind, _, rest = line.partition(" ")
        if kind == "meta":
            key, _, value = rest.partition(" ")
            meta[key] = value
        elif kind == "param":
            try:
                name, shape_s, flag = rest.split(" ")
            except ValueError as e:
                raise CheckpointError(f"{path}: malformed param line {line!r}") from e
            shape = () if shape_s == "scalar" else tuple(int(d) for d in shape_s.split(","))
            entries.append((name, shape, flag == "1"))
        elif kind == "blob_bytes":
            declared = int(rest)
        else:
            raise CheckpointError(f"{path}: unknown manifest line {line!r}")
    if declared is None or declared != len(blob):
        raise CheckpointError(
            f"{path}: blob length mismatch (declared {declared}, found {len(blob)})")

    store = ParameterStore()
    offset = 0
    for name, shape, trainable in entries:
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(blob):
            raise CheckpointError(f"{path}: blob truncated at parameter {name!r}")
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shape)
        store.add(name, arr.copy(), trainable=trainable)
        offset += nbytes
    if offset != len(blob):
        raise CheckpointError(f"{path}: {len(blob) - offset} trailing bytes in blob")
    return store, meta
