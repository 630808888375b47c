"""Binary tensor files, sample manifests, and run-directory serialization.

Tensor file layout (all little-endian):
    magic   4 bytes  b"DTEN"
    version u32      1
    order   u32      N
    extents u64 * N
    payload f64 * prod(extents), first index fastest
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .solver import FactorSet

MAGIC = b"DTEN"
VERSION = 1


def write_tensor(path, t: np.ndarray) -> None:
    t = np.asarray(t, dtype=np.float64)
    if t.ndim < 1:
        t = t.reshape(1)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, t.ndim))
        fh.write(struct.pack(f"<{t.ndim}Q", *t.shape))
        fh.write(np.asfortranarray(t).tobytes(order="F"))


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head != MAGIC:
            raise ValueError(f"{path}: bad magic {head!r}")
        version, order = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        if order < 1:
            raise ValueError(f"{path}: invalid order {order}")
        shape = struct.unpack(f"<{order}Q", fh.read(8 * order))
        if any(s < 1 for s in shape):
            raise ValueError(f"{path}: invalid extents {shape}")
        count = int(np.prod(shape, dtype=np.int64))
        payload = fh.read(8 * count)
        if len(payload) != 8 * count:
            raise ValueError(f"{path}: truncated payload "
                             f"({len(payload)} bytes, expected {8 * count})")
        flat = np.frombuffer(payload, dtype="<f8", count=count)
        return np.reshape(flat, shape, order="F").copy()


def write_manifest(path, rows) -> None:
    """rows: iterable of (relative path, label-or-None)."""
    with open(path, "w", newline="") as fh:
        for rel, label in rows:
            fh.write(f"{rel},{label}\n" if label is not None else f"{rel}\n")


def load_samples(manifest_path) -> tuple[np.ndarray, list[str] | None]:
    """Load all tensors listed in a manifest CSV (path[,label] per row).

    Paths are resolved relative to the manifest's directory. All tensors must
    share one shape.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    rows = []
    with open(manifest_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            label = parts[1].strip() if len(parts) > 1 and parts[1].strip() else None
            rows.append((lineno, parts[0].strip(), label))
    if not rows:
        raise ValueError(f"{manifest_path}: empty manifest")

    tensors = []
    labels: list[str | None] = []
    shape = None
    for lineno, rel, label in rows:
        t = read_tensor(base / rel)
        if shape is None:
            shape = t.shape
        elif t.shape != shape:
            raise ValueError(
                f"{manifest_path}: row {lineno} ({rel}) has shape {t.shape}, "
                f"expected {shape}"
            )
        tensors.append(t)
        labels.append(label)
    label_list = None if all(l is None for l in labels) else [l or "" for l in labels]
    return np.stack(tensors), label_list


def save_run(out_dir, result, summary: dict) -> None:
    """Write factors, cores, trace CSV and the JSON run summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for n, u in enumerate(result.factors.as_list(), start=1):
        write_tensor(out / f"u{n}.dten", u)
    for i in range(result.cores.shape[0]):
        write_tensor(out / f"core_{i:04d}.dten", result.cores[i])
    result.trace.save_csv(out / "trace.csv")
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_run(run_dir) -> tuple[FactorSet, np.ndarray, dict, list[dict]]:
    """Read back a decompose run directory: (factors, cores, summary, trace rows)."""
    run = Path(run_dir)
    factors = FactorSet(*[read_tensor(run / f"u{n}.dten") for n in (1, 2, 3)])
    core_paths = sorted(run.glob("core_*.dten"))
    if not core_paths:
        raise ValueError(f"{run}: no core tensors found")
    cores = np.stack([read_tensor(p) for p in core_paths])
    with open(run / "summary.json") as fh:
        summary = json.load(fh)
    trace_rows = []
    with open(run / "trace.csv") as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            if line.strip():
                trace_rows.append(dict(zip(header, (float(v) for v in line.split(",")))))
    return factors, cores, summary, trace_rows
