"""Reading and writing run artifacts: traces, spectra, reports and manifests."""
import csv
import json
import logging
import os
import hashlib
import struct
import tempfile
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .models import TimeTrace

logger = logging.getLogger(__name__)

TRACE_MAGIC = b'NV'
TRACE_VERSION = 1
# magic, version, sample_rate, length: 16 bytes, little-endian
TRACE_HEADER = struct.Struct('<2sHdI')
TRACE_FORMATS = ('csv', 'binary')
SIDECAR_SUFFIX = '.meta'
MANIFEST_NAME = 'manifest.json'

PathLike = Union[str, Path]


class TraceFormatError(ValueError):
    """Raised when a trace file has a bad magic, version or length."""
    pass


def trace_filename(fmt: str, stem: str = 'trace') -> str:
    if fmt not in TRACE_FORMATS:
        raise ValueError(f"format must be one of {TRACE_FORMATS}, got '{fmt}'")
    return f"{stem}.csv" if fmt == 'csv' else f"{stem}.bin"


def _sidecar_path(trace_path: Path) -> Path:
    return trace_path.with_name(trace_path.name + SIDECAR_SUFFIX)


def write_sidecar(trace: TimeTrace, trace_path: Path) -> Path:
    """Key=value metadata next to a trace file."""
    fields = {
        'sample_rate_hz': repr(float(trace.sample_rate)),
        'length': str(trace.samples.size),
        'seed': '' if trace.seed is None else str(trace.seed),
        'fingerprint': trace.fingerprint,
    }
    for key, value in sorted(trace.metadata.items()):
        fields[key] = repr(value) if isinstance(value, float) else str(value)
    path = _sidecar_path(trace_path)
    path.write_text("".join(f"{key}={value}\n" for key, value in fields.items()), encoding='utf-8')
    return path


def read_sidecar(trace_path: Path) -> Dict[str, str]:
    path = _sidecar_path(trace_path)
    if not path.is_file():
        return {}
    result = {}
    for line in path.read_text(encoding='utf-8').splitlines():
        if '=' in line:
            key, value = line.split('=', 1)
            result[key.strip()] = value.strip()
    return result


def write_trace(trace: TimeTrace, out_dir: PathLike, fmt: str = 'csv', stem: str = 'trace') -> List[Path]:
    """
    Write a trace and its sidecar.

    Args:
        trace: Trace to store
        out_dir: Output directory, created if missing
        fmt: 'csv' (time_s, volts) or 'binary'
        stem: File name without extension

    Returns:
        [trace_path, sidecar_path]
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / trace_filename(fmt, stem)
    if fmt == 'csv':
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(['time_s', 'volts'])
            for t, v in zip(trace.times, trace.samples):
                writer.writerow([repr(float(t)), repr(float(v))])
    else:
        with open(path, 'wb') as handle:
            handle.write(TRACE_HEADER.pack(TRACE_MAGIC, TRACE_VERSION, float(trace.sample_rate), trace.samples.size))
            handle.write(np.ascontiguousarray(trace.samples, dtype='<f8').tobytes())
    sidecar = write_sidecar(trace, path)
    logger.debug(f"Wrote trace | path={path} | format={fmt} | samples={trace.samples.size}")
    return [path, sidecar]


def _read_binary(path: Path) -> TimeTrace:
    raw = path.read_bytes()
    if len(raw) < TRACE_HEADER.size:
        raise TraceFormatError(f"{path}: file shorter than the {TRACE_HEADER.size}-byte header")
    magic, version, sample_rate, length = TRACE_HEADER.unpack_from(raw)
    if magic != TRACE_MAGIC:
        raise TraceFormatError(f"{path}: bad magic {magic!r}, expected {TRACE_MAGIC!r}")
    if version != TRACE_VERSION:
        raise TraceFormatError(f"{path}: unsupported version {version}, expected {TRACE_VERSION}")
    payload = raw[TRACE_HEADER.size:]
    if len(payload) != 8 * length:
        raise TraceFormatError(f"{path}: header declares {length} samples, payload holds {len(payload) / 8:g}")
    if not sample_rate > 0:
        raise TraceFormatError(f"{path}: sample rate {sample_rate} is not positive")
    return TimeTrace(sample_rate=sample_rate, samples=np.frombuffer(payload, dtype='<f8').astype(float))


def _read_csv(path: Path, sidecar: Dict[str, str]) -> TimeTrace:
    try:
        data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    except ValueError as e:
        raise TraceFormatError(f"{path}: {e}") from e
    if data.shape[1] != 2:
        raise TraceFormatError(f"{path}: expected columns time_s, volts, got {data.shape[1]} columns")
    if 'sample_rate_hz' in sidecar:
        sample_rate = float(sidecar['sample_rate_hz'])
    elif data.shape[0] > 1 and data[1, 0] > data[0, 0]:
        sample_rate = 1.0 / (data[1, 0] - data[0, 0])
    else:
        raise TraceFormatError(f"{path}: cannot infer sample rate")
    return TimeTrace(sample_rate=sample_rate, samples=data[:, 1])


def read_trace(path: PathLike) -> TimeTrace:
    """
    Load a trace written by :func:`write_trace`; the format follows the extension.

    Raises:
        TraceFormatError: On corrupt headers or contents
        OSError: If the file cannot be read
    """
    path = Path(path)
    sidecar = read_sidecar(path)
    if path.suffix == '.bin':
        trace = _read_binary(path)
    elif path.suffix == '.csv':
        trace = _read_csv(path, sidecar)
    else:
        raise TraceFormatError(f"{path}: unknown trace extension '{path.suffix}'")
    if 'length' in sidecar and int(sidecar['length']) != trace.samples.size:
        raise TraceFormatError(f"{path}: sidecar declares {sidecar['length']} samples, file holds {trace.samples.size}")
    seed = int(sidecar['seed']) if sidecar.get('seed') else None
    metadata = {k: v for k, v in sidecar.items() if k not in ('sample_rate_hz', 'length', 'seed', 'fingerprint')}
    return TimeTrace(
        sample_rate=trace.sample_rate,
        samples=trace.samples,
        seed=seed,
        fingerprint=sidecar.get('fingerprint', ''),
        metadata=metadata,
    )


def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    return path


def file_digest(path: PathLike) -> str:
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for block in iter(lambda: handle.read(1 << 20), b''):
            digest.update(block)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to re-run a command and check its outputs."""
    command: str
    config: Dict[str, Any]
    seed: Optional[int]
    version: str
    outputs: Dict[str, str] = field(default_factory=dict)   # file name -> sha256
    wall_clock_s: float = 0.0
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    arguments: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunManifest':
        return cls(**data)


def write_manifest(manifest: RunManifest, out_dir: PathLike) -> Path:
    """Write manifest.json atomically: a temp file in the same directory, then os.replace."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / MANIFEST_NAME
    fd, tmp_name = tempfile.mkstemp(prefix='.manifest-', suffix='.tmp', dir=out_dir)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as handle:
            json.dump(manifest.to_dict(), handle, indent=2, sort_keys=True)
            handle.write("\n")
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug(f"Wrote manifest | path={target} | outputs={len(manifest.outputs)}")
    return target


def read_manifest(path: PathLike) -> RunManifest:
    """Read a manifest from a file or from a run directory."""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    with open(path, encoding='utf-8') as handle:
        return RunManifest.from_dict(json.load(handle))
