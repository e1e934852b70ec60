# Artifact models and storage
from .models import PopulationTrajectory, TimeTrace, Spectrum
from .artifact_store import (
    TraceFormatError,
    RunManifest,
    write_trace,
    read_trace,
    write_text,
    write_manifest,
    read_manifest,
    file_digest,
    trace_filename,
)

__all__ = [
    'PopulationTrajectory',
    'TimeTrace',
    'Spectrum',
    'TraceFormatError',
    'RunManifest',
    'write_trace',
    'read_trace',
    'write_text',
    'write_manifest',
    'read_manifest',
    'file_digest',
    'trace_filename',
]
