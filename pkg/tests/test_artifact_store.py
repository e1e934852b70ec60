"""
Tests for trace files, sidecars and run manifests.
"""
import json

import numpy as np
import pytest

from src.repository.artifact_store import (
    MANIFEST_NAME,
    TRACE_HEADER,
    RunManifest,
    TraceFormatError,
    file_digest,
    read_manifest,
    read_sidecar,
    read_trace,
    trace_filename,
    write_manifest,
    write_trace,
)
from src.repository.models import TimeTrace


def _trace():
    rng = np.random.default_rng(3)
    return TimeTrace(
        sample_rate=2000.0,
        samples=1e-3 * rng.standard_normal(500) + 0.25,
        seed=11,
        fingerprint="abc123",
        metadata={'beat_hz': 480.0, 'gamma_p': 204.0},
    )


class TestTraceFiles:
    """Test suite for writing and reading traces."""

    def setup_method(self):
        """Set up a short noisy trace."""
        self.trace = _trace()

    def test_filenames(self):
        """Test that the extension follows the format."""
        assert trace_filename('csv') == 'trace.csv'
        assert trace_filename('binary', 'run') == 'run.bin'
        with pytest.raises(ValueError):
            trace_filename('hdf5')

    @pytest.mark.parametrize("fmt", ['csv', 'binary'])
    def test_samples_preserved(self, tmp_path, fmt):
        """Test that samples, rate and seed survive a write and read."""
        trace_path, sidecar_path = write_trace(self.trace, tmp_path, fmt)

        loaded = read_trace(trace_path)

        assert sidecar_path.name == trace_path.name + '.meta'
        np.testing.assert_array_equal(loaded.samples, self.trace.samples)
        assert loaded.sample_rate == self.trace.sample_rate
        assert loaded.seed == 11
        assert loaded.fingerprint == "abc123"

    def test_csv_columns(self, tmp_path):
        """Test that the CSV holds time_s and volts columns."""
        trace_path, _ = write_trace(self.trace, tmp_path, 'csv')

        lines = trace_path.read_text().splitlines()

        assert lines[0] == 'time_s,volts'
        assert len(lines) == 501
        assert float(lines[2].split(',')[0]) == pytest.approx(1 / 2000.0)

    def test_sidecar_metadata(self, tmp_path):
        """Test that metadata is stored as key=value lines and read back as text."""
        trace_path, _ = write_trace(self.trace, tmp_path, 'csv')

        sidecar = read_sidecar(trace_path)
        loaded = read_trace(trace_path)

        assert sidecar['length'] == '500'
        assert float(sidecar['sample_rate_hz']) == 2000.0
        assert float(loaded.metadata['beat_hz']) == 480.0
        assert 'length' not in loaded.metadata

    def test_csv_without_sidecar(self, tmp_path):
        """Test that the sample rate is inferred from the time column."""
        trace_path, sidecar_path = write_trace(self.trace, tmp_path, 'csv')
        sidecar_path.unlink()

        loaded = read_trace(trace_path)

        assert loaded.sample_rate == pytest.approx(2000.0)
        assert loaded.seed is None

    def test_binary_header(self, tmp_path):
        """Test that the binary header carries magic, version, rate and length."""
        trace_path, _ = write_trace(self.trace, tmp_path, 'binary')

        magic, version, rate, length = TRACE_HEADER.unpack_from(trace_path.read_bytes())

        assert (magic, version, rate, length) == (b'NV', 1, 2000.0, 500)
        assert trace_path.stat().st_size == TRACE_HEADER.size + 8 * 500

    def test_bad_magic(self, tmp_path):
        """Test that a wrong magic is rejected."""
        trace_path, _ = write_trace(self.trace, tmp_path, 'binary')
        raw = bytearray(trace_path.read_bytes())
        raw[0:2] = b'XX'
        trace_path.write_bytes(bytes(raw))

        with pytest.raises(TraceFormatError) as exc_info:
            read_trace(trace_path)

        assert "bad magic" in str(exc_info.value)

    def test_bad_version(self, tmp_path):
        """Test that an unknown format version is rejected."""
        trace_path, _ = write_trace(self.trace, tmp_path, 'binary')
        raw = bytearray(trace_path.read_bytes())
        raw[2:4] = (7).to_bytes(2, 'little')
        trace_path.write_bytes(bytes(raw))

        with pytest.raises(TraceFormatError) as exc_info:
            read_trace(trace_path)

        assert "version" in str(exc_info.value)

    def test_truncated_payload(self, tmp_path):
        """Test that a payload shorter than the header length is rejected."""
        trace_path, sidecar_path = write_trace(self.trace, tmp_path, 'binary')
        trace_path.write_bytes(trace_path.read_bytes()[:-8])
        sidecar_path.unlink()

        with pytest.raises(TraceFormatError) as exc_info:
            read_trace(trace_path)

        assert "declares 500 samples" in str(exc_info.value)

    def test_short_file(self, tmp_path):
        """Test that a file shorter than the header is rejected."""
        path = tmp_path / 'trace.bin'
        path.write_bytes(b'NV')

        with pytest.raises(TraceFormatError):
            read_trace(path)

    def test_sidecar_length_mismatch(self, tmp_path):
        """Test that a sidecar disagreeing with the file length is rejected."""
        trace_path, sidecar_path = write_trace(self.trace, tmp_path, 'csv')
        sidecar_path.write_text(sidecar_path.read_text().replace('length=500', 'length=400'))

        with pytest.raises(TraceFormatError) as exc_info:
            read_trace(trace_path)

        assert "sidecar declares 400" in str(exc_info.value)

    def test_unknown_extension(self, tmp_path):
        """Test that unsupported extensions are rejected."""
        path = tmp_path / 'trace.txt'
        path.write_text('1,2\n')

        with pytest.raises(TraceFormatError):
            read_trace(path)

    def test_trace_format_error_is_value_error(self):
        """Test that format errors are ValueErrors."""
        assert issubclass(TraceFormatError, ValueError)


class TestManifest:
    """Test suite for run manifests."""

    def setup_method(self):
        """Set up a manifest."""
        self.manifest = RunManifest(
            command='simulate',
            config={'run': {'duration_s': 1.0}},
            seed=5,
            version='1.0.0',
            outputs={'trace.csv': 'f' * 64},
            wall_clock_s=0.5,
            arguments={'format': 'csv'},
        )

    def test_write_and_read(self, tmp_path):
        """Test that a manifest is written as JSON and read back unchanged."""
        path = write_manifest(self.manifest, tmp_path / 'run')

        assert path.name == MANIFEST_NAME
        assert json.loads(path.read_text())['command'] == 'simulate'
        assert read_manifest(path) == self.manifest

    def test_read_from_directory(self, tmp_path):
        """Test that a run directory resolves to its manifest."""
        write_manifest(self.manifest, tmp_path)

        assert read_manifest(tmp_path).seed == 5

    def test_no_temporary_files_left(self, tmp_path):
        """Test that the atomic write leaves only manifest.json behind."""
        write_manifest(self.manifest, tmp_path)
        write_manifest(self.manifest, tmp_path)

        assert [p.name for p in tmp_path.iterdir()] == [MANIFEST_NAME]

    def test_file_digest(self, tmp_path):
        """Test that digests are SHA-256 hex strings that follow the content."""
        path = tmp_path / 'a.txt'
        path.write_text('abc')
        first = file_digest(path)
        path.write_text('abd')

        assert first == 'ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad'
        assert file_digest(path) != first
