"""
Tests for the nvhet command line: output lines and exit codes.
"""
import json

import pytest

from src.cli.main import main, build_parser
from src.pipeline.config import config
from src.repository.artifact_store import read_manifest, write_manifest


def _bad_scenario(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps({"run": {"duration_s": 1.0, "bogus": 1}}))
    return path


class TestParser:
    """Test suite for argument parsing."""

    def test_subcommands(self):
        """Test that every command is registered."""
        parser = build_parser()

        for argv in (['schema'], ['report'], ['replay', 'm.json', '--out', 'o'],
                     ['simulate', '--config', 'x', '--out', 'o'], ['analyze', 't.csv', '--out', 'o'],
                     ['sweep', '--config', 'x', '--parameter', 'run.seed', '--out', 'o']):
            assert parser.parse_args(argv).command == argv[0]

    def test_unknown_command(self):
        """Test that argparse rejects unknown commands with exit status 2."""
        with pytest.raises(SystemExit) as exc_info:
            main(['calibrate'])

        assert exc_info.value.code == 2

    def test_sweep_values_list(self):
        """Test that --values accepts a comma-separated list."""
        args = build_parser().parse_args(
            ['sweep', '--config', 'x', '--parameter', 'laser.power_w', '--values', '0.5,0.8', '--out', 'o']
        )

        assert args.values == [0.5, 0.8]


class TestSchemaAndReport:
    """Test suite for commands without simulation."""

    def test_schema_stdout(self, capsys):
        """Test that the schema is printed as JSON."""
        assert main(['schema']) == 0

        schema = json.loads(capsys.readouterr().out)
        assert 'run' in schema['properties']

    def test_schema_file(self, tmp_path):
        """Test that --out writes the schema to a file."""
        out = tmp_path / 'schema.json'

        assert main(['schema', '--out', str(out)]) == 0
        assert json.loads(out.read_text())['required'] == ['run']

    def test_report_defaults(self, capsys):
        """Test that the default report is the nominal operating point."""
        assert main(['report']) == 0

        lines = dict(line.split('=', 1) for line in capsys.readouterr().out.splitlines())
        assert float(lines['bandwidth_hz']) == pytest.approx(106.1, rel=1e-3)
        assert lines['channels'] == '1'

    def test_report_with_band(self, capsys, tmp_path):
        """Test that a band adds the grid plan and --out saves the text."""
        out = tmp_path / 'report.txt'

        assert main(['report', '--delta', '480', '--band', '17000', '--out', str(out)]) == 0

        printed = capsys.readouterr().out
        assert 'grid_channels=9' in printed
        assert out.read_text() == printed

    def test_report_from_single_tone_scenario(self, capsys):
        """Test that a scenario without a signal tone cannot define a report."""
        assert main(['report', '--config', 'gated_single_tone']) == 2
        assert 'nvhet report:' in capsys.readouterr().err


class TestExitCodes:
    """Test suite for error exit codes."""

    def test_unknown_preset(self, capsys, tmp_path):
        """Test that an unknown preset exits with 2."""
        assert main(['simulate', '--config', 'no_such_preset', '--out', str(tmp_path)]) == 2
        assert 'no_such_preset' in capsys.readouterr().err

    def test_invalid_scenario(self, capsys, tmp_path):
        """Test that schema violations exit with 2 and name the key."""
        assert main(['simulate', '--config', str(_bad_scenario(tmp_path)), '--out', str(tmp_path / 'o')]) == 2
        assert 'run.bogus' in capsys.readouterr().err

    def test_missing_trace(self, capsys, tmp_path):
        """Test that a missing trace exits with 4."""
        assert main(['analyze', str(tmp_path / 'missing.csv'), '--out', str(tmp_path / 'o')]) == 4
        assert 'nvhet analyze:' in capsys.readouterr().err

    def test_degenerate_sweep(self, tmp_path):
        """Test that a degenerate sweep range exits with 2."""
        argv = ['sweep', '--config', 'zero_tone', '--parameter', 'laser.power_w',
                '--start', '0.5', '--stop', '0.5', '--points', '3', '--out', str(tmp_path)]

        assert main(argv) == 2

    def test_sweep_without_values(self, tmp_path):
        """Test that a sweep needs values or a range."""
        argv = ['sweep', '--config', 'zero_tone', '--parameter', 'laser.power_w', '--out', str(tmp_path)]

        assert main(argv) == 2


class TestWorkflows:
    """Test suite for end-to-end command sequences."""

    def test_simulate_then_analyze(self, capsys, tmp_path):
        """Test that a simulated trace can be analyzed from its printed path."""
        assert main(['simulate', '--config', 'zero_tone', '--out', str(tmp_path / 'sim')]) == 0
        printed = dict(line.split('=', 1) for line in capsys.readouterr().out.splitlines())

        assert main(['analyze', printed['trace'], '--out', str(tmp_path / 'ana')]) == 0

        analysis = capsys.readouterr().out
        assert 'samples=2000' in analysis
        assert 'manifest=' in analysis
        assert (tmp_path / 'ana' / 'spectrum.csv').is_file()

    def test_sweep_table(self, capsys, tmp_path):
        """Test that a two-point sweep writes the merged table."""
        argv = ['sweep', '--config', 'zero_tone', '--parameter', 'laser.power_w',
                '--values', '0.5,0.8', '--seed', '10', '--out', str(tmp_path)]

        assert main(argv) == 0

        assert 'table=' in capsys.readouterr().out
        rows = (tmp_path / 'sweep.csv').read_text().splitlines()
        assert len(rows) == 3
        assert read_manifest(tmp_path).seed == 10

    def test_replay_identical(self, capsys, tmp_path):
        """Test that replaying a simulation prints replay=identical."""
        assert main(['simulate', '--config', 'zero_tone', '--seed', '4', '--out', str(tmp_path / 'a')]) == 0
        capsys.readouterr()

        assert main(['replay', str(tmp_path / 'a'), '--out', str(tmp_path / 'b')]) == 0
        assert 'replay=identical' in capsys.readouterr().out

    def test_replay_different(self, capsys, tmp_path):
        """Test that a mismatching replay prints the differing files and exits with 3."""
        assert main(['simulate', '--config', 'zero_tone', '--out', str(tmp_path / 'a')]) == 0
        manifest = read_manifest(tmp_path / 'a')
        manifest.outputs['scenario.json'] = '0' * 64
        write_manifest(manifest, tmp_path / 'a')
        capsys.readouterr()

        assert main(['replay', str(tmp_path / 'a' / 'manifest.json'), '--out', str(tmp_path / 'b')]) == 3

        out = capsys.readouterr().out
        assert 'replay=different' in out
        assert 'mismatch=scenario.json' in out

    def test_default_output_directory(self, monkeypatch, tmp_path):
        """Test that without --out the command writes under NVHET_OUTPUT_DIR/<command>."""
        monkeypatch.setattr(config.paths, 'output_dir', str(tmp_path))

        assert main(['simulate', '--config', 'zero_tone']) == 0
        assert (tmp_path / 'simulate' / 'manifest.json').is_file()
