import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from api.caching.report import validate_report


def run(*args, **kwargs):
    out = StringIO()
    call_command(*args, stdout=out, **kwargs)
    return out.getvalue()


class PointCommandTest(SimpleTestCase):
    def test_exact_and_decimal(self):
        lines = run('point', '--scheme', 'mds-a', '--n', '2', '--k', '2').splitlines()
        self.assertEqual(lines[0], "M=1/3 R=4/3")
        self.assertEqual(lines[1], "M=0.333333333333 R=1.33333333333")

    def test_config_file_with_flag_override(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.json"
            path.write_text(json.dumps({'scheme': 'vu', 'n': 2, 'k': 3, 'r': 1}))
            output = run('point', '--config', str(path), '--r', '2')
        self.assertTrue(output.startswith("M=2/3 R=1"))

    def test_parameter_error_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            run('point', '--scheme', 'mds-b', '--n', '2', '--k', '2')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_unreadable_config(self):
        with self.assertRaises(CommandError) as ctx:
            run('point', '--config', '/nonexistent/run.json')
        self.assertEqual(ctx.exception.returncode, 2)


class CurveCommandTest(SimpleTestCase):
    def test_writes_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "curve.csv"
            run('curve', '--n', '2', '--k', '3', '--samples', '9', '--output', str(path))
            lines = path.read_text().splitlines()
        self.assertEqual(lines[0], "M,R,series,valid")
        self.assertTrue(any(line.endswith(",optimal,cor2") for line in lines))

    def test_bad_samples(self):
        with self.assertRaises(CommandError) as ctx:
            run('curve', '--n', '2', '--k', '3', '--samples', '1')
        self.assertEqual(ctx.exception.returncode, 2)


class SimulateCommandTest(SimpleTestCase):
    def test_summary(self):
        summary = json.loads(run('simulate', '--scheme', 'mds-b', '--n', '3', '--k', '3', '--demand', '0,1,1'))
        self.assertEqual(summary['demand'], [0, 1, 1])
        self.assertTrue(all(v['ok'] for v in summary['decoded']))
        self.assertEqual(summary['payload_segments'], 16)


class AuditCommandTest(SimpleTestCase):
    def test_correctness_report(self):
        report = json.loads(run('audit', 'correctness', '--scheme', 'mds-a', '--n', '2', '--k', '2',
                                '--trials', '3', '--seed', '11'))
        validate_report(report)
        self.assertTrue(report['pass'])
        self.assertEqual(report['seed'], 11)

    def test_rank_is_the_default_for_mds(self):
        report = json.loads(run('audit', 'privacy', '--scheme', 'mds-a', '--n', '2', '--k', '2', '--trials', '1'))
        self.assertEqual(report['mode'], "rank")

    def test_output_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "report.json"
            run('audit', 'colluding', '--scheme', 'vu', '--n', '2', '--k', '2', '--r', '1', '--colluders', '0',
                '--output', str(path))
            self.assertTrue(json.loads(path.read_text())['pass'])

    @override_settings(PRIVCACHE_ENUMERATION_CEILING=1000)
    def test_infeasible_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            run('audit', 'privacy', '--scheme', 'vu', '--n', '2', '--k', '2', '--r', '1')
        self.assertEqual(ctx.exception.returncode, 3)

    def test_mode_mismatch_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            run('audit', 'colluding', '--scheme', 'mds-a', '--n', '2', '--k', '2', '--colluders', '0')
        self.assertEqual(ctx.exception.returncode, 2)
