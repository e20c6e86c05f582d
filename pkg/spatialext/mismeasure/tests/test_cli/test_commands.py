"""
********************************************************************************
* Name: test_commands.py
* Created On: March 20, 2026
********************************************************************************
"""
import contextlib
import io
import json
import tempfile
import unittest
from pathlib import Path
from unittest import mock

from ...cli import commands
from ...exceptions import BootstrapAbortedError, ConvergenceError, DataError, InvalidSpecError, SuiteFailedError


class ParserTests(unittest.TestCase):

    def setUp(self):
        self.parser = commands.build_parser()

    def test_estimate_flags(self):
        args = self.parser.parse_args(['estimate', '--data', 'd.csv', '--no-bootstrap', '--ds-values', '1', '2.5',
                                       '--i-n', '2', '--model', 'probit', '-vv'])
        self.assertEqual('d.csv', args.data)
        self.assertFalse(args.bootstrap)
        self.assertEqual([1.0, 2.5], args.ds_values)
        self.assertEqual(2, args.i_n)
        self.assertEqual('probit', args.model_kind)
        self.assertEqual(2, args.verbose)
        self.assertIsNone(args.select_range)
        self.assertIsNone(args.seed)

    def test_bench(self):
        args = self.parser.parse_args(['bench', 'table1', '--reps', '3', '--B', '20'])
        self.assertEqual('table1', args.suite)
        self.assertEqual(3, args.reps)
        self.assertEqual(20, args.B)

    def test_unknown_suite(self):
        with contextlib.redirect_stderr(io.StringIO()), self.assertRaises(SystemExit):
            self.parser.parse_args(['bench', 'nope'])


class MainTests(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)
        self.out = self.directory.name

    def _main_with(self, error):
        with mock.patch.dict(commands.COMMANDS, {'simulate': mock.Mock(side_effect=error)}):
            return commands.main(['simulate', '--out', self.out])

    def test_exit_codes(self):
        self.assertEqual(commands.EXIT_DATA, self._main_with(DataError('bad column')))
        self.assertEqual(commands.EXIT_DATA, self._main_with(FileNotFoundError('absent')))
        self.assertEqual(commands.EXIT_CONVERGENCE, self._main_with(ConvergenceError('no fit')))
        self.assertEqual(commands.EXIT_CONVERGENCE, self._main_with(BootstrapAbortedError('all failed')))
        self.assertEqual(commands.EXIT_CONVERGENCE, self._main_with(SuiteFailedError('10%')))
        with self.assertLogs('mismeasure', level='ERROR'):
            self.assertEqual(commands.EXIT_INTERNAL, self._main_with(RuntimeError('boom')))

    def test_config_error(self):
        self.assertEqual(commands.EXIT_CONFIG, commands.main(['estimate', '--out', self.out]))
        self.assertEqual(commands.EXIT_CONFIG, commands.main(['simulate', '--design', 'nope', '--out', self.out]))
        missing = str(Path(self.out, 'absent.json'))
        self.assertEqual(commands.EXIT_CONFIG, commands.main(['simulate', '--config', missing]))

    def test_missing_dataset(self):
        missing = str(Path(self.out, 'absent.csv'))
        self.assertEqual(commands.EXIT_DATA, commands.main(['estimate', '--data', missing, '--out', self.out]))

    def test_simulate(self):
        code = commands.main(['simulate', '--design', 'linear', '--n', '200', '--seed', '5', '--out', self.out])
        self.assertEqual(commands.EXIT_OK, code)
        for name in ('linear.csv', 'linear.json', 'linear.geojson'):
            self.assertTrue(Path(self.out, name).exists(), name)
        sidecar = json.loads(Path(self.out, 'linear.json').read_text())
        self.assertEqual(5, sidecar['attributes']['run']['seed'])
        locations = json.loads(Path(self.out, 'linear.geojson').read_text())
        self.assertEqual(200, len(locations['features']))

    def test_bench_without_suite(self):
        with self.assertRaises(InvalidSpecError) as cm:
            commands.cmd_bench(commands.resolve_config(out=self.out))
        self.assertIn('suite', str(cm.exception))


if __name__ == '__main__':
    unittest.main()
