"""
Unit tests for markdown report generation
"""

import math
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import build_experiment_config
from report_generator import ReportGenerator, format_number


class TestFormatNumber(unittest.TestCase):
    """Test table cell formatting"""

    def test_values(self):
        self.assertEqual(format_number(True), '✅ pass')
        self.assertEqual(format_number(np.bool_(False)), '❌ fail')
        self.assertEqual(format_number(np.int64(12)), '12')
        self.assertEqual(format_number(1.0 / 3.0), '0.333333')
        self.assertEqual(format_number(math.nan), 'nan')
        self.assertEqual(format_number(-math.inf), '-inf')
        self.assertEqual(format_number('cir'), 'cir')


class TestReportGenerator(unittest.TestCase):
    """Test report rendering and saving"""

    def test_render(self):
        config = build_experiment_config('simulate', overrides={'workers': 8, 'seed': 4})
        report = ReportGenerator('Demo', config)
        report.add_section('Notes', 'Some text')
        report.add_table(pd.DataFrame({'time': [0.5], 'pass': [True]}), heading='Table')
        report.add_verdict('check', False, 'detail')
        text = report.render()
        self.assertTrue(text.startswith('# 📊 Demo'))
        self.assertIn('**Seed**: `4`', text)
        self.assertIn('| 0.5 | ✅ pass |', text)
        self.assertIn('- ❌ **check**: detail', text)
        self.assertNotIn('workers', text)

    def test_save(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = ReportGenerator('Demo').add_key_values('KV', {'a': 1.5}).save(Path(tmp) / 'sub' / 'r.md')
            self.assertIn('| a | 1.5 |', path.read_text(encoding='utf-8'))


def run_tests():
    """Run all tests"""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()

    suite.addTests(loader.loadTestsFromTestCase(TestFormatNumber))
    suite.addTests(loader.loadTestsFromTestCase(TestReportGenerator))

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    sys.exit(0 if success else 1)
