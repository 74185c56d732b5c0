"""
End-to-End (E2E) tests for tdasum.
Runs manage.py in a subprocess the way a user would: exit codes, and
digest-identical outputs for every stochastic command across thread counts.
"""

import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import pytest
from django.test import SimpleTestCase

from core.fileio import write_curve, write_field
from core.testing import constant_curve, ring_field

ROOT = Path(__file__).resolve().parent.parent


def manage(*args, cwd=None):
    env = dict(os.environ, DJANGO_SETTINGS_MODULE="tdasum.test_settings")
    env.pop("TDASUM_THREADS", None)
    return subprocess.run(
        [sys.executable, str(ROOT / "manage.py"), *args],
        cwd=cwd or ROOT, env=env, capture_output=True, text=True, timeout=300,
    )


@pytest.mark.e2e
class CommandLineE2ETest(SimpleTestCase):
    """Exit codes seen by the shell"""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_success(self):
        """A diagram run exits 0 and reports what it wrote"""
        field = write_field(ring_field(), self.tmp / "ring.txt")
        result = manage("diagram", "--field", str(field), "--out-dir", str(self.tmp / "out"))
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertIn("Wrote 1 files", result.stdout)

    def test_usage_error(self):
        """A bad flag exits 2"""
        result = manage("band", "--alpha", "2", "--seed", "1", "x.csv", "--out-dir", str(self.tmp / "out"))
        self.assertEqual(result.returncode, 2)

    def test_missing_seed(self):
        """Stochastic commands without --seed exit 2"""
        result = manage("simulate_stix", "--out-dir", str(self.tmp / "out"))
        self.assertEqual(result.returncode, 2)
        self.assertIn("--seed", result.stderr)

    def test_data_error(self):
        """A missing input exits 3 and writes nothing"""
        result = manage("diagram", "--field", str(self.tmp / "absent.txt"), "--out-dir", str(self.tmp / "out"))
        self.assertEqual(result.returncode, 3)
        self.assertFalse((self.tmp / "out").exists())

    def test_help_lists_defaults(self):
        """--help shows every default"""
        result = manage("test", "--help")
        self.assertEqual(result.returncode, 0)
        text = " ".join(result.stdout.split())
        self.assertIn("(default: 1000)", text)
        self.assertIn("--metric-weight", text)


@pytest.mark.e2e
@pytest.mark.slow
class DeterminismE2ETest(SimpleTestCase):
    """Same seed, one thread or four: identical output digests"""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.a = [str(write_curve(constant_curve(v), self.tmp / f"a{i}.csv")) for i, v in enumerate((0.0, 0.4, 1.0))]
        self.b = [str(write_curve(constant_curve(v), self.tmp / f"b{i}.csv")) for i, v in enumerate((0.2, 1.5, 2.0))]
        config = self.tmp / "stix.env"
        config.write_text(
            "experiment=stix\nseed=5\nnull_df=5\nalt_df=7\nimages_per_group=2\nreps=3\nB=20\n"
            "rows=16\ncols=16\nn_sticks=6\ngrid_size=32\n",
            encoding="utf-8",
        )
        self.config = str(config)

    def tearDown(self):
        self._tmp.cleanup()

    def outputs(self, *args, threads, out):
        result = manage(*args, "--threads", str(threads), "--out-dir", str(self.tmp / out))
        self.assertEqual(result.returncode, 0, result.stderr)
        return json.loads((self.tmp / out / "manifest.json").read_text())["outputs"]

    def assert_thread_invariant(self, *args):
        one = self.outputs(*args, threads=1, out="one")
        again = self.outputs(*args, threads=1, out="again")
        four = self.outputs(*args, threads=4, out="four")
        self.assertEqual(one, again)
        self.assertEqual(one, four)

    def test_simulate_stix(self):
        """STIX images"""
        self.assert_thread_invariant("simulate_stix", "--seed", "3", "--count", "3", "--rows", "24", "--cols", "24")

    def test_simulate_gland(self):
        """Gland clouds"""
        self.assert_thread_invariant("simulate_gland", "--seed", "3", "--count", "3", "--n-points", "60")

    def test_permutation_test(self):
        """Permutation test replicates"""
        self.assert_thread_invariant("test", "--group-a", *self.a, "--group-b", *self.b, "--B", "200", "--seed", "8")

    def test_band(self):
        """Bootstrap band"""
        self.assert_thread_invariant("band", *self.a, *self.b, "--B", "200", "--seed", "8", "--mode", "variable")

    def test_experiment(self):
        """STIX power table"""
        self.assert_thread_invariant("experiment", self.config)
