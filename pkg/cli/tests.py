"""
Tests for the management commands, the suite runner and run manifests.
"""
import csv
import hashlib
import json
from io import StringIO
from pathlib import Path
from tempfile import TemporaryDirectory

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from anosov2d.manifold import in_manifold
from schedule.engine import build_schedule

from .exports import column_schema
from .runs import CERTIFICATE_FAILURE, INFEASIBLE, USAGE, parse_config, sha256_file
from .serializers import BUILD, EXPORT, VERIFY, RunConfigSerializer
from .suites import MAX_FAILURES, SUITE_NAMES, SuiteContext, SuiteResult, UnknownSuiteError, run_suite, run_suites


def read_json(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def read_csv(path: Path) -> list[dict]:
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


class RunConfigTests(SimpleTestCase):
    def test_build_requires_stages(self):
        serializer = RunConfigSerializer(data={"command": BUILD})
        self.assertFalse(serializer.is_valid())
        self.assertIn("stages", serializer.errors)

    def test_theta_must_exceed_one(self):
        serializer = RunConfigSerializer(data={"command": BUILD, "stages": 1, "theta": "1"})
        self.assertFalse(serializer.is_valid())
        self.assertIn("theta", serializer.errors)

    def test_verify_needs_a_suite(self):
        serializer = RunConfigSerializer(data={"command": VERIFY, "stages": 1})
        self.assertFalse(serializer.is_valid())
        self.assertIn("suites", serializer.errors)

    def test_duplicate_suites_are_dropped(self):
        config = parse_config(VERIFY, {"stages": 1, "suites": ["tiling", "gluing", "tiling"]})
        self.assertEqual(config.suites, ("tiling", "gluing"))

    def test_rejected_options_are_usage_errors(self):
        with self.assertRaises(CommandError) as caught:
            parse_config(EXPORT, {"stages": 1})
        self.assertEqual(caught.exception.returncode, USAGE)

    def test_config_dict_is_json_ready(self):
        config = parse_config(BUILD, {"stages": 2, "theta": "33/20"})
        data = config.to_dict()
        self.assertEqual(data["theta"], "33/20")
        json.dumps(data)


class SuiteRunnerTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.ctx = SuiteContext(schedule=build_schedule(1, "toy"), grid=200, tiling_depth=6)

    def test_failures_are_capped(self):
        result = SuiteResult("demo")
        for k in range(3 * MAX_FAILURES):
            result.check(False, f"failure {k}")
        self.assertFalse(result.passed)
        self.assertEqual(len(result.failures), MAX_FAILURES)

    def test_passing_check_keeps_result_green(self):
        result = SuiteResult("demo")
        self.assertTrue(result.check(True, "never recorded"))
        self.assertTrue(result.passed)
        self.assertEqual(result.failures, [])

    def test_unknown_suite(self):
        with self.assertRaises(UnknownSuiteError):
            run_suite("no-such-suite", self.ctx)
        with self.assertRaises(UnknownSuiteError):
            run_suites(["tiling", "no-such-suite"], self.ctx)

    def test_every_suite_is_registered(self):
        self.assertEqual(len(SUITE_NAMES), 12)

    def test_tiling(self):
        result = run_suite("tiling", self.ctx)
        self.assertTrue(result.passed, result.failures)
        self.assertEqual(result.metrics["depth"], 6)

    def test_markov_consistency(self):
        result = run_suite("markov-consistency", self.ctx)
        self.assertTrue(result.passed, result.failures)

    def test_psi_properties(self):
        result = run_suite("psi-properties", self.ctx)
        self.assertTrue(result.passed, result.failures)

    def test_coupling_cascade(self):
        result = run_suite("coupling-cascade", self.ctx)
        self.assertTrue(result.passed, result.failures)

    def test_correction_keeps_lebesgue_shares(self):
        """Test: depth-N_2 cylinders get their share of H_{M_1}(C_w) to 2^-40 on two toy blocks."""
        ctx = SuiteContext(schedule=build_schedule(2, "toy"), grid=200, word_limit=1 << 16)
        result = run_suite("correction-flatness", ctx)
        first = result.metrics["corrections"][0]
        self.assertEqual(first["t"], 1)
        self.assertEqual(first["share_depth"], ctx.schedule.N(2))
        self.assertGreater(first["share_cylinders"], 0)
        self.assertLessEqual(first["worst_share_defect"], 2.0 ** -40)
        self.assertFalse([f for f in result.failures if "share" in f], result.failures)
        self.assertNotIn("share_depth", result.metrics["corrections"][-1])

    def test_stage_drift_envelope(self):
        """Test: log g'_{N_2}/g'_{N_1} stays inside M_1 log lambda_2 + 2^(-N_1+2)."""
        ctx = SuiteContext(schedule=build_schedule(2, "toy"), grid=200, word_limit=1 << 16)
        result = run_suite("derivative-band", ctx)
        drift = result.metrics["drift"]
        self.assertEqual([row["t"] for row in drift], [1])
        self.assertGreaterEqual(drift[0]["margin"], 0.0)
        self.assertGreater(drift[0]["worst_log_ratio"], 0.0)
        self.assertFalse([f for f in result.failures if "log g'" in f], result.failures)

    def test_report_omits_latency(self):
        result = run_suite("tiling", self.ctx)
        self.assertNotIn("latency_ms", result.to_dict())


class BuildScheduleCommandTests(SimpleTestCase):
    def test_toy_schedule_is_written(self):
        """Test: stages=1, toy -> exit 0 with schedule.json and a manifest."""
        with TemporaryDirectory() as tmp:
            out = StringIO()
            call_command("build_schedule", stages=1, profile="toy", out=tmp, stdout=out)
            directory = Path(tmp)
            schedule = read_json(directory / "schedule.json")
            manifest = read_json(directory / "manifest.json")

            self.assertIn("Schedule ready", out.getvalue())
            self.assertEqual(len(schedule["stages"]), 1)
            self.assertEqual(manifest["command"], BUILD)
            self.assertEqual(manifest["arguments"]["stages"], 1)
            entry = manifest["outputs"][0]
            self.assertEqual(entry["path"], "schedule.json")
            self.assertEqual(entry["sha256"], sha256_file(directory / "schedule.json"))
            self.assertTrue(entry["passed"])

    def test_two_toy_blocks(self):
        """Test: stages=2, toy -> exit 0, file written."""
        with TemporaryDirectory() as tmp:
            call_command("build_schedule", stages=2, out=tmp, stdout=StringIO())
            schedule = read_json(Path(tmp) / "schedule.json")
        self.assertEqual([stage["t"] for stage in schedule["stages"]], [1, 2])

    def test_single_strict_block(self):
        """Test: stages=1, strict -> exit 0 with N1 = 21."""
        with TemporaryDirectory() as tmp:
            call_command("build_schedule", stages=1, profile="strict", out=tmp, stdout=StringIO())
            schedule = read_json(Path(tmp) / "schedule.json")
        self.assertEqual(schedule["stages"][0]["N"], 21)

    def test_zero_stages_is_a_usage_error(self):
        with TemporaryDirectory() as tmp, self.assertRaises(CommandError) as caught:
            call_command("build_schedule", stages=0, out=tmp, stdout=StringIO())
        self.assertEqual(caught.exception.returncode, USAGE)

    def test_infeasible_strict_schedule(self):
        """Test: stages=2, strict -> exit 3."""
        with TemporaryDirectory() as tmp, self.assertRaises(CommandError) as caught:
            call_command("build_schedule", stages=2, profile="strict", out=tmp, stdout=StringIO())
        self.assertEqual(caught.exception.returncode, INFEASIBLE)
        self.assertIn("toy", str(caught.exception))

    def test_builds_are_reproducible(self):
        digests = []
        for _ in range(2):
            with TemporaryDirectory() as tmp:
                call_command("build_schedule", stages=1, out=tmp, stdout=StringIO())
                digests.append(hashlib.sha256((Path(tmp) / "schedule.json").read_bytes()).hexdigest())
        self.assertEqual(digests[0], digests[1])


class VerifyCommandTests(SimpleTestCase):
    def test_cheap_suites_pass(self):
        with TemporaryDirectory() as tmp:
            call_command("build_schedule", stages=1, out=tmp, stdout=StringIO())
            schedule = str(Path(tmp) / "schedule.json")
            out = StringIO()
            call_command(
                "verify", schedule=schedule, suites=["tiling", "markov-consistency", "coupling-cascade", "psi-properties"],
                grid=200, depth=6, out=tmp, stdout=out,
            )
            report = read_json(Path(tmp) / "report.json")
            manifest = read_json(Path(tmp) / "manifest.json")

        self.assertTrue(report["passed"])
        self.assertEqual([row["suite"] for row in report["suites"]], ["tiling", "markov-consistency", "coupling-cascade", "psi-properties"])
        self.assertEqual(manifest["command"], VERIFY)
        self.assertIn("All 4 suites passed", out.getvalue())

    def test_unknown_suite_is_a_usage_error(self):
        with TemporaryDirectory() as tmp, self.assertRaises(CommandError) as caught:
            call_command("verify", stages=1, suites=["bogus"], out=tmp, stdout=StringIO())
        self.assertEqual(caught.exception.returncode, USAGE)

    def test_missing_schedule_file(self):
        with TemporaryDirectory() as tmp, self.assertRaises(CommandError) as caught:
            call_command("verify", schedule=str(Path(tmp) / "absent.json"), suites=["tiling"], out=tmp, stdout=StringIO())
        self.assertEqual(caught.exception.returncode, USAGE)

    def test_broken_schedule_file(self):
        with TemporaryDirectory() as tmp:
            path = Path(tmp) / "schedule.json"
            path.write_text(json.dumps({"profile": {"name": "toy"}, "stages": "nope"}), encoding="utf-8")
            with self.assertRaises(CommandError) as caught:
                call_command("verify", schedule=str(path), suites=["tiling"], out=tmp, stdout=StringIO())
        self.assertEqual(caught.exception.returncode, USAGE)

    def test_failure_code_is_distinct(self):
        self.assertNotIn(CERTIFICATE_FAILURE, (0, INFEASIBLE, USAGE))


class ExportCommandTests(SimpleTestCase):
    def test_curve_is_monotone(self):
        with TemporaryDirectory() as tmp:
            call_command("export", "curve", stages=1, points=300, out=tmp, stdout=StringIO())
            rows = read_csv(Path(tmp) / "curve.csv")
            manifest = read_json(Path(tmp) / "manifest.json")

        self.assertEqual(len(rows), 300)
        values = [float(row["H"]) for row in rows]
        self.assertEqual(values[0], 0.0)
        self.assertTrue(all(a <= b for a, b in zip(values, values[1:])))
        self.assertTrue(all(float(row["dH"]) > 0 for row in rows))
        self.assertEqual([column["name"] for column in manifest["outputs"][0]["columns"]], ["x", "H", "dH"])

    def test_manifest_columns_follow_csv_header(self):
        """Test: the manifest lists the columns in header order, not sorted."""
        with TemporaryDirectory() as tmp:
            call_command("export", "orbit", stages=1, steps=3, out=tmp, stdout=StringIO())
            with (Path(tmp) / "orbit.csv").open(encoding="utf-8", newline="") as handle:
                header = next(csv.reader(handle))
            manifest = read_json(Path(tmp) / "manifest.json")

        columns = manifest["outputs"][0]["columns"]
        self.assertEqual([column["name"] for column in columns], header)
        self.assertEqual(header, ["step", "x", "y", "branch", "expansion", "determinant"])
        self.assertEqual(columns[0]["meaning"], column_schema("orbit")[0]["meaning"])

    def test_orbit_stays_in_manifold(self):
        with TemporaryDirectory() as tmp:
            call_command("export", "orbit", stages=1, x=0.3, y=0.1, steps=50, out=tmp, stdout=StringIO())
            rows = read_csv(Path(tmp) / "orbit.csv")

        self.assertEqual(len(rows), 51)
        for row in rows:
            self.assertTrue(in_manifold(float(row["x"]), float(row["y"])), row)
        for row in rows[1:]:
            self.assertIn(row["branch"], ("left", "right"))
            self.assertGreater(float(row["expansion"]), 0.0)

    def test_density_masses_sum_to_one(self):
        with TemporaryDirectory() as tmp:
            call_command("export", "density", stages=1, bins=10, out=tmp, stdout=StringIO())
            rows = read_csv(Path(tmp) / "density.csv")

        self.assertEqual(len(rows), 10)
        self.assertAlmostEqual(sum(float(row["mass"]) for row in rows), 1.0, places=9)

    def test_stage_out_of_range(self):
        with TemporaryDirectory() as tmp, self.assertRaises(CommandError) as caught:
            call_command("export", "curve", stages=1, stage=99, out=tmp, stdout=StringIO())
        self.assertEqual(caught.exception.returncode, USAGE)
