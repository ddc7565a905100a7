import logging

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from schedule.engine import InfeasibleScheduleError

from cli.runs import CERTIFICATE_FAILURE, INFEASIBLE, RunManifest, parse_config, usage_error, write_json
from cli.serializers import VERIFY
from cli.suites import SUITE_NAMES, SuiteContext, UnknownSuiteError, run_suites, verification_report


logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Run verification suites against a schedule and write report.json"

    def add_arguments(self, parser):
        parser.add_argument("--schedule", help="schedule.json from build_schedule")
        parser.add_argument("--stages", type=int, help="Build a fresh schedule with this many blocks instead")
        parser.add_argument("--profile", choices=["toy", "strict"])
        parser.add_argument("--suite", dest="suites", nargs="+", metavar="SUITE",
                            help=f"One or more of: {', '.join(SUITE_NAMES)}")
        parser.add_argument("--grid", type=int, help="Grid points per sweep")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--backend", choices=["exact", "float"])
        parser.add_argument("--precision", type=int, help="Mantissa bits of the float backend")
        parser.add_argument("--depth", type=int, help="Cylinder depth for the tiling suite")
        parser.add_argument("--samples", type=int, help="Orbit seeds for the hyperbolicity suite")
        parser.add_argument("--horizon", type=int, help="Orbit length for the hyperbolicity suite")
        parser.add_argument("--workers", type=int, help="Worker processes, one suite each")
        parser.add_argument("--out", help="Output directory (default GOLDEN_OUTPUT_DIR)")

    def handle(self, *args, **options):
        config = parse_config(VERIFY, {key: options.get(key) for key in (
            "schedule", "stages", "profile", "suites", "grid", "seed", "backend", "precision",
            "depth", "samples", "horizon", "workers", "out",
        )})
        try:
            schedule = config.load_schedule()
        except InfeasibleScheduleError as exc:
            raise CommandError(f"infeasible: {exc}", returncode=INFEASIBLE)
        except (OSError, ValueError, serializers.ValidationError) as exc:
            raise usage_error(exc)

        ctx = SuiteContext(
            schedule=schedule,
            grid=config.grid,
            seed=config.seed,
            backend=config.backend,
            precision=config.precision,
            tiling_depth=config.depth,
            samples=config.samples,
            horizon=config.horizon,
        )
        try:
            results = run_suites(config.suites, ctx, config.workers)
        except UnknownSuiteError as exc:
            raise usage_error(exc)

        report = verification_report(ctx, results)
        directory = config.output_dir()
        manifest = RunManifest(config)
        path = write_json(directory / "report.json", report)
        manifest.add(path, suites=list(config.suites), passed=report["passed"])
        manifest.write(directory)

        for result in results:
            status = self.style.SUCCESS("pass") if result.passed else self.style.ERROR("FAIL")
            self.stdout.write(f"{result.name:<22} {status}  {result.latency_ms} ms")
        if not report["passed"]:
            failed = [result.name for result in results if not result.passed]
            logger.warning("verification_failed suites=%s report=%s", ",".join(failed), path)
            raise CommandError(f"suites failed: {', '.join(failed)} (see {path})", returncode=CERTIFICATE_FAILURE)
        self.stdout.write(self.style.SUCCESS(f"All {len(results)} suites passed, report at {path}."))
