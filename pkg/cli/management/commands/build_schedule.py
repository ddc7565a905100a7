import logging
import time

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from schedule.engine import InfeasibleScheduleError
from schedule.serializers import dump_schedule

from cli.runs import CERTIFICATE_FAILURE, INFEASIBLE, RunManifest, parse_config, usage_error
from cli.serializers import BUILD


logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Run the parameter induction and write a certified schedule.json"

    def add_arguments(self, parser):
        parser.add_argument("--stages", type=int, help="Number of blocks T")
        parser.add_argument("--profile", choices=["toy", "strict"], help="Rigor profile (default toy)")
        parser.add_argument("--theta", help="Target band ratio, a rational like 33/20")
        parser.add_argument("--exponent", type=int, help="Collar exponent override for block 1")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--precision", type=int, help="Mantissa bits recorded in the manifest")
        parser.add_argument("--out", help="Output directory (default GOLDEN_OUTPUT_DIR)")

    def handle(self, *args, **options):
        config = parse_config(BUILD, {key: options.get(key) for key in (
            "stages", "profile", "theta", "exponent", "seed", "precision", "out",
        )})
        started_at = time.perf_counter()
        try:
            schedule = config.load_schedule()
        except InfeasibleScheduleError as exc:
            logger.warning("schedule_infeasible inequality=%s stages=%s", exc.inequality, config.stages)
            raise CommandError(f"infeasible: {exc}", returncode=INFEASIBLE)
        except (ValueError, serializers.ValidationError) as exc:
            raise usage_error(exc)

        directory = config.output_dir()
        manifest = RunManifest(config)
        path = directory / "schedule.json"
        dump_schedule(schedule, path)
        manifest.add(path, blocks=schedule.T, depth=schedule.depth, passed=schedule.passed)
        manifest.write(directory)
        latency_ms = round((time.perf_counter() - started_at) * 1000)
        logger.info(
            "schedule_built stages=%s profile=%s passed=%s latency_ms=%s",
            schedule.T, schedule.profile.name, schedule.passed, latency_ms,
        )

        if not schedule.passed:
            names = ", ".join(certificate.name for certificate in schedule.failures)
            raise CommandError(f"certificates failed: {names} (see {path})", returncode=CERTIFICATE_FAILURE)
        self.stdout.write(
            self.style.SUCCESS(
                f"Schedule ready: {schedule.T} blocks, depth {schedule.depth}, written to {path}."
            )
        )
