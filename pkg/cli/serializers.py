from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from django.conf import settings
from rest_framework import serializers

from schedule.engine import Schedule, build_schedule
from schedule.profiles import STRICT, TOY
from schedule.serializers import FractionField, load_schedule

from .suites import SUITE_NAMES


BUILD = "build_schedule"
VERIFY = "verify"
EXPORT = "export"

CURVE = "curve"
ORBIT = "orbit"
DENSITY = "density"


def _setting(name, default):
    return lambda: getattr(settings, name, default)


@dataclass(frozen=True)
class RunConfig:
    """Validated arguments of one command run; recorded in its manifest."""

    command: str
    schedule: str | None = None
    profile: str = TOY
    stages: int | None = None
    theta: Fraction | None = None
    exponent: int | None = None
    grid: int = 10_000
    seed: int = 0
    backend: str = "float"
    precision: int | None = None
    out: str | None = None
    workers: int = 1
    suites: tuple[str, ...] = ()
    depth: int = 12
    samples: int = 100
    horizon: int = 200
    what: str | None = None
    params: dict = field(default_factory=dict)

    def output_dir(self) -> Path:
        directory = Path(self.out) if self.out else Path(getattr(settings, "GOLDEN_OUTPUT_DIR", "runs"))
        directory.mkdir(parents=True, exist_ok=True)
        return directory

    def load_schedule(self) -> Schedule:
        """The schedule file when given, else a fresh run of the induction."""
        if self.schedule:
            return load_schedule(self.schedule)
        return build_schedule(self.stages, self.profile, theta=self.theta, exponent=self.exponent)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["theta"] = None if self.theta is None else str(self.theta)
        data["suites"] = list(self.suites)
        return data


class RunConfigSerializer(serializers.Serializer):
    command = serializers.ChoiceField(choices=[BUILD, VERIFY, EXPORT])
    schedule = serializers.CharField(required=False, allow_null=True, default=None)
    profile = serializers.ChoiceField(choices=[TOY, STRICT], default=TOY)
    stages = serializers.IntegerField(min_value=1, required=False, allow_null=True, default=None)
    theta = FractionField(required=False, allow_null=True, default=None)
    exponent = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)
    grid = serializers.IntegerField(min_value=1, default=_setting("GOLDEN_GRID_POINTS", 10_000))
    seed = serializers.IntegerField(min_value=0, default=_setting("GOLDEN_SEED", 0))
    backend = serializers.ChoiceField(choices=["exact", "float"], default="float")
    precision = serializers.IntegerField(min_value=16, required=False, allow_null=True, default=None)
    out = serializers.CharField(required=False, allow_null=True, default=None)
    workers = serializers.IntegerField(min_value=1, default=_setting("GOLDEN_WORKERS", 1))
    suites = serializers.ListField(child=serializers.ChoiceField(choices=SUITE_NAMES), required=False, default=list)
    depth = serializers.IntegerField(min_value=1, max_value=24, default=12)
    samples = serializers.IntegerField(min_value=1, default=100)
    horizon = serializers.IntegerField(min_value=1, default=200)
    what = serializers.ChoiceField(choices=[CURVE, ORBIT, DENSITY], required=False, allow_null=True, default=None)
    params = serializers.DictField(required=False, default=dict)

    def validate_theta(self, value):
        if value is not None and value <= 1:
            raise serializers.ValidationError("theta must exceed 1")
        return value

    def validate(self, attrs):
        command = attrs["command"]
        if command == BUILD and attrs.get("stages") is None:
            raise serializers.ValidationError({"stages": "build_schedule needs --stages"})
        if command != BUILD and not attrs.get("schedule") and attrs.get("stages") is None:
            raise serializers.ValidationError({"schedule": "give --schedule or --stages"})
        if command == VERIFY and not attrs.get("suites"):
            raise serializers.ValidationError({"suites": "name at least one suite"})
        if command == EXPORT and attrs.get("what") is None:
            raise serializers.ValidationError({"what": "export needs curve, orbit or density"})
        return attrs

    def to_config(self) -> RunConfig:
        data = dict(self.validated_data)
        data["suites"] = tuple(dict.fromkeys(data.get("suites", ())))
        return RunConfig(**data)
