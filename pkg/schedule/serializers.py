import json
from fractions import Fraction

from rest_framework import serializers

from numerics.field import FieldElement
from .engine import Certificate, Schedule, StageParams
from .profiles import STRICT, TOY, RigorProfile


class FieldElementField(serializers.Field):
    """Exact element of Q(sqrt 5) in its textual form ``p/q + r/s·phi``."""

    def to_representation(self, value):
        return str(value)

    def to_internal_value(self, data):
        try:
            return FieldElement.parse(str(data))
        except ValueError:
            raise serializers.ValidationError(f"not a field element: {data!r}")


class FractionField(serializers.Field):
    def to_representation(self, value):
        return str(value)

    def to_internal_value(self, data):
        try:
            return Fraction(str(data))
        except (ValueError, ZeroDivisionError):
            raise serializers.ValidationError(f"not a rational number: {data!r}")


class ProfileSerializer(serializers.Serializer):
    name = serializers.ChoiceField(choices=[STRICT, TOY])
    lattice_factor = serializers.IntegerField(min_value=1)
    base_n = serializers.IntegerField(min_value=1)
    base_m = serializers.IntegerField(min_value=1, allow_null=True)
    waive_base_case = serializers.BooleanField()
    freq_tolerance = FractionField(allow_null=True)
    mixing_delta = FractionField(allow_null=True)
    eta = FractionField(allow_null=True)
    integer_budget = serializers.IntegerField(min_value=1, default=10 ** 6)
    max_n = serializers.IntegerField(min_value=1, default=4000)


class CertificateSerializer(serializers.Serializer):
    name = serializers.CharField()
    stage = serializers.IntegerField(min_value=1)
    passed = serializers.BooleanField()
    margin = serializers.FloatField()
    waived = serializers.BooleanField(default=False)
    detail = serializers.CharField(allow_blank=True, default="")


class StageSerializer(serializers.Serializer):
    t = serializers.IntegerField(min_value=1)
    lam = FieldElementField()
    n = serializers.IntegerField(min_value=1)
    N = serializers.IntegerField(min_value=2)
    m = serializers.IntegerField(min_value=1)
    M = serializers.IntegerField(min_value=3)
    epsilon = FractionField()
    exponent = serializers.IntegerField(min_value=1)
    mixing_steps = serializers.IntegerField(min_value=1, allow_null=True, required=False)

    def validate_lam(self, value):
        if value <= 1:
            raise serializers.ValidationError("lambda must exceed 1")
        return value

    def validate_epsilon(self, value):
        if value < 0:
            raise serializers.ValidationError("collar width must be nonnegative")
        return value


class ScheduleSerializer(serializers.Serializer):
    profile = ProfileSerializer()
    theta = FractionField(allow_null=True, required=False)
    stages = StageSerializer(many=True)
    certificates = CertificateSerializer(many=True, required=False)

    def validate(self, attrs):
        stages = attrs["stages"]
        if not stages:
            raise serializers.ValidationError({"stages": "a schedule needs at least one block"})
        previous_M, previous = 1, None
        for index, stage in enumerate(stages, start=1):
            if stage["t"] != index:
                raise serializers.ValidationError({"stages": f"block {index} is numbered {stage['t']}"})
            if stage["N"] != previous_M + stage["n"] or stage["M"] != stage["N"] + stage["m"]:
                raise serializers.ValidationError({"stages": f"block {index} breaks N = M_prev + n, M = N + m"})
            if previous is not None:
                if not stage["lam"] < previous["lam"]:
                    raise serializers.ValidationError({"stages": f"lambda not decreasing at block {index}"})
                if previous["exponent"] % stage["exponent"]:
                    raise serializers.ValidationError({"stages": f"a_{index} does not divide a_{index - 1}"})
            previous_M, previous = stage["M"], stage
        return attrs

    def to_schedule(self) -> Schedule:
        data = self.validated_data
        profile = RigorProfile(**data["profile"])
        stages = tuple(StageParams(**stage) for stage in data["stages"])
        certificates = tuple(Certificate(**c) for c in data.get("certificates", ()))
        return Schedule(profile, stages, data.get("theta"), certificates)


def schedule_to_dict(schedule: Schedule) -> dict:
    return ScheduleSerializer({
        "profile": schedule.profile.__dict__,
        "theta": schedule.theta,
        "stages": [stage.__dict__ for stage in schedule.stages],
        "certificates": [c.__dict__ for c in schedule.certificates],
    }).data


def schedule_from_dict(data: dict) -> Schedule:
    serializer = ScheduleSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.to_schedule()


def dump_schedule(schedule: Schedule, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(schedule_to_dict(schedule), handle, indent=2)


def load_schedule(path) -> Schedule:
    with open(path, encoding="utf-8") as handle:
        return schedule_from_dict(json.load(handle))
