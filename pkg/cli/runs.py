# cli/runs.py
"""
Shared plumbing of the management commands: option parsing through the
RunConfig serializer, exit codes, deterministic JSON output and the
per-run manifest.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError
from rest_framework import serializers

from .serializers import RunConfig, RunConfigSerializer


logger = logging.getLogger(__name__)

PASSED = 0
CERTIFICATE_FAILURE = 2
INFEASIBLE = 3
USAGE = 4

PACKAGES = ("Django", "djangorestframework", "python-decouple", "mpmath", "numpy", "scipy")


def parse_config(command: str, options: dict) -> RunConfig:
    """Validate command options; a rejected option is a usage error."""
    payload = {key: value for key, value in options.items() if value is not None}
    payload["command"] = command
    serializer = RunConfigSerializer(data=payload)
    if not serializer.is_valid():
        logger.warning("run_config_rejected command=%s errors=%s", command, serializer.errors)
        raise CommandError(f"invalid options: {format_errors(serializer.errors)}", returncode=USAGE)
    return serializer.to_config()


def format_errors(errors) -> str:
    if isinstance(errors, dict):
        return "; ".join(f"{key}: {format_errors(value)}" for key, value in errors.items())
    if isinstance(errors, list):
        return ", ".join(format_errors(item) for item in errors)
    return str(errors)


def usage_error(exc: Exception) -> CommandError:
    if isinstance(exc, serializers.ValidationError):
        return CommandError(f"invalid schedule file: {format_errors(exc.detail)}", returncode=USAGE)
    return CommandError(str(exc), returncode=USAGE)


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def package_versions() -> dict:
    versions = {}
    for name in PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


@dataclass
class RunManifest:
    """Inputs, versions, seeds and output digests of one run."""

    config: RunConfig
    outputs: list[tuple[Path, dict]] = field(default_factory=list)

    def add(self, path: Path, **extra) -> Path:
        self.outputs.append((Path(path), extra))
        return path

    def to_dict(self) -> dict:
        return {
            "command": self.config.command,
            "arguments": self.config.to_dict(),
            "seed": self.config.seed,
            "precision_bits": self.config.precision or getattr(settings, "GOLDEN_PRECISION_BITS", 80),
            "versions": package_versions(),
            "outputs": [
                {"path": path.name, "sha256": sha256_file(path), **extra}
                for path, extra in self.outputs
            ],
        }

    def write(self, directory: Path) -> Path:
        path = write_json(directory / "manifest.json", self.to_dict())
        logger.info("run_manifest_written command=%s outputs=%s path=%s", self.config.command, len(self.outputs), path)
        return path
