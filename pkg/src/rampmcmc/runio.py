"""Run configuration, and the CSV/JSON formats the command line emits.

Every output file starts with comment lines carrying the schema tag and the
full configuration (JSON plus a hash), so results stay attributable to the
run that produced them. Floats are written with 17 significant digits to make
downstream fits bit-stable.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

CSV_SCHEMA = "rampmcmc-csv-v1"
JSON_SCHEMA = "rampmcmc-json-v1"

MODELS = ("ising", "sk", "3spin")


class ConfigError(ValueError):
    """Invalid configuration or command usage (exit code 2)."""


DEFAULT_ALPHA_GRID = (0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; serialized verbatim into every output."""

    model: str = "ising"
    sizes: tuple[int, ...] = (8,)
    beta: float = 5.0
    h: float = 1.5
    schedule: str = "sin2"
    alphas: tuple[float, ...] = DEFAULT_ALPHA_GRID
    kappa: str = "inf"  # "inf", a number, or "scan"
    kappa_points: int = 64
    kappa_min: float = 1e2
    kappa_max: float = 1e5
    instances: int = 50
    seed: int = 2024
    steps_per_unit_time: int = 64
    mode_steps: int = 512  # per unit time, for the momentum-mode integrator
    instance_file: str = ""  # explicit instance JSON overriding seeded sampling
    output_dir: str = "runs"
    workers: int = 0  # 0 means: take the environment default

    def validate(self, max_sites: int) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if not self.sizes:
            raise ConfigError("at least one system size is required")
        for n in self.sizes:
            if n > max_sites:
                raise ConfigError(
                    f"size {n} exceeds the full-state-space cap of {max_sites}"
                )
        if self.schedule not in ("sin2", "linear"):
            raise ConfigError(f"schedule must be sin2 or linear, got {self.schedule!r}")
        if not self.alphas or any(a < 0 for a in self.alphas):
            raise ConfigError("alpha grid must be nonempty and nonnegative")
        if list(self.alphas) != sorted(set(self.alphas)):
            raise ConfigError("alpha grid must be strictly increasing")
        if self.kappa not in ("inf", "scan"):
            try:
                value = float(self.kappa)
            except ValueError:
                raise ConfigError(
                    f"kappa must be 'inf', 'scan', or a number, got {self.kappa!r}"
                ) from None
            if value < 0:
                raise ConfigError(f"kappa must be nonnegative, got {value}")
        if self.instances < 1:
            raise ConfigError("instances must be at least 1")
        if self.steps_per_unit_time < 1:
            raise ConfigError("steps_per_unit_time must be at least 1")

    def kappa_value(self) -> float:
        return math.inf if self.kappa == "inf" else float(self.kappa)

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["sizes"] = list(self.sizes)
        data["alphas"] = list(self.alphas)
        return data

    def config_hash(self) -> str:
        """Hash of the fields that determine row values.

        Sweep-extent fields (sizes, alphas, instances, workers, output
        directory) are excluded: they are visible in the row keys themselves,
        and runs extending a sweep may append to the same files.
        """
        data = self.to_dict()
        for key in ("sizes", "alphas", "instances", "workers", "output_dir"):
            data.pop(key)
        canonical = json.dumps(data, sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _parse_sizes(text: str) -> tuple[int, ...]:
    """Sizes as '8,10,12' or a range '8..32:4' (inclusive, step optional)."""
    text = text.strip()
    if ".." in text:
        span, _, step_text = text.partition(":")
        lo_text, _, hi_text = span.partition("..")
        lo, hi = int(lo_text), int(hi_text)
        step = int(step_text) if step_text else 1
        if step < 1 or hi < lo:
            raise ConfigError(f"bad size range {text!r}")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(part) for part in text.split(",") if part.strip())


def _parse_alphas(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


_FIELD_PARSERS = {
    "model": str,
    "sizes": _parse_sizes,
    "beta": float,
    "h": float,
    "schedule": str,
    "alphas": _parse_alphas,
    "kappa": str,
    "kappa_points": int,
    "kappa_min": float,
    "kappa_max": float,
    "instances": int,
    "seed": int,
    "steps_per_unit_time": int,
    "mode_steps": int,
    "instance_file": str,
    "output_dir": str,
    "workers": int,
}


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Flat `key = value` file; '#' starts a comment."""
    values: dict[str, str] = {}
    for line_number, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_number}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def build_config(file_values: dict[str, str], overrides: dict[str, str]) -> RunConfig:
    """Merge config-file values with command-line overrides; overrides win."""
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    kwargs = {}
    for key, raw in merged.items():
        parser = _FIELD_PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            kwargs[key] = parser(raw) if isinstance(raw, str) else raw
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from None
    return RunConfig(**kwargs)


def format_value(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.17g}"
    return str(value)


def write_csv(
    path: str | Path,
    header: list[str],
    rows: list[tuple],
    config: RunConfig,
    key_columns: int,
) -> int:
    """Write (or extend) a CSV keyed on its first `key_columns` columns.

    Rewriting with the same configuration appends only rows whose key is not
    already present, so reruns are idempotent; a differing configuration on an
    existing file is refused.
    """
    path = Path(path)
    formatted = {
        tuple(format_value(v) for v in row[:key_columns]): [format_value(v) for v in row]
        for row in rows
    }
    existing: dict[tuple, list[str]] = {}
    if path.exists():
        meta, _, old_rows = read_csv(path)
        if meta.get("config_hash") != config.config_hash():
            raise ConfigError(
                f"{path} already holds results for a different configuration; "
                "use a fresh output directory"
            )
        existing = {tuple(row[:key_columns]): row for row in old_rows}
    merged = dict(existing)
    added = 0
    for key, row in sorted(formatted.items()):
        if key not in merged:
            added += 1
        merged[key] = row
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as handle:
        handle.write(f"# schema={CSV_SCHEMA}\n")
        handle.write(f"# config_hash={config.config_hash()}\n")
        handle.write(f"# config={json.dumps(config.to_dict(), sort_keys=True)}\n")
        handle.write(",".join(header) + "\n")
        for key in sorted(merged):
            handle.write(",".join(merged[key]) + "\n")
    return added


def read_csv(path: str | Path) -> tuple[dict, list[str], list[list[str]]]:
    """Read a schema-tagged CSV: (metadata, header, string rows)."""
    meta: dict = {}
    header: list[str] = []
    rows: list[list[str]] = []
    for line_number, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if not raw.strip():
            continue
        if raw.startswith("#"):
            body = raw[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        parts = raw.split(",")
        if not header:
            header = [part.strip() for part in parts]
            continue
        if len(parts) != len(header):
            raise ConfigError(
                f"{path}:{line_number}: expected {len(header)} columns, got {len(parts)}"
            )
        rows.append([part.strip() for part in parts])
    return meta, header, rows


def require_schema(meta: dict, path: str | Path) -> None:
    if meta.get("schema") != CSV_SCHEMA:
        raise ConfigError(
            f"{path}: schema tag {meta.get('schema')!r} does not match {CSV_SCHEMA!r}"
        )


def write_json(path: str | Path, payload: dict, config: RunConfig | None = None) -> None:
    document = {"schema": JSON_SCHEMA}
    if config is not None:
        document["config"] = config.to_dict()
        document["config_hash"] = config.config_hash()
    document.update(payload)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")


def env_workers(config: RunConfig) -> int:
    if config.workers > 0:
        return config.workers
    from .analysis import default_workers

    return default_workers()
