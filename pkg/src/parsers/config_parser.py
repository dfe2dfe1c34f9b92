"""
Run configuration parser.

Parses flat ``section.key = value`` text into a validated RunConfig.
Values are YAML scalars or flow collections, so numbers, booleans, lists
and small mappings need no extra syntax:

    grid.n1 = 128
    map.affine = [[0.6, 0.0], [0.0, 0.4]]
    map.modes = [{k: [1, 0], cos: [0.05, 0.0]}]
    checks.enabled = [trS_min, H_decay]
"""

import re
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import yaml
from pydantic import ValidationError

from src.config.settings import RunConfig
from src.models.errors import ConfigError

_KEY = r"[A-Za-z_][A-Za-z0-9_]*"
_LINE = re.compile(rf"^(?P<key>{_KEY}(?:\.{_KEY})?)\s*=\s*(?P<value>.*)$")


@dataclass
class ConfigLine:
    """One assignment from a config file."""
    number: int
    key: str
    value: Any


def _split_lines(text: str) -> Tuple[List[ConfigLine], List[str]]:
    assignments: List[ConfigLine] = []
    errors: List[str] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        match = _LINE.match(line)
        if not match:
            errors.append(f"line {number}: expected 'section.key = value', got {line!r}")
            continue

        key, raw_value = match.group("key"), match.group("value").strip()
        try:
            value = yaml.safe_load(raw_value) if raw_value else None
        except yaml.YAMLError as exc:
            errors.append(f"line {number}: cannot parse value of {key}: {exc.__class__.__name__}")
            continue
        if value is None:
            errors.append(f"line {number}: missing value for {key}")
            continue
        assignments.append(ConfigLine(number, key, value))

    return assignments, errors


def _nest(assignments: List[ConfigLine]) -> Tuple[Dict[str, Any], List[str]]:
    nested: Dict[str, Any] = {}
    errors: List[str] = []
    seen: Dict[str, int] = {}

    for item in assignments:
        if item.key in seen:
            errors.append(f"line {item.number}: duplicate key {item.key} (first set on line {seen[item.key]})")
            continue
        seen[item.key] = item.number

        if "." not in item.key:
            if isinstance(nested.get(item.key), dict):
                errors.append(f"line {item.number}: {item.key} is a section, not a value")
                continue
            nested[item.key] = item.value
            continue

        section, name = item.key.split(".", 1)
        bucket = nested.setdefault(section, {})
        if not isinstance(bucket, dict):
            errors.append(f"line {item.number}: {section} is a value, not a section")
            continue
        bucket[name] = item.value

    return nested, errors


def _format_validation_errors(exc: ValidationError) -> List[str]:
    messages = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"])
        message = error["msg"]
        if message.startswith("Value error, "):
            message = message[len("Value error, "):]

        if error["type"] == "extra_forbidden":
            messages.append(f"unknown key {location}")
        elif error["type"] == "missing":
            messages.append(f"missing required key {location}")
        elif location:
            messages.append(f"{location}: {message}")
        else:
            messages.extend(message.split("; "))
    return messages


def parse_config(text: str) -> RunConfig:
    """
    Parse and validate configuration text.

    Args:
        text: UTF-8 key=value lines; '#' starts a comment

    Returns:
        Validated RunConfig with defaults applied

    Raises:
        ConfigError: carrying every problem found, not just the first
    """
    assignments, errors = _split_lines(text)
    nested, nest_errors = _nest(assignments)
    errors.extend(nest_errors)

    try:
        config = RunConfig.model_validate(nested)
    except ValidationError as exc:
        errors.extend(_format_validation_errors(exc))
        raise ConfigError(errors) from None

    if errors:
        raise ConfigError(errors)
    return config
