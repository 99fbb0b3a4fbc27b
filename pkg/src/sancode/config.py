"""``key = value`` parameter files for the command line."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable


class ConfigError(ValueError):
    def __init__(self, message: str, path: str | None = None, lineno: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{lineno}: " if lineno is not None else f"{path}: "
        super().__init__(where + message)
        self.lineno = lineno


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Param:
    name: str  # flag name without the leading dashes
    type: Callable[[str], Any]
    default: Any = None
    help: str = ""
    choices: tuple | None = None
    required: bool = False

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("_", "-")


def parse_config(path: str | Path, params: list[Param]) -> dict[str, Any]:
    """Read a parameter file into ``{dest: typed value}``.

    Blank lines and ``#`` comments are ignored. Unknown keys, malformed lines,
    and values that fail conversion raise ConfigError naming the line.
    """
    by_name = {p.name: p for p in params}
    values: dict[str, Any] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", str(path), lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        param = by_name.get(normalize_key(key))
        if param is None:
            raise ConfigError(f"unknown key {key!r}", str(path), lineno)
        try:
            converted = param.type(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", str(path), lineno) from exc
        if param.choices is not None and converted not in param.choices:
            raise ConfigError(
                f"{key!r} must be one of {', '.join(map(str, param.choices))}",
                str(path), lineno,
            )
        values[param.dest] = converted
    return values


def resolve(params: list[Param], file_values: dict[str, Any], flag_values: dict[str, Any]) -> dict[str, Any]:
    """Merge defaults < config file < command-line flags."""
    resolved = {p.dest: p.default for p in params}
    resolved.update(file_values)
    resolved.update(flag_values)
    missing = [p.name for p in params if p.required and resolved.get(p.dest) is None]
    if missing:
        raise ConfigError("missing required parameter(s): " + ", ".join("--" + m for m in missing))
    return resolved
