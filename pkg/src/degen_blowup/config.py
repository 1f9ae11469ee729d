"""Flat key-value run configurations.

Files hold one ``block.key = value`` assignment per line, with ``#``
comments; the format is deliberately trivial to parse and diff.  Every
command validates its keys against a whitelist, so typos and misplaced
keys fail loudly with the offending key and line number before any solve
starts.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, tuple[str, int]]:
    """Raw key -> (value, line number) mapping with duplicate detection."""
    out: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = (value, lineno)
    return out


def parse_config_file(path) -> dict[str, tuple[str, int]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def _convert(key: str, value: str, lineno: int, kind: str, source: str):
    try:
        if kind == "float":
            return float(value)
        if kind == "int":
            out = int(value)
            return out
        if kind == "bool":
            lowered = value.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(value)
        if kind == "float-or-auto":
            if value.lower() == "auto":
                return None
            return float(value)
        return value  # str
    except ValueError:
        raise ConfigError(
            f"{source}:{lineno}: key {key!r} expects a {kind}, got {value!r}"
        ) from None


def resolve(
    raw: dict[str, tuple[str, int]],
    schema: dict[str, tuple[str, object]],
    source: str = "<config>",
) -> dict[str, object]:
    """Apply a {key: (type, default)} schema; unknown keys are rejected."""
    for key, (_, lineno) in raw.items():
        if key not in schema:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} for this command")
    resolved: dict[str, object] = {}
    for key, (kind, default) in schema.items():
        if key in raw:
            value, lineno = raw[key]
            resolved[key] = _convert(key, value, lineno, kind, source)
        else:
            if default is _REQUIRED:
                raise ConfigError(f"{source}: missing required key {key!r}")
            resolved[key] = default
    return resolved


class _Required:
    def __repr__(self):  # pragma: no cover - diagnostics only
        return "<required>"


_REQUIRED = _Required()
REQUIRED = _REQUIRED


def parse_coefficient(spec: str):
    """Coefficient spec: a plain number, or ``poly:c0,c1,...`` in r."""
    spec = spec.strip()
    if spec.lower().startswith("poly:"):
        try:
            coeffs = [float(c) for c in spec[5:].split(",")]
        except ValueError:
            raise ConfigError(f"bad polynomial coefficient spec {spec!r}") from None
        if not coeffs:
            raise ConfigError(f"bad polynomial coefficient spec {spec!r}")

        def poly(r):
            return np.polynomial.polynomial.polyval(np.asarray(r, dtype=float), coeffs)

        return poly
    try:
        return float(spec)
    except ValueError:
        raise ConfigError(f"coefficient spec {spec!r} is neither a number nor poly:...") from None
