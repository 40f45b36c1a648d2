"""Run configuration: TOML (or JSON) files plus dotted-path overrides.

The grammar is plain TOML: `key = value` pairs, `[section]` tables,
nested tables, `#` comments.  JSON documents with the same structure
are accepted for machine-generated configs and manifests.  Parse errors
carry the line/column the parser reports.
"""

import json

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python 3.10
    import tomli as _toml


class ConfigError(Exception):
    """Bad configuration: unparsable text, unknown keys, invalid values."""


def load_config(path):
    """Parse a TOML (default) or JSON (by extension) config file into a dict."""
    try:
        raw = open(path, "rb").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if str(path).endswith(".json"):
        try:
            doc = json.loads(raw.decode())
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from None
    else:
        try:
            doc = _toml.loads(raw.decode())
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: TOML parse error: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a table/object")
    return doc


def parse_override(text):
    """Split 'dotted.path=value' into (['dotted','path'], parsed value).

    The value is parsed as a TOML literal (numbers, booleans, strings,
    arrays); anything unparsable is kept as a bare string.
    """
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override must look like key=value, got {text!r}")
    path = [part.strip() for part in key.strip().split(".")]
    if any(not part for part in path):
        raise ConfigError(f"bad override key {key.strip()!r}")
    try:
        parsed = _toml.loads(f"v = {value.strip()}")["v"]
    except _toml.TOMLDecodeError:
        parsed = value.strip()
    return path, parsed


def apply_overrides(config, overrides):
    """Apply key=value overrides (dotted paths create nested tables)."""
    for text in overrides:
        path, value = parse_override(text)
        node = config
        for part in path[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {text!r}: {part!r} is not a table")
            node = nxt
        node[path[-1]] = value
    return config
