"""Tiny TOML-subset reader used when the stdlib tomllib is unavailable.

Supports what the experiment configs need: comments, dotted table headers,
and key = value lines with strings, integers, floats, booleans and
single-line (possibly nested) arrays.  Anything fancier should use the JSON
config format instead.
"""

from __future__ import annotations

from ..errors import ConfigParseError

__all__ = ["loads"]


def loads(text: str) -> dict:
    root: dict = {}
    table = root
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigParseError(f"line {lineno}: unterminated table header")
            name = line[1:-1].strip()
            if not name:
                raise ConfigParseError(f"line {lineno}: empty table name")
            table = root
            for part in name.split("."):
                table = table.setdefault(part.strip(), {})
                if not isinstance(table, dict):
                    raise ConfigParseError(
                        f"line {lineno}: {name!r} collides with a value")
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected key = value")
        key, _, rest = line.partition("=")
        key = key.strip().strip('"')
        if not key:
            raise ConfigParseError(f"line {lineno}: empty key")
        try:
            value, tail = _parse_value(rest.strip())
        except ValueError as exc:
            raise ConfigParseError(f"line {lineno}: {exc}") from exc
        if tail.strip():
            raise ConfigParseError(
                f"line {lineno}: trailing characters {tail.strip()!r}")
        table[key] = value
    return root


def _strip_comment(line: str) -> str:
    out = []
    in_str = False
    for ch in line:
        if ch == '"':
            in_str = not in_str
        if ch == "#" and not in_str:
            break
        out.append(ch)
    return "".join(out)


def _parse_value(s: str):
    if not s:
        raise ValueError("missing value")
    if s[0] == '"':
        end = s.find('"', 1)
        if end < 0:
            raise ValueError("unterminated string")
        return s[1:end], s[end + 1:]
    if s[0] == "[":
        items = []
        rest = s[1:].lstrip()
        while True:
            if not rest:
                raise ValueError("unterminated array")
            if rest[0] == "]":
                return items, rest[1:]
            value, rest = _parse_value(rest)
            items.append(value)
            rest = rest.lstrip()
            if rest.startswith(","):
                rest = rest[1:].lstrip()
            elif not rest.startswith("]"):
                raise ValueError("expected ',' or ']' in array")
    # bare scalar up to a delimiter
    end = len(s)
    for i, ch in enumerate(s):
        if ch in ",]":
            end = i
            break
    token, rest = s[:end].strip(), s[end:]
    if token == "true":
        return True, rest
    if token == "false":
        return False, rest
    try:
        if any(c in token for c in ".eE") and not token.lstrip("+-").isdigit():
            return float(token), rest
        return int(token), rest
    except ValueError:
        raise ValueError(f"cannot parse value {token!r}")
