"""Flat key=value config files: one assignment per line, # comments."""

from __future__ import annotations

from .errors import ArgumentContractError, OutputError


def parse_key_value_text(text: str, origin: str = "<string>") -> dict:
    """Parse 'key = value' lines into a dict, rejecting duplicates."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ArgumentContractError(
                f"{origin}:{lineno}: expected key = value, got {line!r}"
            )
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ArgumentContractError(f"{origin}:{lineno}: empty key")
        if key in out:
            raise ArgumentContractError(f"{origin}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_key_value_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc}") from exc
    return parse_key_value_text(text, origin=path)
