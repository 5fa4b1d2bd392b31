"""Small shared writers for run artifacts."""

from __future__ import annotations

import hashlib
from pathlib import Path


def write_lines(path, lines) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def kv_lines(pairs) -> list[str]:
    """key=value lines; floats use repr so values round-trip exactly."""
    out = []
    for key, value in pairs:
        if isinstance(value, float):
            value = repr(value)
        out.append(f"{key}={value}")
    return out


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
