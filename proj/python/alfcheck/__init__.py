"""Python access to the alfcheck commands.

Every command returns the same report the CLI prints, as a dict (or a list of
dicts for the JSON-lines commands), without the timestamp envelope.
"""

import json

from ._core import (
    CatalogueError,
    ConfigError,
    SearchSpaceError,
    commands,
    metric_names,
    signature_identity_holds,
    strip_envelope,
)
from ._core import render_markdown as _render_markdown
from ._core import run as _run

__all__ = [
    "CatalogueError",
    "ConfigError",
    "SearchSpaceError",
    "commands",
    "markdown",
    "metric_names",
    "run",
    "signature_identity_holds",
    "strip_envelope",
]


def _parse(text):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return [json.loads(line) for line in text.splitlines() if line]


def run(command, **options):
    """Run a command; options use the CLI flag names with underscores."""
    passed, text = _run(command, json.dumps(options))
    report = _parse(text)
    return passed, report


def markdown(command, **options):
    return _render_markdown(command, json.dumps(options))
