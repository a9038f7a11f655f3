"""TravelAgent: generative-agent pedestrian wayfinding simulations.

Thin wrapper over the C++ core. Configurations are plain dicts with the same
keys as the JSON documents the command-line tool reads.
"""

from __future__ import annotations

import json
from typing import Any, Iterable, Optional

from ._travelagent import (
    BackendError,
    ConfigError,
    Error,
    ParseError,
    SchemaError,
    TraceError,
    ValidationError,
    compass_cue,
    parse_action,
    prompt_version,
    raycast,
    render_action,
    scene_ids,
    sentiment,
    tokenize,
    trace_hash,
    trace_schema_version,
)
from . import _travelagent as _core

__all__ = [
    "BackendError",
    "ConfigError",
    "Error",
    "ParseError",
    "SchemaError",
    "TraceError",
    "ValidationError",
    "compass_cue",
    "load_scene",
    "parse_action",
    "parse_trace",
    "prompt_version",
    "raycast",
    "render_action",
    "run",
    "run_matrix",
    "scene_ids",
    "sentiment",
    "tokenize",
    "trace_hash",
    "trace_schema_version",
]


def load_scene(ref: str) -> dict[str, Any]:
    """Scene document of a bundled fixture id or a file path."""
    return json.loads(_core.scene_json(ref))


def parse_trace(text: str) -> dict[str, Any]:
    """Validates trace text and returns {"header": {...}, "steps": [...]}."""
    lines = _core.normalize_trace(text).splitlines()
    return {"header": json.loads(lines[0]), "steps": [json.loads(line) for line in lines[1:]]}


def run(config: dict[str, Any]) -> dict[str, Any]:
    """Runs one simulation. Returns the parsed trace plus its raw text."""
    text = _core.run_config(json.dumps(config))
    result = parse_trace(text)
    result["trace"] = text
    return result


def run_matrix(matrix: dict[str, Any], parallelism: int = 1) -> list[str]:
    """Runs every simulation of a matrix document; returns trace texts in spec order."""
    return list(_core.run_matrix_config(json.dumps(matrix), parallelism))
