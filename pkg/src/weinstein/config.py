"""Experiment configuration: a small indentation-based key/value tree format
(line numbers preserved for error anchoring) with JSON accepted as an
alternative encoding.

Example::

    experiment: transform_suite
    params:
      alpha: 0.5
      d: 1
    grid:
      axial_n: 64
      axial_halfwidth: 12.0
      radial_n: 64
      radial_extent: 12.0
    seed: 7
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Any

from .errors import ConfigurationError

__all__ = ["ConfigError", "parse_tree", "load_config_text", "validate_config", "ExperimentConfig"]

EXPERIMENTS = (
    "transform_suite",
    "translation_suite",
    "dispersion",
    "strichartz_scan",
    "solve",
    "picard_verify",
)

_BLOCK_REQUIRED = {
    "dispersion": "dispersion",
    "strichartz_scan": "strichartz",
    "solve": "solver",
    "picard_verify": "solver",
}


class ConfigError(ConfigurationError):
    def __init__(self, message: str, path: str = "", line: int | None = None):
        self.path = path
        self.line = line
        anchor = f"line {line}: " if line is not None else ""
        where = f"{path}: " if path else ""
        super().__init__(f"{anchor}{where}{message}")


def _scalar(tok: str):
    low = tok.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        pass
    return tok


def parse_tree(text: str) -> tuple[dict, dict]:
    """Parse the key/value tree; returns (data, lines) where lines maps
    dotted paths to 1-based line numbers."""
    data: dict[str, Any] = {}
    lines: dict[str, int] = {}
    stack: list[tuple[int, dict, str]] = [(-1, data, "")]
    pending: tuple[int, str, int] | None = None  # indent, path, line of a key awaiting children

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "\t" in raw[: len(raw) - len(raw.lstrip())]:
            raise ConfigError("indentation must use spaces, not tabs", line=lineno)
        indent = len(line) - len(line.lstrip())
        body = line.strip()
        if ":" not in body:
            raise ConfigError("expected 'key: value' or 'key:'", line=lineno)
        key, _, rest = body.partition(":")
        key = key.strip()
        rest = rest.strip()

        if pending is not None:
            p_indent, p_path, p_line = pending
            if indent > p_indent:
                node: dict = {}
                parent = stack[-1][1]
                parent[p_path.rsplit(".", 1)[-1]] = node
                stack.append((p_indent, node, p_path))
                pending = None
            else:
                raise ConfigError("block has no entries", path=p_path, line=p_line)

        while stack and indent <= stack[-1][0]:
            stack.pop()
        parent_indent, parent, parent_path = stack[-1]
        path = f"{parent_path}.{key}" if parent_path else key
        if key in parent:
            raise ConfigError("duplicate key", path=path, line=lineno)
        lines[path] = lineno
        if rest:
            parent[key] = _scalar(rest)
        else:
            pending = (indent, path, lineno)

    if pending is not None:
        raise ConfigError("block has no entries", path=pending[1], line=pending[2])
    return data, lines


def load_config_text(text: str) -> tuple[dict, dict]:
    """Accept either the key/value tree or a JSON object."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            return json.loads(text), {}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    return parse_tree(text)


@dataclass
class ExperimentConfig:
    experiment: str
    alpha: float
    d: int
    grid: dict
    seed: int = 0
    output_dir: str | None = None
    dispersion: dict = dc_field(default_factory=dict)
    strichartz: dict = dc_field(default_factory=dict)
    solver: dict = dc_field(default_factory=dict)
    raw: dict = dc_field(default_factory=dict)


def _need(data: dict, path: str, lines: dict, typ=None):
    node: Any = data
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise ConfigError("required key is missing", path=path, line=lines.get(path))
        node = node[part]
    if typ is not None and not isinstance(node, typ):
        raise ConfigError(
            f"expected {getattr(typ, '__name__', typ)}, got {type(node).__name__}",
            path=path,
            line=lines.get(path),
        )
    return node


def validate_config(data: dict, lines: dict | None = None) -> ExperimentConfig:
    """Schema validation with line-anchored messages naming the violated
    invariant."""
    lines = lines or {}
    exp = _need(data, "experiment", lines)
    if exp not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {exp!r}; one of {', '.join(EXPERIMENTS)}",
            path="experiment",
            line=lines.get("experiment"),
        )
    alpha = _need(data, "params.alpha", lines, (int, float))
    if not alpha > -0.5:
        raise ConfigError(
            f"violates alpha > -1/2 (got {alpha})", path="params.alpha", line=lines.get("params.alpha")
        )
    d = _need(data, "params.d", lines, int)
    if d < 1:
        raise ConfigError(f"violates d >= 1 (got {d})", path="params.d", line=lines.get("params.d"))

    grid = _need(data, "grid", lines, dict)
    for key in ("axial_n", "axial_halfwidth", "radial_n", "radial_extent"):
        _need(data, f"grid.{key}", lines, (int, float))
    n = grid["axial_n"]
    if n != 1 and (n < 8 or (n & (n - 1)) != 0):
        raise ConfigError(
            f"violates axial_n in {{1}} or power of two >= 8 (got {n})",
            path="grid.axial_n",
            line=lines.get("grid.axial_n"),
        )
    if grid["radial_n"] < 16:
        raise ConfigError(
            f"violates radial_n >= 16 (got {grid['radial_n']})",
            path="grid.radial_n",
            line=lines.get("grid.radial_n"),
        )
    for key in ("axial_halfwidth", "radial_extent"):
        if not grid[key] > 0:
            raise ConfigError(
                f"violates {key} > 0 (got {grid[key]})", path=f"grid.{key}", line=lines.get(f"grid.{key}")
            )

    block = _BLOCK_REQUIRED.get(exp)
    if block is not None:
        _need(data, block, lines, dict)
    solver = data.get("solver", {})
    if exp in ("solve", "picard_verify"):
        for key in ("p", "T"):
            _need(data, f"solver.{key}", lines, (int, float))
        if not solver["p"] > 0:
            raise ConfigError(
                f"violates p > 0 (got {solver['p']})", path="solver.p", line=lines.get("solver.p")
            )
        if not solver["T"] > 0:
            raise ConfigError(
                f"violates T > 0 (got {solver['T']})", path="solver.T", line=lines.get("solver.T")
            )
        if "dt" in solver and not solver["dt"] > 0:
            raise ConfigError(
                f"violates dt > 0 (got {solver['dt']})", path="solver.dt", line=lines.get("solver.dt")
            )
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer", path="seed", line=lines.get("seed"))

    return ExperimentConfig(
        experiment=exp,
        alpha=float(alpha),
        d=d,
        grid={k: grid[k] for k in ("axial_n", "axial_halfwidth", "radial_n", "radial_extent")},
        seed=seed,
        output_dir=data.get("output_dir"),
        dispersion=data.get("dispersion", {}),
        strichartz=data.get("strichartz", {}),
        solver=dict(solver),
        raw=data,
    )
