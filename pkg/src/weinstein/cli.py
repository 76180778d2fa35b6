"""Command-line client for the experiment service.

By default the CLI talks to the service app in-process; `--server URL`
points it at a running instance instead.  Exit codes: 0 all checks passed,
1 a numerical check failed, 2 configuration/schema error.
"""

from __future__ import annotations

import base64
import json
import pathlib
import sys
from concurrent.futures import ThreadPoolExecutor

import click

from .config import ConfigError, load_config_text, validate_config

SCHEMA_EXIT = 2
CHECK_EXIT = 1


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    from .service import app

    with warnings.catch_warnings():
        # this starlette build warns about its own httpx shim
        warnings.filterwarnings("ignore", message="Using `httpx`")
        from starlette.testclient import TestClient

        return TestClient(app)


def _load(config_path: str) -> tuple[dict, dict]:
    text = pathlib.Path(config_path).read_text()
    return load_config_text(text)


def _jsonable(node):
    """JSON transport cannot carry infinities; send them as strings (the
    experiment layer coerces them back)."""
    if isinstance(node, dict):
        return {k: _jsonable(v) for k, v in node.items()}
    if isinstance(node, float) and node == float("inf"):
        return "inf"
    if isinstance(node, float) and node == float("-inf"):
        return "-inf"
    return node


def _fail_schema(exc: ConfigError, config_path: str) -> None:
    click.echo(f"{config_path}: {exc}", err=True)
    sys.exit(SCHEMA_EXIT)


def _write_outputs(report: dict, out_dir: pathlib.Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for name, text in report.get("artifacts", {}).items():
        (out_dir / name).write_text(text)
    for name, b64 in report.get("binary_artifacts", {}).items():
        (out_dir / name).write_bytes(base64.b64decode(b64))


def _run_one(client, data: dict, out_dir: pathlib.Path | None) -> dict:
    resp = client.post("/experiments/run", json={"config": _jsonable(data)})
    if resp.status_code == 400:
        raise ConfigError(resp.json()["detail"])
    resp.raise_for_status()
    report = resp.json()
    if out_dir is not None:
        _write_outputs(report, out_dir)
    return report


def _echo_checks(report: dict) -> None:
    for c in report["checks"]:
        status = "PASS" if c["pass"] else "FAIL"
        click.echo(f"  [{status}] {c['name']}: value={c['value']:.6g} tolerance={c['tolerance']:.6g}")


@click.group()
def main() -> None:
    """Weinstein-setting experiment driver."""


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--server", default=None, help="URL of a running service; in-process otherwise.")
def validate(config_path: str, server: str | None) -> None:
    """Schema-validate a configuration file."""
    try:
        data, lines = _load(config_path)
        validate_config(data, lines)
    except ConfigError as exc:
        _fail_schema(exc, config_path)
    with _client(server) as client:
        resp = client.post("/experiments/validate", json={"config": _jsonable(data)})
        resp.raise_for_status()
        body = resp.json()
    if not body["valid"]:
        for err in body["errors"]:
            click.echo(f"{config_path}: {err['message']}", err=True)
        sys.exit(SCHEMA_EXIT)
    click.echo(f"{config_path}: valid")


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", type=click.Path(), default=None, help="Output directory.")
@click.option("--workers", type=int, default=1, show_default=True, help="Worker pool size (scans).")
@click.option("--server", default=None, help="URL of a running service; in-process otherwise.")
def run(config_path: str, seed: int | None, out: str | None, workers: int, server: str | None) -> None:
    """Run the experiment named in CONFIG_PATH and write its reports."""
    try:
        data, lines = _load(config_path)
        if seed is not None:
            data["seed"] = seed
        cfg = validate_config(data, lines)
    except ConfigError as exc:
        _fail_schema(exc, config_path)
    out_dir = pathlib.Path(out or cfg.output_dir or "out")
    with _client(server) as client:
        try:
            report = _run_one(client, data, out_dir)
        except ConfigError as exc:
            _fail_schema(exc, config_path)
    click.echo(f"experiment: {report['experiment']}")
    _echo_checks(report)
    click.echo(f"report written to {out_dir}")
    sys.exit(0 if report["passed"] else CHECK_EXIT)


def _parse_param(spec: str) -> tuple[str, list[float]]:
    name, _, rng = spec.partition("=")
    parts = rng.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--param expects name=start:step:stop, got {spec!r}")
    start, step, stop = (float(x) for x in parts)
    if step <= 0:
        raise ConfigError("--param step must be positive")
    vals = []
    v = start
    while v <= stop + 1e-12:
        vals.append(round(v, 12))
        v += step
    return name.strip(), vals


def _set_path(data: dict, dotted: str, value) -> None:
    node = data
    *parents, leaf = dotted.split(".")
    for p in parents:
        node = node.setdefault(p, {})
    node[leaf] = value


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--param", "param_spec", required=True, help="Sweep, e.g. alpha=0:0.25:2")
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--server", default=None)
def scan(config_path, param_spec, seed, out, workers, server) -> None:
    """Fan an experiment out over a parameter range."""
    try:
        data, lines = _load(config_path)
        if seed is not None:
            data["seed"] = seed
        cfg = validate_config(data, lines)
        name, values = _parse_param(param_spec)
    except ConfigError as exc:
        _fail_schema(exc, config_path)
    dotted = name if "." in name else f"params.{name}"
    out_root = pathlib.Path(out or cfg.output_dir or "out")
    master_seed = data.get("seed", 0)

    def one(idx_value):
        idx, value = idx_value
        sub = json.loads(json.dumps(data))  # deep copy
        _set_path(sub, dotted, value)
        sub["seed"] = master_seed + idx
        validate_config(sub)
        with _client(server) as client:
            return value, _run_one(client, sub, out_root / f"{name}_{value:g}")

    results = []
    try:
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            for value, report in pool.map(one, enumerate(values)):
                results.append((value, report))
                status = "PASS" if report["passed"] else "FAIL"
                click.echo(f"[{status}] {name}={value:g}")
    except ConfigError as exc:
        _fail_schema(exc, config_path)
    summary = {
        "param": name,
        "values": [v for v, _ in results],
        "passed": [r["passed"] for _, r in results],
    }
    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / "scan_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    sys.exit(0 if all(summary["passed"]) else CHECK_EXIT)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8571, show_default=True)
def serve(host: str, port: int) -> None:
    """Start the experiment service."""
    import uvicorn

    uvicorn.run("weinstein.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
