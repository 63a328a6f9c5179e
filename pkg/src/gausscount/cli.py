"""Thin command-line client for the service.

Every subcommand posts its JSON config to the matching endpoint and writes
the report.  By default the service runs in process (no socket); pass
``--server`` to talk to a running instance instead.

Exit codes: 0 success, 2 validation failure, 3 numerical-acceptance
failure, 4 I/O error.
"""

import argparse
import json
import os
import sys

import httpx

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

COMMAND_PATHS = {
    "pgf": "/v1/pgf",
    "tomo-state": "/v1/tomography/state",
    "tomo-channel": "/v1/tomography/channel",
    "oracle-compare": "/v1/oracle-compare",
}


def _client(server):
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    # In-process ASGI client; behaves like httpx.Client without a socket.
    import warnings

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*httpx.*")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _apply_seed(command: str, config: dict, seed):
    if seed is None:
        return config
    config = dict(config)
    if command in ("tomo-state", "tomo-channel"):
        backend = dict(config.get("backend", {"kind": "exact"}))
        backend["seed"] = seed
        config["backend"] = backend
    else:
        config["seed"] = seed
    return config


def _resolve_file_refs(config: dict, base_dir):
    """Inline any *_file references before posting.

    ``state_file`` and ``channel_file`` hold a JSON document,
    ``records_file`` a JSON-lines record stream, ``probe_records_file``
    a JSON list of per-probe record groups.  Paths are taken relative to
    the config file.
    """
    config = dict(config)
    for key, target, jsonl in (
        ("state_file", "state", False),
        ("channel_file", "channel", False),
        ("records_file", "records", True),
        ("probe_records_file", "probe_records", False),
    ):
        if key not in config:
            continue
        path = config.pop(key)
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        with open(path) as fh:
            if jsonl:
                config[target] = [json.loads(line) for line in fh if line.strip()]
            else:
                config[target] = json.load(fh)
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausscount",
        description="Counting statistics and tomography of Gaussian states",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "pgf": "counting statistics of a state",
        "tomo-state": "reconstruct a state from number expectations",
        "tomo-channel": "reconstruct a channel from coherent probes",
        "oracle-compare": "check the closed forms against the truncated-basis oracle",
    }
    for name, text in helps.items():
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, help="path to the JSON config")
        cmd.add_argument("--out", help="write the JSON report here (default: stdout)")
        cmd.add_argument("--seed", type=int, help="override the config seed")
        cmd.add_argument("--server", help="base URL of a running service")
        if name == "tomo-state":
            cmd.add_argument(
                "--records-out",
                help="also write the measurement records as JSON lines",
            )
    serve = sub.add_parser("serve", help="run the HTTP service (needs uvicorn)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        uvicorn.run("gausscount.service.app:app", host=args.host, port=args.port)
        return EXIT_OK

    try:
        with open(args.config) as fh:
            config = json.load(fh)
        config = _resolve_file_refs(config, os.path.dirname(os.path.abspath(args.config)))
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    config = _apply_seed(args.command, config, args.seed)

    try:
        with _client(args.server) as client:
            response = client.post(COMMAND_PATHS[args.command], json=config)
    except httpx.HTTPError as exc:
        print(f"service unreachable: {exc}", file=sys.stderr)
        return EXIT_IO

    if response.status_code in (400, 422):
        print(json.dumps(response.json(), indent=2, sort_keys=True), file=sys.stderr)
        return EXIT_VALIDATION
    if response.status_code != 200:
        print(f"service error {response.status_code}: {response.text}", file=sys.stderr)
        return EXIT_IO

    report = response.json()
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    try:
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if getattr(args, "records_out", None):
            lines = "".join(
                json.dumps(rec, sort_keys=True) + "\n" for rec in report["records"]
            )
            with open(args.records_out, "w") as fh:
                fh.write(lines)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO

    if report.get("passed") is False:
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
