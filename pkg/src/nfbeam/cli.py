"""Command-line entry point.

    nfb <kind> --config cfg.json [--seed SEED] [--out DIR]

Runs one experiment kind against a JSON config and writes <kind>.csv,
summary.json, and config.json into the output directory.  Exit status is 0
when every summary check passes, 2 when the run completed but a check
failed, and 1 on any usage or configuration error (reported as a one-line
JSON record on stderr).
"""

import argparse
import json
import sys
from pathlib import Path

from .experiments import KINDS, ConfigError, parse_config, run


def _fail(stage: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": stage, "message": message}) + "\n")
    return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nfb",
        description="near-field beamspace experiment harness",
    )
    parser.add_argument("kind", choices=sorted(KINDS), help="experiment kind")
    parser.add_argument(
        "--config", required=True, metavar="PATH", help="JSON config file"
    )
    parser.add_argument(
        "--seed", type=int, default=None, help="override the config seed"
    )
    parser.add_argument(
        "--out", default=".", metavar="DIR", help="output directory (default: cwd)"
    )
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse prints its own message; normalize usage errors to exit 1
        return 0 if e.code == 0 else 1

    try:
        text = Path(args.config).read_text()
    except OSError as e:
        return _fail("config", f"cannot read {args.config}: {e}")

    try:
        raw = json.loads(text)
        if isinstance(raw, dict):
            raw.setdefault("kind", args.kind)
            if raw["kind"] != args.kind:
                return _fail(
                    "config",
                    f"config kind {raw['kind']!r} does not match argument {args.kind!r}",
                )
            if args.seed is not None:
                raw["seed"] = args.seed
        config = parse_config(json.dumps(raw))
    except (ConfigError, json.JSONDecodeError) as e:
        return _fail("config", str(e))

    try:
        return run(config, args.out)
    except ConfigError as e:
        return _fail("config", str(e))
    except (ValueError, OSError) as e:
        return _fail("runtime", str(e))


if __name__ == "__main__":
    sys.exit(main())
