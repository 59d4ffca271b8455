#!/usr/bin/env python3
"""Regenerate the shipped policy files from a configuration."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dcmon.config import DEFAULT_CONFIG, load_config
from dcmon.corpus import POLICY_DIR, write_policy_files


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=None, help="config JSON (defaults to built-in)")
    parser.add_argument("--dest", default=str(POLICY_DIR))
    args = parser.parse_args()
    config = load_config(args.config) if args.config else DEFAULT_CONFIG
    dest = Path(args.dest)
    write_policy_files(dest, config)
    print(f"wrote policy corpus to {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
