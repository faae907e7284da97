#!/usr/bin/env python3
"""Validate eqkit run configurations without running them"""

import sys

from eqkit.config import load_config
from eqkit.errors import ConfigError


def validate_config(path: str) -> bool:
    """Parse one configuration and print a short summary"""
    try:
        config = load_config(path)
    except ConfigError as e:
        location = f" (field {e.field})" if e.field else ""
        location += f" (line {e.line})" if e.line else ""
        print(f"❌ {path}{location}: {e}")
        return False

    print(f"✅ {path}: game {config.game.name}, analyses {', '.join(config.analyses)}")
    params = config.game_params()
    for key, value in params.items():
        print(f"     {key} = {value!r}")
    return True


if __name__ == "__main__":
    if len(sys.argv) < 2:
        print("Usage: validate_config.py CONFIG [CONFIG ...]", file=sys.stderr)
        sys.exit(2)
    results = [validate_config(path) for path in sys.argv[1:]]
    sys.exit(0 if all(results) else 1)
