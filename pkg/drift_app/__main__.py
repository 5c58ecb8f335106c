from __future__ import annotations

import multiprocessing as mp
import sys

from .cli import run_cli


def main() -> int:
    try:
        mp.set_start_method("spawn")
    except RuntimeError:
        pass
    return run_cli(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
