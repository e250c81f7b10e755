#!/usr/bin/env python3
import os
import sys

from treeirv.cli import main

if __name__ == "__main__":
    # No arguments: run the acceptance checks at the configured size
    argv = sys.argv[1:] or ["selftest", "--jobs", os.environ.get("TREEIRV_JOBS", "1")]
    raise SystemExit(main(argv))
