"""Run every reproduction scenario into one output directory.

    python3 scripts/reproduce_all.py [out_dir]
"""

import sys

from resetpid.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out"
    sys.exit(main(["--out", out, "reproduce", "all"]))
