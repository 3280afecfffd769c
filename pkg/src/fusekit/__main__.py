"""python -m fusekit entry point."""

import sys

from fusekit.cli import main

if __name__ == "__main__":
    sys.exit(main())
