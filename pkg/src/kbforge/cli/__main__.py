"""python -m kbforge.cli: same entry point as the kbforge console script."""

import sys

from .main import main

if __name__ == "__main__":
    sys.exit(main())
