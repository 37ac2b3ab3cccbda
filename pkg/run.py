"""Entry point for running the attitude control simulator CLI."""

import sys

from app.main import main

if __name__ == "__main__":
    sys.exit(main())
