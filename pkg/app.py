"""Command-line entry point: python app.py JOB.json [flags]."""

import sys

from thermoinfo.cli import main

if __name__ == "__main__":
    sys.exit(main())
