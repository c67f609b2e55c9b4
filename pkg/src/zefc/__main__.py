"""Module entry point for `python -m zefc`."""

import sys

from .cli import main

sys.exit(main())
