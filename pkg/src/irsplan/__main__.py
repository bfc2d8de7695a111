"""Allows running the CLI as `python -m irsplan`."""

import sys

from .cli import main

sys.exit(main())
