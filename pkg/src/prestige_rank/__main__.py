"""Allow ``python -m prestige_rank``."""

import sys

from .cli import main

sys.exit(main())
