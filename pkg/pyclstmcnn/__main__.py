"""Allow `python -m pyclstmcnn`."""

import sys

from .cli import main


sys.exit(main())
