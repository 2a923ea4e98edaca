import sys

from agilesim.cli import main

sys.exit(main())
