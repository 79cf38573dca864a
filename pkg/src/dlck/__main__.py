import sys

from dlck.cli import main

sys.exit(main())
