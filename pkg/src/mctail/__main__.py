import sys

from mctail.cli import main

sys.exit(main())
