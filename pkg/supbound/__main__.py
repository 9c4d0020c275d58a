import sys

from supbound.cli import main

sys.exit(main())
