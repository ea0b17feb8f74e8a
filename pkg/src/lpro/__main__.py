import sys

from lpro.cli import main

sys.exit(main())
