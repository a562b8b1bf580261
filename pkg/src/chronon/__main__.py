import sys

from chronon.cli import main

sys.exit(main())
