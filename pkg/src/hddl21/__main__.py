import sys

from hddl21.cli import main

sys.exit(main())
