import sys

from sicqb.cli import main

sys.exit(main())
