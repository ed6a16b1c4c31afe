import sys

from efxmulti.cli import main

sys.exit(main())
