import sys

from xaistab.cli import main

sys.exit(main())
