import sys

from mdfs.cli import main

sys.exit(main())
