import sys

from ifaudit.cli import main

sys.exit(main())
