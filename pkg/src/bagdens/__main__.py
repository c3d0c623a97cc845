import sys

from bagdens.cli import main

sys.exit(main())
