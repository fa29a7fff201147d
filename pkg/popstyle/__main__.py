import sys

from popstyle.task.cli import main

sys.exit(main())
