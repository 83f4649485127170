import sys

from trialreturn.cli import main

sys.exit(main())
