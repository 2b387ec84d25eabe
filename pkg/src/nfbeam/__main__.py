import sys

from nfbeam.cli import main

sys.exit(main())
