import sys

from fracenergy.cli import main

sys.exit(main())
