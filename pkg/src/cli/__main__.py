import sys

from src.cli.harness import main

sys.exit(main())
