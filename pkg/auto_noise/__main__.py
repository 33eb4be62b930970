import sys

from auto_noise.cli import main

sys.exit(main())
