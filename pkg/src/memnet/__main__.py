import sys

from memnet.cli import main

if __name__ == "__main__":
    sys.exit(main())
