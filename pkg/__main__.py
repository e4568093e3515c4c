import sys

from src import TeleDrive

if __name__ == "__main__":
    sys.exit(TeleDrive(sys.argv[1:]).run())
