"""
Entry point for running zkace as a module: python -m zkace
"""

import sys
from .cli import main

if __name__ == '__main__':
    exit_code = main()
    sys.exit(exit_code)
