"""
Module entry point for running swarm_beam as a module.

This allows running the experiments with:
python -m swarm_beam <subcommand>
"""

import sys

from .main import main

if __name__ == "__main__":
    sys.exit(main())
