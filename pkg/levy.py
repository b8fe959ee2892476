#!/usr/bin/env python3
"""
Lévy Potential Toolkit entry point

    python levy.py catalog
    python levy.py psi --spec stable:1.5 --r 0.1,1,10
    python levy.py experiment harnack --spec stable:1 --preset quick
    python levy.py verify
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
