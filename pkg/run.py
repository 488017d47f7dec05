#!/usr/bin/env python3
"""
latforge - Entry Point
Run with: python run.py <command> ...
"""

import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
