#!/usr/bin/env python3
"""Run the BlockPKI CLI from a source checkout: ``python scripts/blockpki.py issue --seed 7``."""

import sys
from pathlib import Path

# Add project root to path for imports
project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from src.blockpki.cli.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
