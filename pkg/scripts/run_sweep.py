"""
Script to run a parameter-plane sweep.

    python scripts/run_sweep.py fluctuations --out results/fluct
"""

import os
import sys

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dotenv import load_dotenv

# Load .env file BEFORE importing settings
load_dotenv(encoding="utf-8")

from app.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())
