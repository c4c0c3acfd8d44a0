"""
kopcheck CLI entry point.

Enables: python -m kopcheck
"""

from kopcheck.cli import main

if __name__ == "__main__":
    main()
