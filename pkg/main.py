"""
ciid-lab - Main Entry Point
"""
import sys

from app.cli.routes import main

if __name__ == "__main__":
    sys.exit(main())
