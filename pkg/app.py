"""
Main entry point for the bipolaron toolkit
Run with: python app.py <command> [flags]   (commands: cp, pt, phase, coherent, gross, fock)
"""
import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
