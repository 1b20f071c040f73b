"""Main entry point for the application"""

from seganforge.main import main

if __name__ == "__main__":
    raise SystemExit(main())
