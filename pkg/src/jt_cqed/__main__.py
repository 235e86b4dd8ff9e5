"""Entry point for running as a module: python -m jt_cqed"""

from .cli import main

if __name__ == "__main__":
    main()
