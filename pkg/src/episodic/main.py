"""Command-line entry point."""

import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

# Load environment variables from .env file before settings are read
env_path = Path(__file__).parent.parent.parent / ".env"
load_dotenv(env_path)


def run(argv: Optional[List[str]] = None) -> int:
    """Initialize monitoring and dispatch to the CLI."""
    from episodic.cli.app import run as run_cli
    from episodic.core.monitoring import init_monitoring

    init_monitoring()
    return run_cli(argv)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
