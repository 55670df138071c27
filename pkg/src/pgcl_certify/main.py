"""Console entry point for ``pgcl-certify``."""

import sys
from collections.abc import Sequence

from pgcl_certify.cli.commands import run


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
