"""Command line entry point: ``leakctl-plot <spec.json> [more specs...]``."""

import argparse
import sys

from .figspec import SpecError, load_spec
from .render import render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="leakctl-plot",
        description="Render figures from leakctl CSV outputs per JSON specs.",
    )
    parser.add_argument("specs", nargs="+", metavar="spec.json",
                        help="figure spec files to render")
    args = parser.parse_args(argv)
    for path in args.specs:
        try:
            out = render(load_spec(path))
        except SpecError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(out)
    return 0


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
