"""Command line front end.

    render --spec <plotspec.json>
    render <csv> [<csv> ...] --kind curves|trajectory|leader_timeline
           --out <path> [--log-scale] [--method <name>]

Exit codes: 0 success, 1 schema/spec error, 2 usage error,
3 I/O or rendering error.
"""

import argparse
import sys

from .render import KINDS, PlotSpec, SchemaError, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="render", description="Render figures from leadopt CSV files.")
    parser.add_argument("csv", nargs="*", help="input CSV path(s)")
    parser.add_argument("--spec", help="JSON PlotSpec file (overrides flags)")
    parser.add_argument("--kind", choices=KINDS)
    parser.add_argument("--out", help="output path; bare stem writes .png and .svg")
    parser.add_argument("--log-scale", action="store_true")
    parser.add_argument("--method", default="",
                        help="only draw rows for this method")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.spec:
            spec = PlotSpec.from_file(args.spec)
        else:
            if not args.csv or not args.kind or not args.out:
                build_parser().error(
                    "either --spec or csv paths with --kind and --out")
            spec = PlotSpec(inputs=args.csv, kind=args.kind, out=args.out,
                            log_scale=args.log_scale, method=args.method)
        stats = render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path in stats["written"]:
        print(f"wrote {path}")
    return 0


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
