#!/usr/bin/env python3
"""Download the UCI banknote authentication file and verify its layout.

Usage: python scripts/fetch_banknote.py [DEST] [--sha256 HEX]

The digest of the downloaded file is printed so it can be pinned with
--sha256 on later runs.
"""

import argparse
import sys

from jelk import banknote


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dest", nargs="?", default=str(banknote.DEFAULT_PATH))
    ap.add_argument("--url", default=banknote.URL)
    ap.add_argument("--sha256", default=None, help="expected SHA-256 of the file")
    args = ap.parse_args(argv)
    try:
        path = banknote.fetch(args.dest, args.url, args.sha256)
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 2
    print(f"{path}  sha256={banknote.sha256(path)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
