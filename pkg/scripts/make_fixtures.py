"""Write the canonical discrete triples to data/ as CLI input documents."""
import argparse
import json
import os

from pidkit import fixtures
from pidkit.cli import document_for

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default=os.path.join(HERE, "..", "data"))
    ap.add_argument("names", nargs="*", default=sorted(fixtures.CANONICAL))
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    for name in args.names:
        path = os.path.join(args.out_dir, f"{name}.json")
        with open(path, "w") as f:
            json.dump(document_for(fixtures.CANONICAL[name]()), f, indent=1)
        print(path)


if __name__ == "__main__":
    main()
