#!/usr/bin/env python3
"""
Store check script for clustrec.

This script verifies the checksum of every artifact in a clustrec store and
reports per-kind counts.
"""

import os
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from clustrec.store import ArtifactStore  # noqa: E402


def check_store(root: Path) -> bool:
    """Check every artifact under root."""
    if not root.is_dir():
        print(f"❌ Store directory not found: {root}")
        print("Set CLUSTREC_STORE or pass the store root as the first argument")
        return False

    print(f"🔍 Checking artifacts in {root}...")
    results = ArtifactStore(root).verify_all()
    kinds = Counter(key.kind.value for key, _ in results)
    for kind, count in sorted(kinds.items()):
        print(f"  {kind}: {count}")

    all_ok = True
    for key, ok in results:
        if not ok:
            print(f"❌ {key.prefix} checksum mismatch")
            all_ok = False
    return all_ok


def main():
    """Main function."""
    print("clustrec artifact store check")
    print("=" * 50)

    root = Path(sys.argv[1] if len(sys.argv) > 1 else os.getenv("CLUSTREC_STORE", ".clustrec-store"))
    if check_store(root):
        print("\n✅ Every artifact matches its checksum")
    else:
        print("\n❌ Store check failed")
        print("💡 Run 'clustrec store rm <prefix>' and rebuild the affected artifacts")
        sys.exit(1)


if __name__ == "__main__":
    main()
