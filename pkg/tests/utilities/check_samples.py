import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT))

from documents import digest, load_document  # noqa: E402
from main import DOCUMENT_KINDS  # noqa: E402


def main():
    samples_dir = ROOT / "samples"
    failures = 0
    try:
        print(f"Checking documents in: {samples_dir}")
        print("\nfile                      | kind       | sha256")
        print("--------------------------|------------|-----------------")
        for path in sorted(samples_dir.glob("*.json")):
            kind = json.loads(path.read_text(encoding="utf-8")).get("kind")
            if kind not in DOCUMENT_KINDS:
                print(f"{path.name:<25} | {'?':<10} | unknown kind {kind!r}")
                failures += 1
                continue
            model, builder = DOCUMENT_KINDS[kind]
            try:
                builder(load_document(path, model))
            except Exception as e:
                print(f"{path.name:<25} | {kind:<10} | {e}")
                failures += 1
                continue
            print(f"{path.name:<25} | {kind:<10} | {digest(path)[:16]}")

        if failures:
            print(f"\nError: {failures} invalid document(s)")
            sys.exit(1)

    except (OSError, json.JSONDecodeError) as e:
        print(f"\nError: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
