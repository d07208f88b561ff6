"""Regenerate the shipped example group files (deterministic)."""
from pathlib import Path

from hilbertflow.groups import EXAMPLE_BUILDERS, save_group

OUT = {
    "so21_triangle": "so21_triangle.json",
    "deformed_triangle": "deformed_triangle.json",
    "so31_simplex": "so31_simplex.json",
}


def main():
    root = Path(__file__).resolve().parent.parent
    for target in (root / "groups", root / "src" / "hilbertflow" / "data"):
        target.mkdir(parents=True, exist_ok=True)
        for name, fname in OUT.items():
            save_group(EXAMPLE_BUILDERS[name](), target / fname)
            print(f"wrote {target / fname}")


if __name__ == "__main__":
    main()
