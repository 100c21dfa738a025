"""Regenerate the committed golden CLI outputs (run from anywhere)."""

import pathlib
import subprocess
import sys

from golden_manifest import GOLDEN_RUNS

HERE = pathlib.Path(__file__).parent


def main() -> None:
    out_dir = HERE / "golden"
    out_dir.mkdir(exist_ok=True)
    for name, argv, expected_exit in GOLDEN_RUNS:
        proc = subprocess.run([sys.executable, "-m", "choqint", *argv],
                              capture_output=True, text=True)
        if proc.returncode != expected_exit:
            raise SystemExit(
                f"{name}: exit {proc.returncode}, expected {expected_exit}\n{proc.stderr}"
            )
        (out_dir / name).write_text(proc.stdout, encoding="utf-8")
        print(f"wrote {name} ({len(proc.stdout)} bytes)")


if __name__ == "__main__":
    sys.path.insert(0, str(HERE))
    main()
