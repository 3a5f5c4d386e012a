"""Smoke test for the derham_py extension.

Build with `cargo build -p derham-python --release`, then run
`python3 crates/python/python/smoke.py target/release`.
"""

import importlib.machinery
import importlib.util
import json
import shutil
import sys
import tempfile
from pathlib import Path


def load(target: Path):
    lib = next(p for p in (target / "libderham_py.so", target / "libderham_py.dylib") if p.exists())
    tmp = Path(tempfile.mkdtemp()) / "derham_py.so"
    shutil.copy(lib, tmp)
    loader = importlib.machinery.ExtensionFileLoader("derham_py", str(tmp))
    spec = importlib.util.spec_from_file_location("derham_py", tmp, loader=loader)
    mod = importlib.util.module_from_spec(spec)
    loader.exec_module(mod)
    return mod


def main() -> int:
    target = Path(sys.argv[1] if len(sys.argv) > 1 else "target/debug")
    dr = load(target)

    w = dr.classify(3, 2.0)
    assert w["class"] == "BoundaryExcluded", w
    assert dr.classify(4, 4.5) == {"n": 4, "delta": 4.5, "class": "Injection", "m": 1}

    b = dr.harmonics(3, 2)
    assert len(b["members"]) == 5

    rows = dr.expansion(3, [4.0, 0.0, 0.0], [1.0, 0.0, 0.0], 8)
    assert rows[-1]["remainder"] < rows[0]["remainder"]

    basis = dr.cohomology_basis(3, 1, 0)
    assert basis["rank"] == 3 and len(basis["forms"]) == 3
    g = json.dumps(basis["forms"][0])
    dg = json.loads(dr.exterior_d(g))
    assert dg["degree"] == 2 and dg["coeffs"] == [], dg
    assert json.loads(dr.star(dr.star(g)))["degree"] == 1

    try:
        dr.classify(1, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("n = 1 accepted")

    report = dr.run_suite("n = 2\nchecks = algebra\n")
    assert report["checks"] and all(c["verdict"] == "pass" for c in report["checks"])

    print(f"derham_py {dr.__version__}: smoke ok ({len(report['checks'])} suite checks)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
