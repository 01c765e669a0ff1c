"""Smoke test for the mapwit Python bindings.

Build the extension first:

    cargo build -p mapwit-py --features extension-module

then run this script from anywhere. It loads the shared library from the
cargo target directory.
"""

import importlib.util
import json
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    for profile in ("release", "debug"):
        for name in ("libmapwit_py.so", "libmapwit_py.dylib", "mapwit_py.dll"):
            lib = ROOT / "target" / profile / name
            if lib.exists():
                tmp = pathlib.Path(tempfile.mkdtemp())
                dest = tmp / ("mapwit_py.pyd" if name.endswith(".dll") else "mapwit_py.so")
                shutil.copy(lib, dest)
                spec = importlib.util.spec_from_file_location("mapwit_py", dest)
                mod = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(mod)
                return mod
    sys.exit("mapwit_py not built; run: cargo build -p mapwit-py --features extension-module")


def complete(n):
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


def main():
    mw = load()

    k, cert = mw.recognize(4, complete(4), k=3, hole_free=True, certificate=True)
    assert k == 3
    doc = json.loads(cert)
    assert doc["n"] == 4 and len(doc["intersections"]) == 4
    assert mw.verify(4, complete(4), cert, k=3, hole_free=True)
    assert not mw.verify(3, complete(3), cert)

    assert mw.recognize(5, complete(5), k=3) is None
    assert mw.recognize(3, complete(3)) == (2, None)
    assert mw.oracle(4, complete(4), 3, hole_free=True)
    assert not mw.oracle(3, [(0, 1), (1, 2)], 3, hole_free=True)

    svg = mw.render(cert)
    assert svg.startswith("<svg") and svg.count("<circle") == 4

    try:
        mw.recognize(2, [(0, 5)], k=3)
    except ValueError:
        pass
    else:
        raise AssertionError("bad edge accepted")
    print("ok")


if __name__ == "__main__":
    main()
