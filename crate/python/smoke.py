"""Smoke test for the alphaflow_py extension.

Build it first, e.g.

    cargo build --release -p alphaflow-py --features extension-module
    cp target/release/libalphaflow_py.so python/alphaflow_py.so
    python3 python/smoke.py

or install with maturin. ALPHAFLOW_PY_LIB may point at the built library.
"""

import importlib.machinery
import importlib.util
import math
import os
import sys


def load():
    path = os.environ.get("ALPHAFLOW_PY_LIB")
    if not path:
        import alphaflow_py

        return alphaflow_py
    loader = importlib.machinery.ExtensionFileLoader("alphaflow_py", path)
    spec = importlib.util.spec_from_file_location("alphaflow_py", path, loader=loader)
    mod = importlib.util.module_from_spec(spec)
    loader.exec_module(mod)
    return mod


def main():
    af = load()

    # grim reaper: w = pi, depth = -ln cos
    assert abs(af.slab_width(1.0) - math.pi) < 1e-10
    assert abs(af.cap_depth(0.5, 1.0) + math.log(math.cos(0.5))) < 1e-12
    theta = af.cap_angle(20.0, 0.75)
    assert abs(af.cap_depth(theta, 0.75) - 20.0) < 1e-9
    assert all(r["pass"] for r in af.translator_checks(0.75))

    circle = af.Curve.circle(128, 1.0)
    assert len(circle) == 128
    assert abs(circle.area() - math.pi) < 1e-9
    nxt = circle.step(circle.stable_dt(0.75), 0.75)
    assert nxt.t > 0 and nxt.area() < circle.area()

    trace = af.flow_to_extinction(circle, 0.75)
    assert trace.complete
    assert abs(trace.t_extinction - 1 / 1.75) < 1e-3

    rep = af.circle_oracle(1.0)
    assert rep["pass"], rep

    cap = af.Curve.doubled_cap(10.0, 0.75, n=256)
    d = cap.diagnostics()
    assert abs(d["ell"] - 10.0) < 0.5, d
    centered, shift = cap.centered()
    assert abs(centered.hausdorff(cap.translated(-shift[0], -shift[1]))) < 1e-9

    try:
        af.slab_width(0.4)
    except ValueError as e:
        assert "(1/2, 1]" in str(e)
    else:
        raise AssertionError("alpha = 0.4 accepted")

    print("alphaflow_py smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
