#!/usr/bin/env python3
"""Smoke test for the gaugekit_py extension module.

Builds nothing itself: run `cargo build -p gaugekit-py` first, then
`python3 python/smoke_test.py`. The script copies the cdylib next to itself
under the importable name and exercises each exposed class.
"""

import math
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
REPO = HERE.parent


def stage_module() -> None:
    candidates = [
        REPO / "target" / "debug" / "libgaugekit_py.so",
        REPO / "target" / "release" / "libgaugekit_py.so",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p gaugekit-py")
    target = HERE / "gaugekit_py.so"
    shutil.copyfile(built, target)


stage_module()
sys.path.insert(0, str(HERE))
import gaugekit_py as gk  # noqa: E402


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


# expressions: evaluation and exact gradients
e = gk.Expression("sin(x1) * x2 + x2^3", ["x1", "x2"])
approx(e.eval([0.5, 2.0]), math.sin(0.5) * 2.0 + 8.0, 1e-12)
g = e.grad([0.5, 2.0])
approx(g[0], math.cos(0.5) * 2.0, 1e-12)
approx(g[1], math.sin(0.5) + 12.0, 1e-12)

# Lie groups: exponential and brackets
so3 = gk.LieGroup.so3()
assert so3.dim == 3
r = so3.exp([0.0, 0.0, 1.0], math.pi / 2)  # quarter turn about z
approx(r[0][1], -1.0, 1e-12)
approx(so3.bracket([1, 0, 0], [0, 1, 0])[2], 1.0, 1e-12)

# connections: curvature and parallel transport against a closed form
conn = gk.Connection(1, 1, [["f1"]])
f, err = conn.transport(["t"], 0.0, 1.0, [2.0], steps=64)
approx(f[0], 2.0 * math.exp(-1.0), 1e-9)
assert err < 1e-9

flat = gk.Connection(2, 1, [["0", "0"]])
hol = flat.holonomy(["cos(2*pi*t)", "sin(2*pi*t)"], 0.0, 1.0)
approx(hol[0][0], 1.0, 1e-12)
linear, dev = conn.check_linear()
assert linear, f"f1 symbol should be fiberwise linear (deviation {dev})"

# gauge fields: monopole flux quantization and induced connections
u1 = gk.LieGroup.u1()
monopole = gk.GaugeField(u1, 2, [["0"], ["0.5*(1 - cos(x1))"]])
eps = 1e-3
total = monopole.flux(0, 0, 1, (eps, math.pi - eps, 0.0, 2 * math.pi), divs=128)
approx(total, 2 * math.pi * math.cos(eps), 1e-6)
ok, residual = monopole.check_axiom(samples=3, seed=5)
assert ok, f"principal axiom residual {residual}"

induced = monopole.induce_standard()
curv = induced.curvature([1.0, 0.3], [1.0, 0.0])
approx(curv[1][0][1], 0.5 * math.sin(1.0), 1e-10)  # R = F * rotation generator

# config runner round trip
passed, report = gk.run_config_text(
    """
    [group]
    kind = "u1"
    [gauge]
    comps = [["0"], ["0.5*(1 - cos(x1))"]]
    [task.1]
    kind = "flux"
    a = 1
    mu = 1
    nu = 2
    rect = [0.001, 3.1405926535897933, 0.0, 6.283185307179586]
    divs = 128
    """
)
assert passed
assert '"flux": 6.28' in report, report

print("smoke test: all checks passed")
