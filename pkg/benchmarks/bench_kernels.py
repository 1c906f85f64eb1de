#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-Python fallback.

Both backends implement the same two hot paths -- polyline resampling and
G-code line scanning -- and must return identical results; this script
checks that on every workload and then reports best-of-N timings.

Run from the repository root after an editable install:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --repeat 9 --lines 200000
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

from sealprint.kernels import pure

try:
    from sealprint.kernels import _native as native
except ImportError:  # pragma: no cover - benchmark without the extension
    native = None

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "tests" / "data" / "golden"


def wavy_polyline(points):
    """A flat [x0, y0, ...] sine-wave path with ``points`` vertices."""
    coords = []
    for i in range(points):
        t = i / (points - 1)
        coords.append(240.0 * t)
        coords.append(40.0 + 12.0 * math.sin(14.0 * math.pi * t))
    return coords


def gcode_lines(count):
    """``count`` realistic lines cycled from the golden slicer corpus."""
    pool = []
    for path in sorted(GOLDEN_DIR.glob("*.gcode")):
        pool.extend(path.read_text().splitlines())
    return [pool[i % len(pool)] for i in range(count)]


def best_of(repeat, fn):
    best = math.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def report(label, py_time, native_time):
    if native_time is None:
        print(f"{label:<28} python {py_time * 1e3:8.2f} ms   native    (missing)")
        return
    print(f"{label:<28} python {py_time * 1e3:8.2f} ms   "
          f"native {native_time * 1e3:8.2f} ms   x{py_time / native_time:.1f}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions, best is kept (default 5)")
    parser.add_argument("--points", type=int, default=20000,
                        help="vertices in the resampling workload")
    parser.add_argument("--lines", type=int, default=100000,
                        help="G-code lines in the scanning workload")
    args = parser.parse_args(argv)

    if native is None:
        print("warning: compiled extension not importable; timing fallback only",
              file=sys.stderr)

    coords = wavy_polyline(args.points)
    lines = gcode_lines(args.lines)

    workloads = [
        ("resample open x0.5mm",
         lambda mod: mod.resample_polyline(coords, False, 0.5)),
        ("resample closed x0.1mm",
         lambda mod: mod.resample_polyline(coords, True, 0.1)),
        ("scan corpus lines",
         lambda mod: [mod.scan_line(line) for line in lines]),
    ]

    print(f"workloads: {args.points} vertices, {args.lines} lines, "
          f"best of {args.repeat}")
    for label, run in workloads:
        if native is not None and run(pure) != run(native):
            print(f"error: backends disagree on {label!r}", file=sys.stderr)
            return 1
        py_time = best_of(args.repeat, lambda: run(pure))
        native_time = (best_of(args.repeat, lambda: run(native))
                       if native is not None else None)
        report(label, py_time, native_time)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
