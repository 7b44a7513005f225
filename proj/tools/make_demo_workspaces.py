#!/usr/bin/env python3
"""Generate the demo workspace files in workspaces/.

Non-polynomial shapes (inverse ellipse, letter C) are written as trigonometric polynomials whose
coefficients are computed by FFT from dense samples and truncated below 1e-16 of the curve size,
so they are exact to double precision.

Usage: python3 tools/make_demo_workspaces.py [output_dir]
"""
import json
import math
import sys
from pathlib import Path

import numpy as np

DENSE = 4096


def trig_terms(samples, center, rel_cut=1e-16):
    """Fourier terms c_n e^{ins} of uniform samples, relative to center."""
    z = np.asarray(samples) - center
    c = np.fft.fft(z) / len(z)
    n = np.fft.fftfreq(len(z), d=1.0 / len(z)).astype(int)
    scale = np.abs(c).max()
    keep = [(int(k), complex(v)) for k, v in zip(n, c) if abs(v) > rel_cut * scale]
    keep.sort(key=lambda t: (abs(t[0]), t[0]))
    return [[k, round_float(v.real), round_float(v.imag)] for k, v in keep]


def round_float(x):
    return float(f"{x:.17g}")


def param(clockwise):
    s = 2.0 * math.pi * np.arange(DENSE) / DENSE
    return -s if clockwise else s


def trig_spec(samples, center):
    return {"kind": "trig_polynomial", "center": list(center), "terms": trig_terms(samples, complex(*center))}


def letter_c(center, radius, half_width, sweep, facing, clockwise=True):
    """Thick circular arc of centerline radius `radius` spanning +-sweep around direction `facing`."""
    s = param(clockwise)
    c = complex(*center)
    z = c + (radius + half_width * np.cos(s)) * np.exp(1j * (facing + sweep * np.sin(s)))
    return trig_spec(z, center)


def inverse_ellipse(center, size, ratio, rotation, clockwise=True):
    """Inversion of an ellipse: r(phi) = size * sqrt(cos^2 + ratio^2 sin^2) / ratio (peanut for ratio > sqrt 2)."""
    s = param(clockwise)
    r = size * np.sqrt(np.cos(s) ** 2 + ratio ** 2 * np.sin(s) ** 2) / ratio
    z = complex(*center) + np.exp(1j * rotation) * r * np.exp(1j * s)
    return trig_spec(z, center)


def plum(center, radius, eps, petals, clockwise=True):
    """r(phi) = radius (1 + eps cos(petals phi)), written directly as a trig polynomial."""
    sgn = -1 if clockwise else 1
    terms = [[sgn, radius, 0.0],
             [sgn * (1 + petals), 0.5 * radius * eps, 0.0],
             [sgn * (1 - petals), 0.5 * radius * eps, 0.0]]
    return {"kind": "trig_polynomial", "center": list(center), "terms": terms}


def ellipse(center, a, b, rotation=0.0, orientation="cw"):
    return {"kind": "ellipse", "center": list(center), "semi_axes": [a, b], "rotation": rotation,
            "orientation": orientation}


def circle(center, r, orientation="cw"):
    return {"kind": "circle", "center": list(center), "radius": r, "orientation": orientation}


def scenario1(include_ellipse=True):
    internal, centers = [], []
    if include_ellipse:
        internal.append(ellipse((0.62, 0.05), 0.12, 0.3, 0.15))
        centers.append([0.62, 0.05])
    internal.append(inverse_ellipse((-0.6, 0.32), 0.11, 2.0, math.pi / 6))
    centers.append([-0.6, 0.32])
    internal.append(plum((-0.42, -0.6), 0.17, 0.18, 5))
    centers.append([-0.42, -0.6])
    internal.append(letter_c((0.55, -0.62), 0.2, 0.07, 0.75 * math.pi, math.pi))
    centers.append([0.35, -0.62])  # on the centerline at the back of the C, not in its hollow
    return {
        "name": "scenario1" if include_ellipse else "koebe3",
        "n_nodes": 256,
        "external": ellipse((0.0, 0.0), 1.7, 1.4, 0.0, "ccw"),
        "internal": internal,
        "centers": centers,
        "anchor": [0.0, 0.0],
    }


def scenario2():
    internal = [
        ellipse((-0.55, 0.38), 0.25, 0.12, 0.35),
        ellipse((-0.5, -0.42), 0.22, 0.1, -0.45),
        ellipse((0.62, 0.42), 0.3, 0.12, -0.5),
        ellipse((0.55, -0.5), 0.15, 0.28, 0.2),
    ]
    centers = [[-0.55, 0.38], [-0.5, -0.42], [0.62, 0.42], [0.55, -0.5]]
    return {
        "name": "scenario2",
        "n_nodes": 256,
        "external": ellipse((0.0, 0.0), 1.8, 1.3, 0.0, "ccw"),
        "internal": internal,
        "centers": centers,
        "anchor": [0.0, 0.0],
    }


def simple_files():
    return {
        "disk": {"name": "disk", "n_nodes": 128, "external": circle((0, 0), 1.0, "ccw"), "internal": [],
                 "centers": [], "anchor": [0.0, 0.0]},
        "sphere_world": {"name": "sphere_world", "n_nodes": 128, "external": circle((0, 0), 1.0, "ccw"),
                         "internal": [circle((0.5, 0.0), 0.2), circle((-0.4, 0.3), 0.15)],
                         "centers": [[0.5, 0.0], [-0.4, 0.3]], "anchor": [0.0, -0.3]},
        "overlapping": {"name": "overlapping", "n_nodes": 64, "external": circle((0, 0), 1.0, "ccw"),
                        "internal": [circle((0.2, 0.0), 0.3), circle((-0.2, 0.0), 0.3)],
                        "centers": [[0.3, 0.0], [-0.3, 0.0]], "anchor": [0.0, 0.6]},
    }


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "workspaces"
    out.mkdir(parents=True, exist_ok=True)
    files = {"scenario1": scenario1(True), "koebe3": scenario1(False), "scenario2": scenario2()}
    files.update(simple_files())
    for name, doc in files.items():
        (out / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")
        print(f"wrote {out / (name + '.json')}")


if __name__ == "__main__":
    main()
