#!/usr/bin/env python3
"""
================================
Affine spaces and chart changes
================================

Build a two-dimensional affine space with three charts, move points and
vectors between them, and watch the chart-independent identities hold:
the three-point cocycle identity and the linear-part law of affine maps.
"""

import numpy as np

from affgeo.affine import (
    AffineMap, AffineSpaceSpec, BiAffineMap, cocycle_check, difference,
)

spec = AffineSpaceSpec(2)
spec.add_chart("shift", np.eye(2), [1.0, 1.0])
theta = 0.7
spec.add_chart("rot", [[np.cos(theta), -np.sin(theta)],
                       [np.sin(theta), np.cos(theta)]], [0.5, -2.0])

p = spec.point([0.0, 0.0], chart="shift")
q = spec.point([0.0, 0.0])
print("difference of the two chart origins:", difference(p, q).components)

rng = np.random.default_rng(0)
worst = 0.0
for _ in range(200):
    pts = [spec.point(rng.uniform(-5, 5, 2), chart=c)
           for c in ("ref", "shift", "rot")]
    worst = max(worst, cocycle_check(*pts))
print(f"worst three-chart cocycle residual over 200 triples: {worst:.3e}")

phi = AffineMap(spec, spec, [[2.0, 0.0], [0.0, 1.0]], [1.0, 0.0])
a = spec.point([0.3, -0.4], chart="rot")
u = np.array([1.0, 2.0])
shifted = spec.point(a.in_reference() + u)
lhs = phi.apply(shifted).coords - phi.apply(a).coords
print("linear-part law residual:", np.max(np.abs(lhs - phi.matrix @ u)))

bi = BiAffineMap(C=[[[1.0]]], D=[[1.0]], E=[[1.0]], F=[1.0])
print("parts of (x, y) -> xy + x + y + 1 at u=2, y=3:")
print("  slot-1 linear part:", bi.part_first([2.0], [3.0]))
print("  slot-2 linear part:", bi.part_second([2.0], [3.0]))
print("  bilinear part:    ", bi.bilinear_part([2.0], [3.0]))
