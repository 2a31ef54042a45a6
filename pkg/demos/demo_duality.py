#!/usr/bin/env python3
"""
=====================================
Duals, hulls, and the double dual
=====================================

The dual of an affine space collects its affine functions; the space
embeds into the dual of that dual together with its model vectors.
With a distinguished model vector the constrained dual appears, and
applying the construction twice returns the original space.
"""

import numpy as np

from affgeo.affine import AffineSpaceSpec
from affgeo.duality import (
    AVCoordinates, DualElement, F_of_section, HullPoint, SpecialAffineSpace,
    double_special_dual, dual_dimension, one, pair, special_dual,
)
from affgeo import symexpr as se

space = AffineSpaceSpec(2)
print("dual dimension of a plane:", dual_dimension(space))

d = DualElement(space, [2.0, 3.0], 5.0)
h = HullPoint(space, [1.0, 0.0], 1.0)
print("pairing of ((1,0),1) with (w=(2,3), c=5):", pair(h, d))
print("embedded point against the constant function:",
      pair(HullPoint.embed_point(space.point([7.0, -1.0])), one(space)))
print("embedded vector against the constant function:",
      pair(HullPoint.embed_vector(space.vector([7.0, -1.0])), one(space)))

S = SpecialAffineSpace(space, [0.0, 1.0])
sd = special_dual(S)
print("\nconstrained dual for v = (0, 1):")
print("  membership of the constant function:", sd.is_member(sd.one))
print("  quotient coordinates:", sd.quotient_var_names())

maps = double_special_dual(S)
rng = np.random.default_rng(0)
x = rng.uniform(-3, 3, 2)
print("double-dual round trip of", x, "->", maps.backward(maps.forward(x)))
print("distinguished vector lands on the constant direction:",
      maps.forward_linear(S.v))

av = AVCoordinates(base=("x",))
sigma = se.parse("x^2", av.context())
F = F_of_section(sigma, av)
print("\nsection x -> x^2 has attached function:", F)
print("  fiber slope:", se.differentiate(F, "s"))
print("  value on the graph:", se.subst(F, {"s": sigma}))
