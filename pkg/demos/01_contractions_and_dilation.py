"""Positive contractions, the energy gap, and the two-block dilation."""
import numpy as np

from rovf.dilation import halmos_dilate, verify_dilation
from rovf.linalg import is_positive_contraction, lemma2_gap, random_positive_contraction, random_projection
from rovf.samplers import RngStream

g = RngStream(1).generator()

# a random 0 <= T <= I in d = 5
T = random_positive_contraction(5, g)
ok, (lo, hi) = is_positive_contraction(T)
print(f"positive contraction: {ok}, spectrum in [{lo:.3f}, {hi:.3f}]")

# ||x||^2 - ||Tx||^2 - ||x - Tx||^2 is never negative ...
x = g.standard_normal(5)
print(f"gap for T:          {lemma2_gap(T, x):.6f}")

# ... and vanishes for orthogonal projections
P = random_projection(5, 2, g)
print(f"gap for projection: {lemma2_gap(P, x):.2e}")

# T is the compression of a projection on a space twice as large
D = halmos_dilate(T)
rep = verify_dilation(T, D)
print(f"dilation certificate passed: {rep.passed}")
print(f"  ||W'W - I||   = {rep.isometry_residual:.1e}")
print(f"  ||P^2 - P||   = {rep.idempotence_residual:.1e}")
print(f"  ||W'PW - T||  = {rep.compression_residual:.1e}")

# the energy split seen through the dilation
inside, outside, total = D.certificate(x)
print(f"||PWx||^2 + ||(I-P)Wx||^2 = {inside + outside:.6f}, ||x||^2 = {total:.6f}")
