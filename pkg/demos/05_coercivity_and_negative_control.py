"""Estimating C for a continuous sampler, and what happens when C = 0."""
import numpy as np

from rovf.analysis import residual_plateau, run_trials
from rovf.samplers import Deterministic, RandomSpectral, RngStream, coercivity_constant, estimate_coercivity_mc

spec = RandomSpectral(4, 0.0, 1.0)
est, se = estimate_coercivity_mc(spec, 20_000, RngStream(5))
print(f"Monte Carlo C = {est:.4f} +- {se:.4f}, analytic {spec.analytic_coercivity:.4f}")

# a fixed projection never touches its kernel
P = Deterministic(np.diag([1.0, 0.0]))
print(f"C for a fixed proper projection: {coercivity_constant(P)}")
s = run_trials(P, np.array([1.0, 1.0]), 10, 5, master_seed=5)
print(f"mean |r_n|^2: {s.mean_res_sq[:4]} ... plateau detected: {residual_plateau(s)}")
