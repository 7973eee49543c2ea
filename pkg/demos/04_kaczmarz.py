"""Randomized Kaczmarz is the rank-one case of the same iteration."""
import math

import numpy as np

from rovf.analysis import check_mean_square_bound
from rovf.kaczmarz import LinearSystem, error_process_equivalence, kaczmarz_trials, rate, solve_rk
from rovf.samplers import RngStream

sys_ = LinearSystem.gaussian(40, 10, RngStream(4))
C, coercive = rate(sys_)
print(f"C = lam_min(A'A)/|A|_F^2 = {C:.4f}, coercive: {coercive}")

x0 = np.zeros(10)
# solver errors and frame residuals coincide when they share a stream
dev = max(error_process_equivalence(sys_, x0, 100, RngStream(4, s)) for s in range(5))
print(f"max |(x_k - x*) - r_k| over 5 seeds: {dev:.1e}")

n = math.ceil(math.log(1e-10) / math.log1p(-C))
h = solve_rk(sys_, x0, n, RngStream(4, 99))
print(f"one run, {n} steps: |x_n - x*| = {h.errors[-1]:.2e}")

s = kaczmarz_trials(sys_, x0, n, 100, master_seed=4)
print(f"mean-square bound over 100 trials: {check_mean_square_bound(s, C).passed}")
print(f"fraction with error <= 1e-4: {np.mean(s.residual_norms[:, -1] <= 1e-4):.2f}")
