"""Random subspace projections reconstruct every path exactly."""
import numpy as np

from rovf.iteration import StoppingRule, frame_energy, parseval_defect, run_path
from rovf.samplers import FusionFrameProjection, RngStream, coercivity_constant, fusion_frame_bounds

# three subspaces of R^3 with weights v_i^2
spec = FusionFrameProjection(
    ([[1, 0, 0]], [[0, 1, 0], [0, 0, 1]], [[1, 1, 1]]),
    [0.3, 0.3, 0.4],
)
A, B = fusion_frame_bounds(spec)
print(f"fusion frame bounds: A = {A:.4f}, B = {B:.4f}; C = {coercivity_constant(spec):.4f}")

x = np.array([2.0, -1.0, 0.5])
for seed in range(3):
    p = run_path(spec, x, StoppingRule(max_steps=40), RngStream(3, seed))
    recon = p.terms.sum(axis=0) + p.final_residual
    print(f"path {seed}: {p.step_count} steps, energy {frame_energy(p):.6f}, "
          f"|r_n|^2 {p.final_residual @ p.final_residual:.1e}, "
          f"defect {parseval_defect(p):.1e}, |x - sum t - r| {np.linalg.norm(recon - x):.1e}")
