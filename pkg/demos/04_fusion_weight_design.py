"""Designing the fusion weights.

Two closed-form designs: weights that minimize the steady-state error for
given nodal SNRs, and weights that equalize convergence speed when nodes
use different step sizes.
"""

import numpy as np

from fclms import (
    DesignInput,
    min_weighted_square,
    optimal_weights_snr,
    optimal_weights_speed,
    small_step_steady_state,
)

# the core optimizer: minimize sum c_j^2 / eta_j subject to sum c_j = 1
c, f = min_weighted_square((1.0, 3.0))
print(f"eta (1, 3) -> weights {np.round(c, 4)}, objective {f:.4f}")

# four nodes with very different SNRs
d = DesignInput(n_nodes=4, filter_length=16, kurtoses=(3.0,) * 4,
                snrs=(1e4, 3e3, 1e3, 3e2), sigma_q2=1e-9)
step = 0.002

c_opt, msd_opt = optimal_weights_snr(d, step)
msd_uniform = small_step_steady_state(d, step)
print("\nSNR-aware weights vs uniform (plain algorithm, small step):")
print(f"  snrs:            {d.snrs}")
print(f"  optimal weights: {np.round(c_opt, 4)}")
print(f"  predicted steady-state error: optimal "
      f"{10 * np.log10(msd_opt):.2f} dB, uniform "
      f"{10 * np.log10(msd_uniform):.2f} dB")

# speed-oriented weights depend only on the kurtoses; they minimize the
# quadratic load that caps the usable step size
d2 = DesignInput(n_nodes=3, filter_length=16, kurtoses=(1.8, 3.0, 6.0))
c_speed, load = optimal_weights_speed(d2)
print("\nspeed-oriented weights for kurtoses (1.8, 3, 6):",
      np.round(c_speed, 4), f"(load {load:.4f})")
