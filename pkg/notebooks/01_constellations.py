# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:light
#     text_representation:
#       extension: .py
#       format_name: light
#       format_version: '1.5'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# # Golden angle constellations
#
# Every point sits at phase `2*pi*phi*n` with `phi = (3 - sqrt(5))/2`; the
# schemes differ only in how radii and probabilities grow with `n`.

import numpy as np

from gam import (average_power, entropy_bits, gen_disc, gen_gb_hr, gen_pb_se, gen_qam,
                 golden_angle_phase, min_distance, papr_db)

# The golden angle in degrees, and the first few phases.

print(np.degrees(golden_angle_phase(1)))
print([round(golden_angle_phase(n), 4) for n in range(6)])

# ## Disc and bell shapes
#
# Disc-GAM uses `r_n = c*sqrt(n)`, which gives each point the same area.
# The high-rate bell (GB-HR) inverts a Gaussian CDF instead, so the radii
# spread out in the tail.

disc = gen_disc(1, 256)
bell = gen_gb_hr(256)
for c in (disc, bell):
    print(f"{c.scheme:10s} power={average_power(c):.12f} PAPR={papr_db(c):.3f} dB "
          f"dmin={min_distance(c):.4f}")

# The outer radii tell the story: the bell's last point carries most of the
# peak power.

print(np.round(disc.radii[-4:], 3), np.round(bell.radii[-4:], 3))

# ## Probabilistic shaping on a disc
#
# PB-SE keeps disc radii and shapes the pmf geometrically to a target
# entropy. `log2(N) - 1` bits is a reasonable default.

pb = gen_pb_se(256, 7.0)
print(entropy_bits(pb), pb.probs[:3], pb.probs[-1])

# A generalized disc starting at a higher index has a small PAPR.

print(papr_db(gen_disc(512, 1535)))

# Square QAM for comparison.

print(papr_db(gen_qam(16)))
