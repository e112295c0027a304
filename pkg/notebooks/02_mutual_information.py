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

# # Mutual information over AWGN
#
# Two estimators: lattice quadrature of the output entropy (deterministic,
# fast for moderate N) and Monte Carlo (any N, with a standard error).

import numpy as np

from gam import (AwgnChannel, awgn_capacity, db_to_linear, gen_gb_hr, gen_qam,
                 mi_monte_carlo, mi_quadrature)

c = gen_gb_hr(16)
ch = AwgnChannel.for_constellation(c, 15.0)
print(mi_quadrature(c, ch))
print(mi_monte_carlo(c, ch, 200_000, seed=1))

# Changing the worker count leaves Monte-Carlo output untouched, since draws
# come from per-block streams keyed by the seed.

a = mi_monte_carlo(c, ch, 100_000, seed=3, workers=1)
b = mi_monte_carlo(c, ch, 100_000, seed=3, workers=4)
print(a == b)

# ## A short MI curve
#
# 1024 points, GB-HR against square QAM. The bell tracks capacity until the
# entropy ceiling starts to bite.

bell, qam = gen_gb_hr(1024), gen_qam(32)
for db in np.arange(10.0, 31.0, 5.0):
    s = db_to_linear(db)
    mb = mi_quadrature(bell, AwgnChannel.for_constellation(bell, s)).bits
    mq = mi_quadrature(qam, AwgnChannel.for_constellation(qam, s)).bits
    print(f"{db:5.1f} dB  capacity {awgn_capacity(s):6.3f}  GB-HR {mb:6.3f}  QAM {mq:6.3f}")
