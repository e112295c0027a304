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

# # MI-optimized shaping
#
# G2 parameterizes the spiral power with a cubic; P2 tunes one geometric
# ratio. Both are quick at N=16. G1 and GP1 take minutes, so they are left
# commented out.

from gam import OptimizationProblem, optimize, papr_db

snr = 15.0
for form in ("G2", "P2"):
    res = optimize(OptimizationProblem(form, 16, snr, 1.0 / snr))
    print(form, round(res.mi_bits, 4), res.iterations, res.constraint_residuals)

# +
# res = optimize(OptimizationProblem("GP1", 16, snr, 1.0 / snr))
# -

# ## Peak power cap
#
# A cap of 1.5 dB at 15 dB SNR: the outer radii are pulled inward and the
# MI drops a little.

snr = 10 ** 1.5
free = optimize(OptimizationProblem("G2", 16, snr, 1.0 / snr))
capped = optimize(OptimizationProblem("G2", 16, snr, 1.0 / snr, papr_cap=10 ** 0.15))
for name, r in (("free", free), ("capped", capped)):
    print(name, round(r.mi_bits, 4), round(papr_db(r.constellation), 3))
