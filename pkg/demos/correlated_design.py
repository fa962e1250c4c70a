"""Correlated predictors: the density-ratio screen rejects, the certificate passes.

A classical sufficient condition for backfitting asks the joint design
density to stay close to the product of its marginals, i.e. the grid
supremum of |f(u, v) / (f_u(u) f_v(v)) - 1| must be below 1.  For a
bivariate normal design that supremum has a closed form and blows up
with |rho|, failing the screen already at mild correlation.  The
spectral certificate looks at the realized sample instead and keeps
certifying convergence.

Run from the repository root:

    python3 demos/correlated_design.py
"""

import numpy as np

from nwbackfit import (
    BivariateNormal,
    Kernel,
    RateBandwidth,
    SimSpec,
    backfit_iterative,
    build_pair,
    certify,
    density_ratio_sup,
    generate,
)

print("density-ratio grid supremum on [-4, 4]^2 for bivariate normal designs:")
for rho in (0.0, 0.1, 0.3, 0.5, 0.7):
    sup = density_ratio_sup(BivariateNormal(rho=rho))
    flag = "passes (< 1)" if sup < 1.0 else "fails"
    print(f"  rho = {rho:.1f}: sup = {sup:10.2f}  -> ratio screen {flag}")

print()
print("spectral certificate on simulated samples (n = 400, Gaussian kernel):")
bw = RateBandwidth(0.2)
for rho in (0.0, 0.3, 0.5, 0.7):
    design = BivariateNormal(rho=rho)
    spec = SimSpec(n=400, design=design, noise_sd=0.2, seed=900 + int(10 * rho))
    data = generate(spec)
    pair = build_pair(data, Kernel.GAUSSIAN, bw, bw)
    cert = certify(pair, Kernel.GAUSSIAN, bw, bw, data)
    fit = backfit_iterative(pair, data.y)
    print(f"  rho = {rho:.1f}: rho(S2* S1*) = {cert.spectral.rho_product:.4f}, "
          f"verdict {cert.verdict.value}, converged in {fit.iterations} iterations")

print()
print("correlation raises the contraction factor (coupling the two smoothers)")
print("but stays far from 1, so backfitting keeps converging where the")
print("density-ratio screen already gave up at rho = 0.1.")
