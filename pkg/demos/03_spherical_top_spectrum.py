"""Spectrum of the quantized spherical top H = I r^2 / 2 for several flat connections."""

from ncquant.quantize import (
    ActionAngleSpace,
    AffineObservable,
    QuantizationParams,
    gauge_spectrum_check,
    hamiltonian_operator,
    quantize_observable,
    spectrum,
)

space = ActionAngleSpace.canonical(periodic=[("r", "alpha")])
inertia, K = 1.0, 4

for lam in (0.0, 0.25, 0.5, 1.0):
    params = QuantizationParams(space, (lam,), K)
    H = hamiltonian_operator("0.5*I*r^2", params, {"I": inertia})
    levels = spectrum(H)
    print(f"lambda = {lam}:")
    for value, mult in levels:
        print(f"   E = {value:8.4f}   x{mult}")

# The action operator r^ = -i d/dalpha - lambda has spectrum n - lambda.
params = QuantizationParams(space, (0.25,), K)
R = quantize_observable(AffineObservable(space, (("r", 1.0),)), params)
print("spec r^ at lambda = 0.25:", [v for v, _ in spectrum(R)])

# Integer shifts of lambda are gauge equivalent: spectra agree on a shifted window.
g = gauge_spectrum_check(0.25, 1.25, params)
print(f"lambda 0.25 vs 1.25: window {g.window}, matched {g.matched}, mismatches {list(g.mismatches)}")
g = gauge_spectrum_check(0.25, 0.75, params)
print(f"lambda 0.25 vs 0.75: matched {g.matched}, mismatches {len(g.mismatches)}")
