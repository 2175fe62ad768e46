"""Commutators against brackets: exact in the angle modes, second order on the grid."""

from ncquant.quantize import (
    ActionAngleSpace,
    QuantizationParams,
    dirac_convergence,
    dirac_residual,
    noncommutativity_witness,
)
from ncquant.so3 import So3Model

space = So3Model.build().action_angle_space()
params = QuantizationParams(space, (0.0,), 5, ((10.0, 201),))

# Pairs living on the circle only: [f^, g^] = -i {f, g}^ to rounding.
for f, g in [("r", "sin(alpha)"), ("cos(alpha)*r", "sin(alpha)*r + 1")]:
    print(f"[{f}, {g}]: residual {dirac_residual(f, g, params):.2e}")

# Pairs involving gamma are discretized by central differences.
for f, g in [("x1", "gamma^3"), ("sin(gamma)*x1", "gamma^2*x1")]:
    conv = dirac_convergence(f, g, params, (51, 101, 201))
    print(f"[{f}, {g}]:")
    for n, h, res in zip(conv.grid_n, conv.spacings, conv.residuals):
        print(f"   N = {n:4d}  h = {h:.3f}  residual = {res:.3e}")
    print(f"   fitted order {conv.order:.3f}")

# Ordering matters: a^ x1^ and (a x1)^ differ by (i/2) a'.
w = noncommutativity_witness("sin(gamma)", "x1", params)
print(f"witness for a = sin(gamma): measured {w.measured:.6f}, expected {w.analytic:.6f}")

# A free particle on a cylinder shows the same split.
cyl = ActionAngleSpace.canonical(periodic=[("J", "alpha")], noncompact=[("p", "q")])
cp = QuantizationParams(cyl, (0.3,), 4, ((8.0, 101),))
print("cylinder [J, cos(2 alpha)]:", f"{dirac_residual('J', 'cos(2*alpha)', cp):.2e}")
print("cylinder [p, q^3] order:", f"{dirac_convergence('p', 'q^3', cp).order:.3f}")
