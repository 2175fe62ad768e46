"""The (r, x1, gamma, alpha) chart: Darboux coordinates for the so(3) bracket."""

import math

import numpy as np

from ncquant.expr import Var, evaluate, to_string
from ncquant.poisson import bracket, hamiltonian_vector_field, wedge_determinant
from ncquant.so3 import So3Model, from_action_angle, to_action_angle

model = So3Model.build()
W = model.aa_bivector

x = (0.3, -1.2, 0.8)
r, x1, gamma = to_action_angle(x)
print(f"x = {x} -> r = {r:.6f}, x1 = {x1}, gamma = {gamma:.6f}")
print("back:", from_action_angle(r, x1, gamma))

# In the chart the bivector is constant: {x1, gamma} = 1, r is central.
for a, b in [("x1", "gamma"), ("r", "alpha"), ("r", "x1"), ("r", "gamma")]:
    print(f"{{{a}, {b}}} = {to_string(bracket(Var(a), Var(b), W))}")

# H2, H3 rewritten in the chart still obey the so(3) table.
H1, H2, H3 = model.aa_integrals
q = {"r": r, "x1": x1, "gamma": gamma, "alpha": 0.0}
print("{H2, H3} in chart at x:", evaluate(bracket(H2, H3, W), q), "(H1 =", x1, ")")

# Hamiltonian vector fields of the integrals and their independence.
fields = model.integral_vector_fields()
p = {"r": 2.0, "x1": 1.0, "gamma": 0.3, "alpha": 0.0}
for i, v in enumerate(fields, 1):
    print(f"theta_{i} at p:", np.round(v.at(p), 6))
print("largest 3x3 minor:", wedge_determinant(fields, p), "(equals r)")

# The field of r generates the circle action along alpha.
print("theta_r =", [to_string(e) for e in hamiltonian_vector_field(Var("r"), W).components])

# Near the pole x1 -> r the chart degenerates but the minor stays at r.
for eps in (1e-1, 1e-4, 1e-8):
    q = {"r": 1.0, "x1": 1.0 - eps, "gamma": math.pi / 3, "alpha": 0.0}
    print(f"eps = {eps:g}: minor = {wedge_determinant(fields, q):.12f}")
