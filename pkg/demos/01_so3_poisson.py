"""so(3) as a noncommutative integrable system: brackets, corank and the Casimir."""

import numpy as np

from ncquant.expr import evaluate, to_string
from ncquant.poisson import bracket, casimir_residual, corank_at, structure_matrix
from ncquant.so3 import So3Model

model = So3Model.build()
H = model.integrals
W = model.lie_poisson

# The coordinate functions close under the bracket with structure constants eps_ijk.
for i, j in [(0, 1), (1, 2), (2, 0)]:
    print(f"{{H{i + 1}, H{j + 1}}} = {to_string(bracket(H[i], H[j], W))}")

# Three integrals on a 3-dimensional space, n = 2 commuting directions:
# the structure matrix should have corank 2n - k = 1 away from the origin.
S = structure_matrix(list(H), W)
rng = np.random.default_rng(0)
pts = model.random_coalgebra_points(rng, 5)
for p in pts:
    print("corank at", np.round([p["x1"], p["x2"], p["x3"]], 3), "=", corank_at(S, p))
print("corank at origin =", corank_at(S, {"x1": 0.0, "x2": 0.0, "x3": 0.0}))

# r = |x| Poisson-commutes with everything.
print("Casimir residual of r:", casimir_residual(model.casimir, W, pts))

# Leibniz with a Casimir factor: {H1, r H2} = r {H1, H2} = r x3.
g = bracket(H[0], model.casimir * H[1], W)
p = pts[0]
print("{H1, r*H2}:", evaluate(g, p), " r*x3:", evaluate(model.casimir * H[2], p))
