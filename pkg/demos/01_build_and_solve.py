"""Walk through the core pieces on a tiny problem: define a configuration
space, record a couple of answered comparisons, and solve the setwise
max-margin program for a diverse pair of candidate configurations.
"""

import numpy as np

from setmargin import (Attribute, Hyperparameters, Preference,
                       PreferenceDataset, ProblemSpec, SolverConfig,
                       WeightBounds, build_model, encode, export_debug,
                       solve_setmargin)

# Three attributes, three values each: think (color, size, material).
spec = ProblemSpec(
    [Attribute("color", 3, ("red", "green", "blue")),
     Attribute("size", 3, ("S", "M", "L")),
     Attribute("material", 3, ("wood", "steel", "carbon"))],
    bounds=WeightBounds(np.zeros(9), np.full(9, 100.0)),
)

red_s_wood = encode(spec, (0, 0, 0))
blue_l_carbon = encode(spec, (2, 2, 2))
green_m_steel = encode(spec, (1, 1, 1))

# The user told us: blue/L/carbon beats red/S/wood, and green/M/steel is
# about as good as red/S/wood.
answers = PreferenceDataset([
    Preference(blue_l_carbon, red_s_wood),
    Preference(green_m_steel, red_s_wood, kind="indifferent"),
])

hp = Hyperparameters(alpha=10.0, beta=0.001, gamma=1.0)
solution = solve_setmargin(spec, answers, k=2, hp=hp, cfg=SolverConfig())

print("margin          :", round(solution.margin, 3))
print("objective       :", round(solution.objective, 3))
for i, cfg in enumerate(solution.configs):
    values = [spec.attributes[a].value_name(v)
              for a, v in enumerate(np.flatnonzero(cfg.bits) - spec.offsets[:-1])]
    print(f"configuration {i} :", values, " weight l1:",
          round(float(solution.weights[i].sum()), 2))

# The built model can be dumped as LP text for inspection with any solver.
model = build_model(spec, answers, 2, hp)
print("\nfirst lines of the LP export:")
print("\n".join(export_debug(model).splitlines()[:6]))
