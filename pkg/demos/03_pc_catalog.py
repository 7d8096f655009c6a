"""Tour of the constructive PC catalog: 710,400 raw combinations, 16
compatibility clauses, a derived price, and one elicitation query solved on
the full space.
"""

import math

import numpy as np

from setmargin import (Hyperparameters, PreferenceDataset, SolverConfig,
                       count_feasible, gen_pc, reduce_real_attributes,
                       solve_setmargin)
from setmargin.service import render_configuration

spec = gen_pc()
print("attributes:", [(a.name, a.cardinality) for a in spec.attributes])
print("raw combinations:", math.prod(spec.cardinalities))
print("compatibility clauses:", len(spec.constraints))
print("feasible combinations:", count_feasible(spec))

# price rides along as a linear function of the chosen components
reduced = reduce_real_attributes(spec)
print("\nweight bounds after folding price in: max",
      round(float(reduced.bounds.upper.max()), 1))

solution = solve_setmargin(reduced, PreferenceDataset(), k=2,
                           hp=Hyperparameters(10.0, 0.001, 1.0),
                           cfg=SolverConfig(time_limit=10.0))
print("\na first comparison query on the full catalog:")
for i, cfg in enumerate(solution.configs):
    view = render_configuration(spec, cfg)
    parts = ", ".join(f"{a['name']}={a['value']}" for a in view["attributes"])
    print(f"  option {chr(65 + i)}: {parts}  (price {view['price']:.2f})")
