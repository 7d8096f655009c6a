"""Run a small seeded multi-user benchmark and write the CSV aggregates
(the command-line equivalent is `setmargin bench`).
"""

from pathlib import Path

from setmargin import ExperimentConfig, run_experiment, seeds_for, write_outputs
from setmargin.bench import summary_csv
from setmargin.loop import LoopConfig
from setmargin.solver import SolverConfig
from setmargin.users import UtilityDistribution

config = ExperimentConfig(
    dataset="synthetic:r=3",
    distribution=UtilityDistribution("sparse-uniform"),
    seeds=seeds_for(42, 5),
    k=2,
    T=15,
    loop=LoopConfig(k=2, T=15),
    solver=SolverConfig(time_limit=30.0),
    timing="wall",
)

result = run_experiment(config)
out = Path("demo-results")
paths = write_outputs(result, out)
print("wrote:", ", ".join(str(p) for p in paths.values()))
print("\nsummary (iteration, median loss, loss std, median seconds):")
print(summary_csv(result))
for res in result.user_results:
    print(f"user {res.user}: final loss {res.final_loss:.2f} "
          f"(best utility {res.best_utility:.1f})")
