"""A small Monte Carlo run: success rate and cost of both heuristics by input CI.

Matrices are bucketed by CI; for each one the weakest alternative is pushed
past the strongest (delta_pq = n - 1). A manipulation succeeds when the
ranking flips and the result still has CI <= 0.1.
"""

from pcman import ExperimentConfig, GenerationConfig, run_experiment
from pcman.io import experiment_to_csv

cfg = ExperimentConfig(n=5, bucket_count=10, bucket_width=0.01, trials_per_bucket=20,
                       delta_pq=4, methods=("evm", "gmm"), seed=1)
stats = run_experiment(cfg, GenerationConfig(n=5))

print(f"{'CI bucket':>14}  {'algo':6} {'method':6} {'SR':>5} {'mean m':>7}")
for s in stats:
    print(f"[{s.ci_low:.3f},{s.ci_high:.3f})  {s.algorithm.value:6} {s.method.value:6} "
          f"{s.sr:5.2f} {s.mean_m_res:7.2f}")

# the same table as plot-ready CSV
print(experiment_to_csv(stats)[:300], "...")
