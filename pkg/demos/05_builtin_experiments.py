"""Run every bundled experiment and write its learning-curve CSV.

At the default 100 runs this reproduces the published-style comparisons;
pass a smaller count on the command line for a quick look, e.g.

    python demos/05_builtin_experiments.py 25
"""

import sys

from fclms import builtin_specs, run_experiment

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 100

print(f"{'name':8} {'runs':>4} {'steady gap':>10} {'transient':>9} "
      f"{'ripple':>6}  output")
for name, spec in builtin_specs().items():
    result = run_experiment(spec, runs=runs,
                            out_prefix=f"demos/out/{name}")
    rep = result.report
    ripple = rep.ripple_period_detected or "-"
    print(f"{name:8} {runs:4d} {rep.steady_state_gap_db:8.2f}dB "
          f"{rep.max_transient_gap_db:7.2f}dB {ripple:>6}  {result.csv_path}")
