# %% [markdown]
# # Many seeds at once
#
# Batch runs average the best-so-far and the swarm-average conflict over
# seeds. Runs that stop early are held at their final value; `n_padded`
# counts them.

# %%
import tempfile
from pathlib import Path

import numpy as np

from psokit import BatchSpec, batch_run, export_trace, preset_config, read_csv

spec = BatchSpec(preset_config("bst_p", "sphere", t_max=5000), n_runs=8)
summary = batch_run(spec)
print("success rate:", summary.success_rate)
print("terminations:", summary.terminations)

# %%
for t in (1, 10, 100, 500, 1000, 5000):
    print(f"t={t:5d} mean best {summary.mean_best[t - 1]:.3e} "
          f"mean avg {summary.mean_avg[t - 1]:.3e} padded {summary.n_padded[t - 1]}")

# %% [markdown]
# CSV is the plotting interface. Floats are written in round-trip form.

# %%
out = Path(tempfile.mkdtemp())
for path in export_trace(summary, out):
    print(path)
runs = read_csv(out / "runs.csv")
print(np.mean(runs["final_conflict"] < 0.01) == summary.success_rate)
