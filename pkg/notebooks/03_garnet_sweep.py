# %% [markdown]
# # Gap versus dataset size
#
# Runs every method on shared datasets of increasing size and writes
# `raw.csv` / `agg.csv`; any plotting tool can read them.

# %%
import tempfile
from pathlib import Path

from robust_rl import ExperimentConfig, emit_tables, run_sweep

cfg = ExperimentConfig(mdp_source={"garnet": {"states": 15, "actions": 8, "seed": 0}},
                       sizes=[500, 5000, 50000], seeds=list(range(10)), coverage="partial")
res = run_sweep(cfg, jobs=4)
print(f"partial coverage, extra action eta={res.eta}")
print(f"{'method':14s} {'N':>6s} {'mean':>9s} {'p5':>9s} {'p95':>9s}")
for a in res.aggregates:
    print(f"{a.method:14s} {a.N:6d} {a.mean:9.4f} {a.p5:9.4f} {a.p95:9.4f}")

# %%
out = Path(tempfile.mkdtemp())
raw, agg = emit_tables(res, out)
print(agg.read_text())
