"""
A small simulation grid
=======================

Run all 23 algorithms on a reduced grid, write the raw CSV, and print the
mean (sd) tables the harness produces. The full default grid is the same
call with GridConfig() defaults (or `hybridsel simulate`).
"""

import tempfile
from hybridsel import harness

out = tempfile.mkdtemp(prefix="hybridsel-")
cfg = harness.GridConfig(n_list=(100, 200), p_list=(10,), n_sim=3, master_seed=42,
                         out_dir=out)
result = harness.run_grid(cfg)
print(len(result.records), "records ->", result.raw_path)

for metric in harness.METRICS:
    print()
    print(harness.summarize(result.records, metric).render_text())

# records round-trip through the CSV
assert len(harness.read_raw_csv(result.raw_path)) == len(result.records)
