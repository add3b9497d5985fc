"""Run a small seeded benchmark sweep and render the figures.

This is the scripted equivalent of:

    bench run --profile desk --config overrides.json --out out/
    plot --csv out/results.csv --kind nmse_vs_snr --out out/fig2.svg
    plot --csv out/params.csv  --kind param_scatter --out out/fig1.svg

Uses a reduced trial count so it finishes in a few minutes; raise
`trials` (and the SNR grid) for smoother curves.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from hfdemix.bench import PROFILES, overlay_config, run_sweep

out = Path("demo_out")
config = overlay_config(PROFILES["desk"], {
    "sweep": {"axis": "snr_db", "values": [0.0, 10.0, 20.0]},
    "trials": 5,
})
csv_path = run_sweep(config, out)
print(f"wrote {csv_path} and {out / 'params.csv'}", flush=True)

plot_cli = shutil.which("plot")
if plot_cli is None:
    print("plotkit not installed; skipping figure rendering "
          "(pip install -e plotkit/)")
    sys.exit(0)

subprocess.run([plot_cli, "--csv", str(csv_path), "--kind", "nmse_vs_snr",
                "--out", str(out / "nmse_vs_snr.svg")], check=True)
subprocess.run([plot_cli, "--csv", str(out / "params.csv"), "--kind",
                "param_scatter", "--out", str(out / "param_scatter.svg")],
               check=True)
print(f"figures in {out}/")
