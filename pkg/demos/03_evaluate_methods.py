"""Compare generated datasets against a simulated reference.

Loads the reference from demo 01 and the generated channels from demo 02,
computes per-statistic Frechet distances, writes the report files, and
renders figures. Pass explicit paths to compare other datasets:

Run:  python3 demos/03_evaluate_methods.py [ref_dir method=dir ...]
"""

import sys

from chanforge.datasets import ChannelDataset, load_dataset
from chanforge.evalreport import evaluate, render_figures, write_report


def merge(parts):
    """Concatenate per-label datasets that share a grid."""
    head = parts[0]
    return ChannelDataset(
        channels=[ch for p in parts for ch in p.channels],
        manifest={**head.manifest,
                  "labels": [lb for p in parts for lb in p.manifest["labels"]],
                  "seeds": [s for p in parts for s in p.manifest["seeds"]]})


if len(sys.argv) > 2:
    ref_dir = sys.argv[1]
    generated = {name: load_dataset(path)
                 for name, path in (item.split("=", 1) for item in sys.argv[2:])}
else:
    ref_dir = "demo_out/raw"
    generated = {"cgan_lstm": merge([load_dataset("demo_out/gen_weak"),
                                     load_dataset("demo_out/gen_strong")])}

reference = load_dataset(ref_dir)
report = evaluate(reference, generated)
paths = write_report(report, "demo_out/eval")
figs = render_figures(report, reference, generated, "demo_out/eval")

for feat, ranked in report.rankings.items():
    print(f"{feat}: best -> worst: {', '.join(ranked)}")
print("report files:", ", ".join(sorted(paths.values())))
print("figures:", len(figs), "under demo_out/eval/figs/")
