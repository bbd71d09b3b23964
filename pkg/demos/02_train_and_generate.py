"""Train the stationarity-constrained conditional recurrent GAN and sample
channels from it.

Uses a deliberately small dataset and epoch count so the demo finishes in a
few minutes on a laptop CPU; expect rough channels. Increase n_per_config
and epochs for faithful ones.

Run:  python3 demos/02_train_and_generate.py [out_dir]
"""

import os
import sys

from chanforge.datasets import save_dataset
from chanforge.preprocess import preprocess_dataset
from chanforge.simkit import ScenarioConfig, build_dataset
from chanforge.train import TrainConfig, generate, train

OUT = sys.argv[1] if len(sys.argv) > 1 else "demo_out"

configs = [
    ScenarioConfig(category="weak", n_snapshots=60, n_delay_bins=64),
    ScenarioConfig(category="strong", n_snapshots=60, n_delay_bins=64),
]
dataset = build_dataset(configs, n_per_config=64, master_seed=7)
normalized = preprocess_dataset(dataset)

config = TrainConfig(epochs=100, batch_size=32, seed=0)
run_dir = os.path.join(OUT, "run")
checkpoint, history = train(normalized, config, out_dir=run_dir)
last = history.rows[-1]
print(f"trained {last['step'] + 1} steps; final composite loss "
      f"{last['loss_total']:.3f} (log: {run_dir}/train_log.csv)")

for label in ("weak", "strong"):
    generated = generate(checkpoint, label=label, n=8, seed=1)
    gen_dir = os.path.join(OUT, f"gen_{label}")
    save_dataset(generated, gen_dir)
    print(f"wrote 8 generated '{label}' channels to {gen_dir}")
