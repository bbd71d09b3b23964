"""chanforge: synthetic dynamic V2V channel datasets, a conditional recurrent
GAN with a temporal-correlation constraint, and a statistics validation suite.
"""

from chanforge.datasets import ChannelDataset, Pdp, load_dataset, save_dataset
from chanforge.simkit import ScenarioConfig, build_dataset, simulate_dynamic_channel

__all__ = [
    "ChannelDataset",
    "Pdp",
    "ScenarioConfig",
    "build_dataset",
    "load_dataset",
    "save_dataset",
    "simulate_dynamic_channel",
]

__version__ = "0.1.0"
