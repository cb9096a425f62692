"""
Network Checkpoints

Q-networks stored as numpy ``.npz`` archives:

    format_version   int, currently 1
    config_hash      16 hex digits of the scenario that trained the net
    layer_sizes      int array (input, hidden..., output)
    weight_<i>       (out, in) float64 matrix of layer i
    bias_<i>         (out,) float64 vector of layer i
"""

import logging
from pathlib import Path
from typing import Tuple

import numpy as np

from ..core.errors import SwarmBeamError
from .network import QNetwork

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def save_checkpoint(path: Path, net: QNetwork, config_hash: str) -> Path:
    arrays = {
        "format_version": np.array(FORMAT_VERSION, dtype=np.int64),
        "config_hash": np.array(config_hash),
        "layer_sizes": np.array(net.layer_sizes, dtype=np.int64),
    }
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        arrays[f"weight_{i}"] = w
        arrays[f"bias_{i}"] = b
    path = Path(path)
    with path.open("wb") as fh:
        np.savez(fh, **arrays)
    logger.debug(f"Saved checkpoint {path} ({len(net.weights)} layers)")
    return path


def load_checkpoint(path: Path) -> Tuple[QNetwork, str]:
    """Network and the config hash it was trained under."""
    path = Path(path)
    if not path.is_file():
        raise SwarmBeamError(f"checkpoint not found: {path}")
    with np.load(path, allow_pickle=False) as archive:
        version = int(archive["format_version"])
        if version != FORMAT_VERSION:
            raise SwarmBeamError(
                f"unsupported checkpoint format {version}", {"expected": FORMAT_VERSION}
            )
        layer_sizes = [int(s) for s in archive["layer_sizes"]]
        layers = len(layer_sizes) - 1
        net = QNetwork(
            [archive[f"weight_{i}"] for i in range(layers)],
            [archive[f"bias_{i}"] for i in range(layers)],
        )
        config_hash = str(archive["config_hash"])
    if net.layer_sizes != layer_sizes:
        raise SwarmBeamError("checkpoint layer sizes do not match its parameters")
    return net, config_hash
