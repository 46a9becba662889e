"""Python access to the atlas-lab simulation core."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import run as _run


def run_experiment(config, out, seed=None, workers=None, doubling_check=False):
    """Run a config file into directory `out` and return the parsed summary."""
    return _json.loads(_run(str(config), str(out), seed, workers, doubling_check))
