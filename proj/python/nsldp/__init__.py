"""Python bindings for the nsldp stochastic Navier-Stokes toolkit."""

from ._nsldp import *  # noqa: F401,F403
from ._nsldp import __version__, run as _run

import json as _json


def run_config(config, output_root=None):
    """Run a config given as a dict or JSON string; returns the run record as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _run(parse_config(text), output_root)
