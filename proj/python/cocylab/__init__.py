"""Linear cocycles over shifts of finite type.

The heavy lifting lives in the C++ extension ``cocylab._core``; this module
adds dict <-> JSON-string conveniences around the scenario machinery.
"""

import json as _json

from ._core import (  # noqa: F401
    CocylabError,
    __version__,
    certify_bunching,
    distortion,
    enumerate_periodic_orbits,
    evaluate_cocycle,
    match_periodic_data,
    measure_exponents,
    periodic_exponents,
    stable_holonomy,
    template_names,
    trace_power,
    unstable_holonomy,
    validate_mixing,
)
from . import _core as _core


def generate_template(name, seed=7):
    """Materialize a named scenario template as a dict."""
    return _json.loads(_core.generate_template(name, seed))


def run_scenario(config, out_dir="", threads=1):
    """Run a scenario config (dict or JSON string); returns the bundle dict."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _json.loads(_core.run_scenario(config, out_dir, threads))


def _as_json(config):
    return config if isinstance(config, str) else _json.dumps(config)


def bunching(config, max_n=8, max_period=8):
    """Both bunching certificates for generator_a of the config."""
    return _json.loads(_core.certify_bunching(_as_json(config), max_n, max_period))


def match(config, mode="equal", max_period=8):
    """Periodic-data comparison of generator_a and generator_b."""
    return _json.loads(_core.match_periodic_data(_as_json(config), mode, max_period))


def commutant_tower(config, orbit="0", kmax=12):
    """Commutant dimensions of the return-product powers at one orbit."""
    return _json.loads(_core.commutant_tower(_as_json(config), orbit, kmax))
