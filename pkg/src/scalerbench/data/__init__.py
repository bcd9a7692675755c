"""Shipped benchmark topologies and workload traces.

The two topologies approximate the call-graph shapes of the Online Boutique
(11 services) and Sock Shop (13 services) demo applications; all rates,
capacities and memory figures are synthetic desk-scale parameters, not
measurements of the real systems.  The diurnal trace is a synthetic 20-minute
schedule peaking at 740 concurrent users.
"""

from importlib.resources import files
from pathlib import Path


def data_path(relative: str) -> Path:
    """Absolute path to a shipped data file, e.g. 'traces/diurnal_740.csv'."""
    p = Path(str(files(__package__).joinpath(relative)))
    if not p.exists():
        raise FileNotFoundError(f"no shipped data file {relative}")
    return p
