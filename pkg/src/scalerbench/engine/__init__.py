"""Simulation engine: kernel backend selection and the public facade.

The hot event loop lives in ``_kernel``; when the package was installed with
a C toolchain, a compiled extension shadows the interpreted module.  Both
backends run the same source and produce bit-identical output (covered by
tests); set ``SCALERBENCH_KERNEL=interpreted`` to force the fallback.
"""

import importlib.machinery
import importlib.util
import os
from pathlib import Path


def load_interpreted_kernel():
    """Load the interpreted kernel from source even when the extension shadows it."""
    py = Path(__file__).with_name("_kernel.py")
    loader = importlib.machinery.SourceFileLoader(
        "scalerbench.engine._kernel_interpreted", str(py))
    spec = importlib.util.spec_from_loader(loader.name, loader)
    mod = importlib.util.module_from_spec(spec)
    loader.exec_module(mod)
    return mod


if os.environ.get("SCALERBENCH_KERNEL") == "interpreted":
    kernel = load_interpreted_kernel()
else:
    from . import _kernel as kernel

KERNEL_BACKEND = "compiled" if kernel.KERNEL_COMPILED else "interpreted"

from .core import (  # noqa: E402
    RequestRecord,
    Simulation,
    advance_to,
    build_simulation,
    inject_request,
    set_replicas,
    snapshot_resources,
)

__all__ = [
    "KERNEL_BACKEND",
    "RequestRecord",
    "Simulation",
    "advance_to",
    "build_simulation",
    "inject_request",
    "kernel",
    "load_interpreted_kernel",
    "set_replicas",
    "snapshot_resources",
]
