"""Transport-kernel selection: compiled extension when available, else Python.

The environment variable BARYSCORE_KERNEL forces a choice:
  auto    (default) compiled if importable, otherwise pure Python
  cython  require the compiled kernel, raise if missing
  python  force the pure-Python kernel
Both kernels implement the same pivot rules and return bit-identical plans.
"""

import os

from . import _simplex_py

try:
    from . import _simplex_cy
except ImportError:  # pragma: no cover - depends on the build
    _simplex_cy = None

STATUS_OPTIMAL = _simplex_py.STATUS_OPTIMAL
STATUS_PIVOT_BUDGET = _simplex_py.STATUS_PIVOT_BUDGET


def _select(name: str):
    if name == "python":
        return _simplex_py.solve_kernel, "python"
    if name == "cython":
        if _simplex_cy is None:
            raise ImportError(
                "BARYSCORE_KERNEL=cython but the compiled kernel is not built"
            )
        return _simplex_cy.solve_kernel, "cython"
    if name == "auto":
        if _simplex_cy is not None:
            return _simplex_cy.solve_kernel, "cython"
        return _simplex_py.solve_kernel, "python"
    raise ValueError(f"unknown BARYSCORE_KERNEL value: {name!r}")


solve_kernel, ACTIVE_KERNEL = _select(os.environ.get("BARYSCORE_KERNEL", "auto"))


def available_kernels() -> dict:
    """Name -> kernel callable for every importable implementation."""
    kernels = {"python": _simplex_py.solve_kernel}
    if _simplex_cy is not None:
        kernels["cython"] = _simplex_cy.solve_kernel
    return kernels
