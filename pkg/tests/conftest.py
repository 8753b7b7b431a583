import shutil

import pytest

from eia.backend import BackendSpec


def _backend_ok() -> bool:
    try:
        return shutil.which(BackendSpec.resolve().argv[0]) is not None
    except Exception:
        return False


HAVE_BACKEND = _backend_ok()


def pytest_collection_modifyitems(config, items):
    if HAVE_BACKEND:
        return
    skip = pytest.mark.skip(reason="no z3 executable on PATH (set EIA_SOLVE_BACKEND)")
    for item in items:
        if "backend" in item.keywords:
            item.add_marker(skip)
