"""Root-level wiring so frameshrink/tests and harness/tests run in one session.

Each sub-project normally runs its suite in its own process. Collecting
harness/tests imports ``cli``, which raises the ``frameshrink.*`` logger levels
as an import-time side effect. Reset those levels for library tests so they see
the same logging state as in a standalone run.
"""

import logging
from pathlib import Path

import pytest

_LIBRARY_TESTS = Path(__file__).parent / "frameshrink" / "tests"


@pytest.fixture(autouse=True)
def _isolate_library_logging(request):
    if _LIBRARY_TESTS not in Path(str(request.node.path)).parents:
        yield
        return
    names = [n for n in logging.root.manager.loggerDict if n.split(".")[0] == "frameshrink"]
    saved = {n: logging.getLogger(n).level for n in names}
    for n in names:
        logging.getLogger(n).setLevel(logging.NOTSET)
    yield
    for n, level in saved.items():
        logging.getLogger(n).setLevel(level)
