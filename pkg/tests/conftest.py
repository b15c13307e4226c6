import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pretenure.tracefile import parse_trace

# A tiny hand-written trace: two methods, one site, three allocations.
# Sizes are in bytes; the young generation in small_config is 1 MB so a
# fourth allocation of 300 KB triggers a collection.
TINY_TRACE = """\
M 1 app.core app.core.Driver.run()
M 2 app.data app.data.Buf.fill()
E 1 2
S 1 2 10
C 0 1
C 0 2
A 0 1 300000 2000000
A 0 1 300000 5000000
A 0 1 300000 50000000
R 0 2
R 0 1
"""


@pytest.fixture
def tiny_trace():
    return parse_trace(TINY_TRACE)

