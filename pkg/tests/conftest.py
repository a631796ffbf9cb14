import functools
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from hypothesis import settings

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def extremal_mode(k: int):
    from modeforge.mode import exponents_everywhere, mode_from_quasi
    from modeforge.quasi import extremal

    f = extremal(k, 64)
    m = mode_from_quasi(f)
    return f, m, exponents_everywhere(m)


@functools.lru_cache(maxsize=None)
def weight24_mode():
    from modeforge.mode import exponents_everywhere, mode_from_triple
    from modeforge.modforms import Delta, E4

    e4, d = E4(64), Delta(64)
    m = mode_from_triple(e4 ** 6, e4 ** 3 * d, d * d, 24)
    return m, exponents_everywhere(m)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
