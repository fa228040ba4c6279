import warnings

import pytest

from openbook.algebra import parse_mixed, parse_real_map

# polynomials shared by several test modules
EX_RADIAL = "(2*z1^2+z1*conj(z1))*z2"
EX_REAL_MAP = "vars: x,y,z\ny*(2*x^2*y^2-9*x*y+12); z"
EX_QUARTIC = "(2+z1)*z1^2*z2*conj(z1)"
EX_BROUGHTON_MIXED = "z1*(1+conj(z1)*z2)"
EX_ABS2 = "z1*conj(z1)*z2"
EX_POLAR3 = "(z1+z3^5)*conj(z1)*z2"
EX_CIRCLE = "z1*(1+z2*conj(z2)+z1*z2^4)"

ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _quiet_numerics():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


@pytest.fixture
def real_map_example():
    return parse_real_map(EX_REAL_MAP)


def mixed(text, n=None):
    names = None if n is None else [f"z{j + 1}" for j in range(n)]
    return parse_mixed(text, names)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
