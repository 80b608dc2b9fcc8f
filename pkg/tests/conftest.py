import pytest

from singular_ode.integrator import integrate
from singular_ode.model import Params

# l=0, alpha=1, beta=1, c=d=1: oscillatory, fast decay E ~ t^-2
P1 = Params(0, 1, 1, 1, 1)
# l=1, alpha=1.2, beta=3, c=d=1: non-oscillatory, alpha* = 1.4
P2 = Params(1, 1.2, 3, 1, 1)
# l=0, alpha=0.3, beta=2, c=d=1: fast/slow alternative, alpha* = 0.5
P3 = Params(0, 0.3, 2, 1, 1)


@pytest.fixture(scope="session")
def p1_traj():
    return integrate(P1, 1.0, 0.0, 200.0, 1e-9)
