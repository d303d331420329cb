import pytest
from hypothesis import settings

from chaoslab.billiards import build_preset

# first calls include numba compilation
settings.register_profile("chaoslab", deadline=None)
settings.load_profile("chaoslab")

FIVE = ("stadium", "squash", "flower", "semi_dispersing", "cusp")

# one fast configuration per experiment kind
SMALL = {
    "simulate": "experiment = simulate\nn = 1000\nbeta = 0.5\n",
    "density": "experiment = density\nbeta = 0.5\nbins = 256\n",
    "return-tail": "experiment = return-tail\nbeta = 0.5\nn_grid = 2, 4, 8, 16\nsamples = 2000\n",
    "ldp": "experiment = ldp\nbeta = 0.25\nn_grid = 16, 32, 64\nsamples = 1000\n",
    "max-ldp": "experiment = max-ldp\nbeta = 0.25\nn_grid = 16, 32, 64\nsamples = 1000\n",
    "poisson": "experiment = poisson\nsystem = stadium\nobservable = cos_q\nhole.radii = 0.2, 0.1, 0.05, 0.02\nsamples = 1000\nT = 2\nwindows = 2\nbootstrap = 20\n",
    "hitting": "experiment = hitting\nsystem = stadium\nhole.radius = 0.1\nhole.horizon = 20\nsamples = 1000\n",
    "clt": "experiment = clt\nbeta = 0.2\nn = 1000\nsamples = 1000\nk_max = 50\n",
    "quenched-clt": "experiment = quenched-clt\nn = 1000\nsamples = 1000\nburn_in = 1000\n",
    "stable": "experiment = stable\nbeta = 0.75\nobservable = one_plus_cos\nn = 1000\nsamples = 1000\n",
    "cusp-stable": "experiment = cusp-stable\nsystem = cusp\nobservable = cos_q\nn = 100\nsamples = 1000\n",
    "mean-free-path": "experiment = mean-free-path\nsystem = stadium\nn = 100\nsamples = 1000\n",
}


@pytest.fixture(scope="session")
def tables():
    return {name: build_preset(name) for name in FIVE}


@pytest.fixture(scope="session")
def stadium():
    return build_preset("stadium", L=2.0, rho=1.0)


_ACCEPTANCE = []


def record(line):
    _ACCEPTANCE.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
