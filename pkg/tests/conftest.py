from pathlib import Path

import pytest

from radflow.eos import EosModel

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def general_polytropic(kappa0=1.3, m=1.0, gamma=0.4):
    """A polytropic pressure supplied through the closed-form callback interface."""
    g1 = 1.0 + gamma
    return EosModel.general(
        lambda rho, s: kappa0 * s**m * rho**g1,
        lambda rho, s: kappa0 * g1 * s**m * rho**gamma,
        lambda rho, s: kappa0 * m * s ** (m - 1) * rho**g1,
    )


# one representative per variant, used by the catalog-wide checks
EOS_ZOO = {
    "polytropic": EosModel.polytropic(1.3, 1.0, 0.4),
    "barotropic": EosModel.barotropic(1.0, 2.0),
    "ideal_gas": EosModel.ideal_gas(3),
    "entropic": EosModel.entropic(1.3, 1.0),
    "general": general_polytropic(),
}


@pytest.fixture(params=sorted(EOS_ZOO))
def any_eos(request):
    return EOS_ZOO[request.param]


@pytest.fixture
def entropic():
    return EosModel.entropic(1.3, 1.0)


@pytest.fixture
def polytropic():
    return EosModel.polytropic(1.3, 1.0, 0.4)
