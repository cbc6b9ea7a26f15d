import pytest

from pilot.scenario import load_bundled_scenario


@pytest.fixture(scope="session")
def anpr():
    return load_bundled_scenario()


@pytest.fixture()
def anpr_trans(anpr):
    """Case-study scenario with the transfer-allowing policy and no assumptions."""
    return anpr.with_policies(anpr.variant("p_trans").overrides()).with_assumptions([])


@pytest.fixture()
def anpr_no_trans(anpr):
    return anpr.with_policies(anpr.variant("p_no_trans").overrides()).with_assumptions([])


@pytest.fixture()
def anpr_trans_risk(anpr):
    return anpr.with_policies(anpr.variant("p_trans").overrides()).with_assumptions(
        [a.id for a in anpr.assumptions]
    )


@pytest.fixture()
def anpr_no_trans_risk(anpr):
    return anpr.with_policies(anpr.variant("p_no_trans").overrides()).with_assumptions(
        [a.id for a in anpr.assumptions]
    )
