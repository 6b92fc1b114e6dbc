import warnings

import pytest

from ringsource.config import EnergyConservationWarning, paper_device


@pytest.fixture(autouse=True)
def _quiet_energy_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EnergyConservationWarning)
        yield


@pytest.fixture(scope="session")
def device():
    return paper_device()


@pytest.fixture
def quiet_device(device):
    """Bundled device with every noise source and the jitter switched off."""
    return device.replace(noise__raman_coefficient=0.0, noise__dark_count_signal=0.0,
                          noise__dark_count_idler=0.0, chain__jitter_fwhm=0.0)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.results:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_log.summary_lines():
        terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    # an acceptance test that raised before or after recording still fails its line
    if rep.when == "call" and rep.failed and item.module.__name__.endswith("test_acceptance"):
        import acceptance_log

        number = int(item.name.split("_")[1])
        acceptance_log.record(number, False, f"{item.name} raised {call.excinfo.typename}"
                              if call.excinfo else f"{item.name} failed")
