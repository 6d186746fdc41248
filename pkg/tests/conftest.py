import pytest

from nightfuse import synthetic


@pytest.fixture(scope="session")
def walking_scene():
    return synthetic.walking_block_scene(n_frames=40, seed=0)


@pytest.fixture(scope="session")
def walking_dir(tmp_path_factory, walking_scene):
    return synthetic.write_scene(walking_scene, tmp_path_factory.mktemp("walking"))


@pytest.fixture(scope="session")
def noisy_scene():
    return synthetic.walking_block_scene(n_frames=40, seed=0, n_specks=10, bar=True)


@pytest.fixture(scope="session")
def noisy_dir(tmp_path_factory, noisy_scene):
    return synthetic.write_scene(noisy_scene, tmp_path_factory.mktemp("noisy"))


@pytest.fixture(scope="session")
def dataset_scene():
    return synthetic.paired_dataset(seed=0)


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory, dataset_scene):
    return synthetic.write_scene(dataset_scene, tmp_path_factory.mktemp("dataset"))


# -- acceptance summary --------------------------------------------------------

_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): an acceptance criterion, summarized at the end of the run")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        detail = getattr(item, "criterion_detail", "")
        _ACCEPTANCE.append((marker.args[0], "PASS" if rep.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{status}] {name}" + (f" -- {detail}" if detail else ""))
