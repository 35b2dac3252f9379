import numpy as np
import pytest

from uqkit.flood import flood_height, flood_joint, flood_level


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def joint():
    return flood_joint()


@pytest.fixture(scope="session")
def joint_indep():
    return flood_joint(0)


@pytest.fixture
def level():
    return flood_level()


@pytest.fixture
def height():
    return flood_height()


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """record(name, [(label, ok), ...]): print a PASS/FAIL line, keep it for
    the end-of-run summary, then assert."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def record(name, checks):
        ok = all(c for _, c in checks)
        detail = "; ".join(f"{label} [{'ok' if c else 'fail'}]" for label, c in checks)
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        print("\n" + line)
        lines.append(line)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
