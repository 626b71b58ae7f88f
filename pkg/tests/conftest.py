import hypothesis
import numpy as np
import pytest

import reporting  # noqa: F401  (imported first so the suite clock starts at collection)
from greensplit.manifold import cone, euclidean
from models import pole, smoothed

hypothesis.settings.register_profile("default", max_examples=20, deadline=None,
                                     derandomize=True, print_blob=True)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def reference_spec():
    """Smoothed cone a = 0.8, width 0.1 in dimension 3."""
    return smoothed(0.8, 0.1)


@pytest.fixture(scope="session")
def reference_offcenter(reference_spec):
    return pole(reference_spec, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[3, 4], ids=lambda n: f"n{n}")
def euclid(request):
    return euclidean(request.param)


@pytest.fixture(params=[0.6, 0.8, 0.9], ids=lambda a: f"a{a}")
def cone3(request):
    return cone(3, request.param)


def pytest_terminal_summary(terminalreporter):
    import reporting

    if not reporting.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(reporting.RESULTS):
        terminalreporter.write_line(reporting.RESULTS[k])
    t = reporting.elapsed()
    verdict = "PASS" if t <= reporting.BUDGET else "FAIL"
    terminalreporter.write_line(f"suite runtime {verdict}  {t:.0f} s of {reporting.BUDGET:.0f} s budget")
