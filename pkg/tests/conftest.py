import pytest
from hypothesis import HealthCheck, settings

from szdetect.synth import make_mini_corpus

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("mini")
    annotations = make_mini_corpus(root)
    return root, annotations
