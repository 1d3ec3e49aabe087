import numpy as np
import pytest

import homcone as hc


@pytest.fixture(scope="session")
def butterfly():
    return hc.butterfly_graph()


@pytest.fixture(scope="session")
def subgroups():
    return hc.butterfly_subgroups()


@pytest.fixture(scope="session")
def spaces(butterfly, subgroups):
    return {k: hc.build_invariant_space(butterfly, v) for k, v in subgroups.items()}


@pytest.fixture(scope="session")
def models():
    return hc.build_butterfly_models()


@pytest.fixture(scope="session")
def models_by_id(models):
    return {m.label: m for m in models}


@pytest.fixture(scope="session")
def exam_data():
    return hc.exam_marks_summary()


@pytest.fixture
def dual_point():
    """Factory for random interior dual points of a space."""

    def make(space, rng, scale=1.0):
        a = rng.standard_normal((space.p, space.p))
        return scale * space.project(a @ a.T + 0.1 * np.eye(space.p))

    return make
