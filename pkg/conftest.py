import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, ROOT)

from codespec import CodeSpec, classical, load_spec  # noqa: E402


@pytest.fixture
def fig2_spec():
    return load_spec(os.path.join(ROOT, 'specs', 'fig2_abs_8_4.json'))


@pytest.fixture
def case3_spec():
    return load_spec(os.path.join(ROOT, 'specs', 'abs_16_case3.json'))


@pytest.fixture
def classical_8_4():
    return classical(3, 4, {1, 2, 3, 5})


@pytest.fixture
def add_spec_16():
    """m=4 code with an add at every layer it fits."""
    return CodeSpec(m=4, k=8, frozen=frozenset({1, 2, 3, 4, 5, 6, 9, 10}),
                    swap_sets={3: {6}}, add_sets={2: {2}, 3: {2}, 4: {4, 10}})


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def spec_path():
    return lambda name: os.path.join(ROOT, 'specs', name)
