"""Shared fixtures: the three reference circuits and the frozen corpus."""

import random

import pytest

from redrem.bench_io import parse_bench
from redrem.oracle import random_circuit

# Frozen corpus: 1000 seeded circuits, <= 12 inputs, <= 60 gates.
CORPUS_BASE = 1000
CORPUS_SIZE = 1000


def corpus_params(k):
    seed = CORPUS_BASE + k
    rng = random.Random(seed)
    return seed, rng.randint(3, 12), rng.randint(5, 60)


def corpus_circuit(k):
    seed, n_in, n_g = corpus_params(k)
    return random_circuit(seed, n_in, n_g)


CONFLICT_BENCH = """\
INPUT(a)
INPUT(b)
OUTPUT(f)
g = OR(a, b)
f = AND(a, g)
"""

# Equivalent by De Morgan; every single stuck-at fault is detectable.
DEMORGAN_BENCH = """\
INPUT(a)
INPUT(b)
OUTPUT(u)
OUTPUT(w)
u = AND(a, b)
na = NOT(a)
nb = NOT(b)
w = NOR(na, nb)
"""

# Stem with both branches masked under s=0 while the stem itself stays
# observable (the reconvergent counterexample topology).
STEM_BENCH = """\
INPUT(s)
OUTPUT(g)
n = BUF(s)
g = AND(s, n)
"""


_redundancy_cache = {}


def corpus_has_redundancy(k):
    """has_undetectable_fault over the frozen corpus, cached per session."""
    from redrem.oracle import has_undetectable_fault
    if k not in _redundancy_cache:
        _redundancy_cache[k] = has_undetectable_fault(corpus_circuit(k))
    return _redundancy_cache[k]


@pytest.fixture
def conflict_circuit():
    return parse_bench(CONFLICT_BENCH)


@pytest.fixture
def demorgan_circuit():
    return parse_bench(DEMORGAN_BENCH)


@pytest.fixture
def stem_circuit():
    return parse_bench(STEM_BENCH)
