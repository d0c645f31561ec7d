import random

import pytest

from cbpp import Instance

EXAMPLE_ROWS = [(4, 2, 1), (3, 1, 2), (3, 1, 3), (2, 1, 3)]
EXAMPLE_BINS = [(1, 2), (1, 3), (4,)]


def worked_example() -> Instance:
    return Instance.from_tuples(8, 3, EXAMPLE_ROWS)


@pytest.fixture
def example_instance():
    return worked_example()


def random_instance(rng: random.Random, max_copies=8, max_L=20, max_Q=4, max_m=None) -> Instance:
    """Small random instance with distinct (length, color) pairs."""
    L = rng.randint(2, max_L)
    Q = rng.randint(2, max_Q)
    total = rng.randint(1, max_copies)
    rows: dict[tuple[int, int], int] = {}
    for _ in range(total):
        key = (rng.randint(1, L), rng.randint(1, Q))
        if key not in rows and max_m is not None and len(rows) >= max_m:
            key = rng.choice(sorted(rows))
        rows[key] = rows.get(key, 0) + 1
    return Instance.from_tuples(L, Q, [(l, d, c) for (l, c), d in sorted(rows.items())])


def random_instances(seed: int, n: int, **kw) -> list[Instance]:
    rng = random.Random(seed)
    return [random_instance(rng, **kw) for _ in range(n)]
