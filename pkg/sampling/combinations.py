from itertools import combinations
from math import comb
from typing import Iterator, Tuple

from sampling.settings import sampling_settings
from utils.errors import SamplingError


class CombinationSpace:
    """All subsets of {1..n} with at least k_min members, smallest subsets first."""

    def __init__(self, n: int, k_min: int = sampling_settings.k_min):
        if not 1 <= k_min <= n:
            raise SamplingError(f"need 1 <= k_min <= n, got k_min={k_min}, n={n}")
        self.n = n
        self.k_min = k_min

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        for k in range(self.k_min, self.n + 1):
            yield from combinations(range(1, self.n + 1), k)

    def __len__(self) -> int:
        return sum(comb(self.n, k) for k in range(self.k_min, self.n + 1))


def enumerate_combinations(n: int, k_min: int = sampling_settings.k_min) -> CombinationSpace:
    return CombinationSpace(n, k_min)
