import random
from fractions import Fraction

from permlab import RationalMatrix


def random_positive_matrix(n: int, rng: random.Random, max_num: int = 9, max_den: int = 4) -> RationalMatrix:
    """Random strictly positive rational matrix with small entries."""
    return RationalMatrix.from_rows(
        [[Fraction(rng.randint(1, max_num), rng.randint(1, max_den)) for _ in range(n)] for _ in range(n)]
    )


def random_supported_matrix(n: int, rng: random.Random, zero_prob: float = 0.3) -> RationalMatrix:
    """Random non-negative matrix with zeros, guaranteed a positive diagonal."""
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i != j and rng.random() < zero_prob:
                row.append(Fraction(0))
            else:
                row.append(Fraction(rng.randint(1, 9), rng.randint(1, 4)))
        rows.append(row)
    return RationalMatrix.from_rows(rows)
