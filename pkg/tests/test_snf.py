import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fkdet.snf import bareiss_det, elementary_divisors, exact_det, integer_rank, snf


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def int_det_2x2_unimodular(M):
    return bareiss_det(M) in (1, -1)


def test_examples():
    assert snf([[3, 1], [1, 3]]).divisors == (1, 8)
    assert snf([[int(i == j) for j in range(5)] for i in range(5)]).divisors == (1,) * 5
    assert snf([[2, 0], [0, 0]]).divisors == (2, 0)


def test_known_forms():
    # classic textbook example: diag(2, 6, 12)
    M = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    assert snf(M).divisors == (2, 6, 12)
    assert snf([[0, 0], [0, 0]]).divisors == (0, 0)
    assert snf([[4, 6]]).divisors == (2,)
    assert snf([[6], [4]]).divisors == (2,)


def random_matrix(rng, rows, cols, lo=-9, hi=9):
    M = [[rng.randint(lo, hi) for _ in range(cols)] for _ in range(rows)]
    if rng.random() < 0.3:
        k = rng.choice([2, 3, 6])
        M = [[k * x for x in row] for row in M]
    return M


def test_snf_product_equals_det_200_matrices():
    rng = random.Random(20240601)
    done = 0
    while done < 200:
        n = rng.randint(1, 12)
        M = random_matrix(rng, n, n)
        d = bareiss_det(M)
        if d == 0:
            continue
        divs = snf(M).divisors
        assert math.prod(divs) == abs(d) == abs(exact_det(M))
        assert all(b % a == 0 for a, b in zip(divs, divs[1:]))
        assert snf(M, modulus=d).divisors == divs
        done += 1


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.randoms(use_true_random=False))
def test_transforms_are_unimodular_and_diagonalize(rows, cols, rnd):
    M = random_matrix(rnd, rows, cols, -5, 5)
    res = snf(M, transforms=True)
    D = matmul(matmul(res.U, M), res.V)
    for i in range(rows):
        for j in range(cols):
            assert D[i][j] == (res.divisors[i] if i == j else 0)
    assert abs(bareiss_det(res.U)) == 1 and abs(bareiss_det(res.V)) == 1
    nz = [d for d in res.divisors if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert res.divisors[len(nz):] == (0,) * (len(res.divisors) - len(nz))
    assert res.rank == integer_rank(M)


def test_modular_requires_square_nonsingular():
    with pytest.raises(ValueError):
        snf([[1, 2]], modulus=1)
    with pytest.raises(ValueError):
        snf([[1, 0], [0, 1]], modulus=0)


def test_determinant_paths_agree_on_sparse_band():
    n = 60
    M = [[5 if i == j else (1 if abs(i - j) == 1 else 0) for j in range(n)] for i in range(n)]
    # three-term recurrence oracle
    prev, cur = 1, 5
    for _ in range(n - 1):
        prev, cur = cur, 5 * cur - prev
    assert exact_det(M) == bareiss_det(M) == cur
    assert math.prod(elementary_divisors(M)) == cur


def test_exact_det_sign_and_singular():
    assert exact_det([[0, 1], [1, 0]]) == -1
    assert exact_det([[1, 2], [2, 4]]) == 0
    assert exact_det([[0, 0, 1], [1, 0, 0], [0, 1, 0]]) == 1
