import numpy as np
import pytest
from hypothesis import settings as hypothesis_settings

from app.algebra.gf2 import Gf2Matrix, GradedKComplex

hypothesis_settings.register_profile("algebra", deadline=None, max_examples=50)
hypothesis_settings.load_profile("algebra")


def random_invertible(rng: np.random.Generator, n: int) -> Gf2Matrix:
    while True:
        m = Gf2Matrix.from_array(rng.integers(0, 2, size=(n, n)))
        if m.rank() == n:
            return m


def random_complex(seed: int, degrees: int = 6, max_part: int = 4):
    """Complex with known homology: B ⊕ H ⊕ L per degree, scrambled by random bases.

    Returns the complex and the expected homology dimensions.
    """
    rng = np.random.default_rng(seed)
    h = [int(rng.integers(0, max_part)) for _ in range(degrees)]
    lifts = [0] + [int(rng.integers(0, max_part)) for _ in range(degrees - 1)] + [0]
    # degree n holds B_n (image of L_{n+1}), H_n, L_n
    dims = {n: lifts[n + 1] + h[n] + lifts[n] for n in range(degrees)}
    bases = {n: random_invertible(rng, dims[n]) for n in range(degrees)}
    d = {}
    for n in range(1, degrees):
        standard = np.zeros((dims[n - 1], dims[n]), dtype=np.int64)
        for k in range(lifts[n]):
            standard[k, lifts[n + 1] + h[n] + k] = 1
        d[n] = bases[n - 1] @ Gf2Matrix.from_array(standard) @ bases[n].inverse()
    return GradedKComplex(dims, d), {n: h[n] for n in range(degrees)}


@pytest.fixture
def make_complex():
    return random_complex


@pytest.fixture
def circle_doc():
    return {
        "r": 1,
        "cells": [
            {"name": "e0", "dim": 0},
            {"name": "g1.e0", "dim": 0},
            {"name": "e1", "dim": 1},
            {"name": "g1.e1", "dim": 1},
        ],
        "action": {"g1": {"e0": "g1.e0", "e1": "g1.e1"}},
        "boundary": {"e1": [["1", "e0"], ["g1", "e0"]]},
    }


@pytest.fixture
def koszul2_doc():
    return {
        "r": 2,
        "generators": [
            {"name": "e{}", "degree": 0},
            {"name": "e{1}", "degree": 0},
            {"name": "e{2}", "degree": 0},
            {"name": "e{1,2}", "degree": 0},
        ],
        "differential": [
            ["0", "x1", "x2", "0"],
            ["0", "0", "0", "x2"],
            ["0", "0", "0", "x1"],
            ["0", "0", "0", "0"],
        ],
    }
