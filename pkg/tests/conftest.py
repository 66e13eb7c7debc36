import math

import numpy as np
import pytest

import wedgeqft as wq

HALF_PI = math.pi / 2


@pytest.fixture(scope="session")
def free():
    return wq.build_model(+1)


@pytest.fixture(scope="session")
def ising():
    return wq.build_model(-1)


@pytest.fixture(scope="session")
def shg():
    # Sinh-Gordon at B = 1/2: sinh(beta) = i sin(pi B) with beta = i pi/2
    return wq.build_model(-1, zeros=[1j * HALF_PI])


@pytest.fixture(scope="session")
def resonance():
    return wq.build_model(-1, zeros=[1j * math.pi / 4])


@pytest.fixture(scope="session")
def resonance_plus():
    # the S2(0) = +1 variant: (i - sqrt(2) sinh t) / (i + sqrt(2) sinh t)
    return wq.build_model(+1, zeros=[1j * math.pi / 4])


@pytest.fixture(scope="session")
def catalogue(free, ising, shg, resonance):
    return {"free": free, "ising": ising, "shg": shg, "resonance": resonance}


@pytest.fixture(scope="session")
def grid7():
    return wq.RapidityGrid(6.0, 7)


@pytest.fixture(scope="session")
def grid9():
    return wq.RapidityGrid(6.0, 9)


@pytest.fixture(scope="session")
def grid21():
    return wq.RapidityGrid(6.0, 21)


@pytest.fixture(scope="session")
def grid41():
    return wq.RapidityGrid(6.0, 41)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
