import pytest

from prolate.functions import adversarial_bump_function
from prolate.spectrum import compute_spectrum_1d, tensor_spectrum


@pytest.fixture(scope="session")
def spec2():
    return compute_spectrum_1d(2.0, 200)


@pytest.fixture(scope="session")
def spec4():
    return compute_spectrum_1d(4.0, 200)


@pytest.fixture(scope="session")
def spec8():
    return compute_spectrum_1d(8.0, 200)


@pytest.fixture(scope="session")
def specd4_1(spec4):
    """d = 1 wrapper around the full R = 4 base spectrum."""
    return tensor_spectrum(spec4, 1, spec4.order)


@pytest.fixture(scope="session")
def specd4_2(spec4):
    return tensor_spectrum(spec4, 2, 400)


@pytest.fixture(scope="session")
def adversarial_F():
    return adversarial_bump_function()
