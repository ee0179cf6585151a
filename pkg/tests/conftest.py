import numpy as np
import pytest

# reference folding sets for N=16, in the package's label notation
REFERENCE_SETS = {
    "fft": {
        "A": "A4 A5 A6 A7 A0 A1 A2 A3",
        "B": "B0 B1 B2 B3 B4 B5 B6 B7",
        "C": "C6 C7 C0 C1 C2 C3 C4 C5",
        "D": "D5 D6 D7 D0 D1 D2 D3 D4",
    },
    "naive-ifft": {
        "A": "A2 A3 A4 A5 A6 A7 A0 A1",
        "B": "B6 B7 B0 B1 B2 B3 B4 B5",
        "C": "C4 C5 C6 C7 C0 C1 C2 C3",
        "D": "D3 D4 D5 D6 D7 D0 D1 D2",
    },
    "asap-ifft": {
        "A": "A5 A3 A7 A0 A4 A2 A6 A1",
        "B": "B1 B5 B3 B7 B0 B4 B2 B6",
        "C": "C2 C6 C1 C5 C3 C7 C0 C4",
        "D": "D3 D7 D0 D4 D2 D6 D1 D5",
    },
    "fft-interleaved": {
        "A": "A'0 A'1 A'2 A'3 A'4 A'5 A'6 A'7 A0 A1 A2 A3 A4 A5 A6 A7",
        "B": "B4 B5 B6 B7 B'0 B'1 B'2 B'3 B'4 B'5 B'6 B'7 B0 B1 B2 B3",
        "C": "C2 C3 C4 C5 C6 C7 C'0 C'1 C'2 C'3 C'4 C'5 C'6 C'7 C0 C1",
        "D": "D1 D2 D3 D4 D5 D6 D7 D'0 D'1 D'2 D'3 D'4 D'5 D'6 D'7 D0",
    },
    "naive-ifft-interleaved": {
        "A": "A'6 A'7 A0 A1 A2 A3 A4 A5 A6 A7 A'0 A'1 A'2 A'3 A'4 A'5",
        "B": "B'2 B'3 B'4 B'5 B'6 B'7 B0 B1 B2 B3 B4 B5 B6 B7 B'0 B'1",
        "C": "C'0 C'1 C'2 C'3 C'4 C'5 C'6 C'7 C0 C1 C2 C3 C4 C5 C6 C7",
        "D": "D7 D'0 D'1 D'2 D'3 D'4 D'5 D'6 D'7 D0 D1 D2 D3 D4 D5 D6",
    },
    "asap-ifft-interleaved": {
        "A": "A4 A2 A6 A1 A5 A3 A7 A'0 A'4 A'2 A'6 A'1 A'5 A'3 A'7 A0",
        "B": "B0 B4 B2 B6 B1 B5 B3 B7 B'0 B'4 B'2 B'6 B'1 B'5 B'3 B'7",
        "C": "C'3 C'7 C0 C4 C2 C6 C1 C5 C3 C7 C'0 C'4 C'2 C'6 C'1 C'5",
        "D": "D'2 D'6 D'1 D'5 D'3 D'7 D0 D2 D4 D6 D1 D5 D3 D7 D'0 D'4",
    },
}


def reference_rows(key):
    """Reference folding sets of *key* as 'A = {A4, A5, ...}' strings."""
    return [f"{pe} = {{{', '.join(row.split())}}}" for pe, row in REFERENCE_SETS[key].items()]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
