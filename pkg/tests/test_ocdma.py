import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vlcris.ocdma import (
    despread,
    estimate_ap_powers,
    hadamard_codebook,
    spread,
    spreading_factor_for,
)


def test_h2_rows():
    cb = hadamard_codebook(2)
    assert cb.codes.tolist() == [[1, 1], [1, -1]]


@pytest.mark.parametrize("sf", [2, 4, 8, 16])
def test_orthogonality_exact(sf):
    codes = hadamard_codebook(sf).codes
    gram = codes @ codes.T
    assert np.array_equal(gram, sf * np.eye(sf, dtype=gram.dtype))
    assert np.all(codes[0] == 1)


@pytest.mark.parametrize("sf", [0, 1, 3, 6, 12, 2.5])
def test_non_power_of_two_rejected(sf):
    with pytest.raises(ValueError):
        hadamard_codebook(sf)


def test_codebook_read_only():
    with pytest.raises(ValueError):
        hadamard_codebook(4).codes[0, 0] = 7


@pytest.mark.parametrize("n, sf", [(1, 2), (2, 4), (3, 4), (4, 8), (7, 8), (8, 16), (10, 16)])
def test_spreading_factor_for(n, sf):
    assert spreading_factor_for(n) == sf
    assert n <= sf - 1  # row 0 stays reserved


def test_spread_examples():
    assert spread([1], [1, 1], 1.0).chips.tolist() == [2, 2]
    assert spread([0], [1, -1], 1.0).chips.tolist() == [0, 2]
    with pytest.raises(ValueError):
        spread([1], [1, -1], 0.5)


def test_despread_examples():
    cb = hadamard_codebook(4)
    assert despread(spread([1], cb.row(2), 1.0), cb.row(2)).tolist() == [4.0]
    assert despread(spread([1, 0], cb.row(2), 1.0), cb.row(3)).tolist() == [0.0, 0.0]
    with pytest.raises(ValueError):
        despread(np.ones(5), cb.row(1))


def test_two_ap_superposition_all_row_pairs():
    cb = hadamard_codebook(4)
    for i, j in itertools.permutations(range(1, 4), 2):
        for bi, bj in itertools.product([0, 1], repeat=2):
            rx = spread([bi], cb.row(i), 1.0).chips + spread([bj], cb.row(j), 1.0).chips
            assert despread(rx, cb.row(i)).tolist() == [4.0 * (2 * bi - 1)]


def test_power_estimate_examples():
    cb = hadamard_codebook(4)
    one = spread([1, 0, 1], cb.row(1)).chips
    assert estimate_ap_powers(one, cb, [1]).tolist() == [1.0]
    rx = 0.5 * spread([1, 0], cb.row(1)).chips + 0.25 * spread([0, 0], cb.row(2)).chips
    assert estimate_ap_powers(rx, cb, [1, 2]).tolist() == [0.5, 0.25]
    assert estimate_ap_powers(np.zeros(8), cb, [1, 2, 3]).tolist() == [0.0, 0.0, 0.0]


@given(st.lists(st.integers(0, 1), min_size=1, max_size=16), st.sampled_from([2, 4, 8, 16]),
       st.integers(1, 15), st.floats(1.0, 10.0))
def test_round_trip_and_unipolarity(bits, sf, row, offset):
    row = 1 + row % (sf - 1)
    code = hadamard_codebook(sf).row(row)
    frame = spread(bits, code, offset)
    assert np.all(frame.chips >= 0)
    corr = despread(frame, code)
    expected = sf * (2 * np.asarray(bits) - 1.0)
    np.testing.assert_allclose(corr, expected, rtol=0, atol=1e-12 * sf * offset)
    exact = spread(bits, code, float(round(offset)))
    assert np.array_equal(despread(exact, code), expected)


@given(st.sampled_from([4, 8]), st.data())
def test_superposition_recovers_amplitudes(sf, data):
    cb = hadamard_codebook(sf)
    rows = data.draw(st.lists(st.integers(1, sf - 1), min_size=1, max_size=sf - 1, unique=True))
    amps = [data.draw(st.sampled_from([0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 3.0])) for _ in rows]
    bits = [data.draw(st.lists(st.integers(0, 1), min_size=3, max_size=3)) for _ in rows]
    rx = sum(a * spread(b, cb.row(r), 1.0).chips for a, b, r in zip(amps, bits, rows))
    assert estimate_ap_powers(rx, cb, rows).tolist() == amps
