import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vvlab import hashfam
from vvlab.hashfam import (
    AffineHash,
    deserialize,
    enumerate_family,
    evaluate,
    family_outputs,
    hash_from_index,
    pairwise_independence_frequency,
    sample_hash,
    serialize,
)
from vvlab.stats import wilson_interval


def oracle_eval(a, b, y, l):
    """Bit-by-bit GF(2) arithmetic, no numpy."""
    bits = [(y >> j) & 1 for j in range(l)]
    return [(sum(a[r][j] * bits[j] for j in range(l)) + b[r]) % 2 for r in range(len(b))]


@st.composite
def hashes(draw, max_l=8, max_m=4):
    l = draw(st.integers(1, max_l))
    m = draw(st.integers(0, max_m))
    a = draw(st.lists(st.lists(st.integers(0, 1), min_size=l, max_size=l), min_size=m, max_size=m))
    b = draw(st.lists(st.integers(0, 1), min_size=m, max_size=m))
    return l, m, a, b


def _hash(l, m, a, b):
    return AffineHash(np.array(a, dtype=np.uint8).reshape(m, l), np.array(b, dtype=np.uint8))


# -- examples --------------------------------------------------------------

def test_same_seed_same_hash():
    h1 = sample_hash(4, 2, np.random.default_rng(5))
    h2 = sample_hash(4, 2, np.random.default_rng(5))
    assert h1 == h2
    assert np.array_equal(h1.matrix, h2.matrix) and np.array_equal(h1.offset, h2.offset)


def test_empty_output_hash():
    h = sample_hash(4, 0, np.random.default_rng(1))
    assert h.rows == 0
    for y in range(16):
        assert evaluate(h, y).size == 0
    assert h.zero_mask(np.arange(16)).all()


def test_rejects_zero_input_bits():
    with pytest.raises(ValueError):
        sample_hash(0, 2, np.random.default_rng(0))
    with pytest.raises(ValueError):
        sample_hash(3, -1, np.random.default_rng(0))


def test_zero_map():
    h = AffineHash(np.zeros((3, 5)), np.zeros(3))
    assert all(not evaluate(h, y).any() for y in range(32))


def test_identity_map():
    h = AffineHash(np.eye(4), np.zeros(4))
    for y in range(16):
        assert hashfam.pack_bits(evaluate(h, y)) == y


def test_hand_computed_value():
    # y = 01 read as (y_0, y_1) = (0, 1): 1*0 + 1*1 + 1 = 0
    h = AffineHash([[1, 1]], [1])
    assert evaluate(h, [0, 1]).tolist() == [0]
    assert evaluate(h, 0b10).tolist() == [0]


def test_length_mismatch():
    h = AffineHash([[1, 1]], [1])
    with pytest.raises(ValueError):
        evaluate(h, [0, 1, 1])
    with pytest.raises(ValueError):
        evaluate(h, 4)


def test_bad_shapes():
    with pytest.raises(ValueError):
        AffineHash(np.zeros((2, 3)), np.zeros(3))
    with pytest.raises(ValueError):
        AffineHash(np.full((1, 2), 2), np.zeros(1))


def test_preimage_fraction_of_zero_averages_to_two_to_minus_m():
    l, m, seeds = 8, 3, 10_000
    rng = np.random.default_rng(2024)
    ys = np.arange(1 << l)
    fractions = []
    for _ in range(seeds):
        h = sample_hash(l, m, rng)
        frac = h.zero_mask(ys).mean()
        # an affine preimage is empty or a coset of ker A
        assert frac == 0 or frac == pytest.approx(2.0 ** -_gf2_rank(h.matrix))
        fractions.append(frac)
    fractions = np.array(fractions)
    se = fractions.std(ddof=1) / np.sqrt(seeds)
    assert abs(fractions.mean() - 1 / 8) <= 3 * se


def _gf2_rank(a):
    a = a.copy().astype(np.uint8)
    rank = 0
    rows, cols = a.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if a[r, c]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        for r in range(rows):
            if r != rank and a[r, c]:
                a[r] ^= a[rank]
        rank += 1
    return rank


def test_pairwise_frequency_monte_carlo():
    freq = pairwise_independence_frequency(4, 2, 0b0000, 0b1000, [0, 0], [0, 0], 100_000,
                                           np.random.default_rng(9))
    lo, hi = wilson_interval(round(freq * 100_000), 100_000)
    assert lo <= 1 / 16 <= hi


def test_pairwise_frequency_empty_output():
    assert pairwise_independence_frequency(3, 0, 1, 2, [], [], 10, np.random.default_rng(0)) == 1.0


def test_pairwise_frequency_rejects_equal_points():
    with pytest.raises(ValueError):
        pairwise_independence_frequency(3, 1, 5, 5, [0], [0], 10, np.random.default_rng(0))


def test_exhaustive_small_family():
    members = list(enumerate_family(2, 1))
    assert len(members) == 8
    hits = sum(evaluate(h, 0).tolist() == [0] and evaluate(h, 0b10).tolist() == [0]
               for h in members)
    assert hits == 2


# -- exact properties over the full family ---------------------------------

@pytest.mark.parametrize("l,m", [(l, m) for l in range(1, 5) for m in range(0, 4)])
def test_exact_pairwise_independence_all_pairs(l, m):
    out = family_outputs(l, m, np.arange(1 << l))
    size = out.shape[0]
    for y1, y2 in itertools.permutations(range(1 << l), 2):
        counts = np.bincount(out[:, y1] * (1 << m) + out[:, y2], minlength=1 << (2 * m))
        assert np.all(counts == size >> (2 * m))


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 6), st.integers(0, 3), st.data())
def test_exact_pairwise_independence_sampled_pairs(l, m, data):
    y1 = data.draw(st.integers(0, (1 << l) - 1))
    y2 = data.draw(st.integers(0, (1 << l) - 1).filter(lambda v: v != y1))
    out = family_outputs(l, m, [y1, y2])
    counts = np.bincount(out[:, 0] * (1 << m) + out[:, 1], minlength=1 << (2 * m))
    assert np.all(counts == 1 << (m * (l + 1) - 2 * m))


@pytest.mark.parametrize("l,m", [(3, 2), (4, 1), (2, 3)])
def test_single_point_uniformity(l, m):
    out = family_outputs(l, m, np.arange(1 << l))
    for y in range(1 << l):
        counts = np.bincount(out[:, y], minlength=1 << m)
        assert np.all(counts == out.shape[0] >> m)


def test_family_outputs_matches_enumeration():
    l, m = 3, 2
    out = family_outputs(l, m, np.arange(1 << l))
    for index, h in enumerate(enumerate_family(l, m)):
        assert out[index].tolist() == h.evaluate_many(np.arange(1 << l)).tolist()


# -- evaluation agrees with the scalar oracle ------------------------------

@given(hashes(), st.data())
def test_evaluate_matches_oracle(params, data):
    l, m, a, b = params
    h = _hash(l, m, a, b)
    y = data.draw(st.integers(0, (1 << l) - 1))
    expected = oracle_eval(a, b, y, l)
    assert evaluate(h, y).tolist() == expected
    assert int(h.evaluate_many([y])[0]) == hashfam.pack_bits(expected)
    assert bool(h.zero_mask([y])[0]) == (not any(expected))


@settings(max_examples=50)
@given(st.lists(hashes(max_l=6), min_size=1, max_size=6), st.integers(1, 6))
def test_zero_masks_agree_with_single_hash(specs, l):
    hs = [_hash(l, m, [row[:l] + [0] * (l - len(row[:l])) for row in a], b)
          for _, m, a, b in specs]
    ys = np.arange(1 << l)
    masks = hashfam.zero_masks(hs, hashfam.witness_bits(l))
    for h, mask in zip(hs, masks):
        assert mask.tolist() == h.zero_mask(ys).tolist()


def test_stack_round_trip():
    rng = np.random.default_rng(4)
    sizes = [2, 0, 3, 5]
    stack = hashfam.sample_stack(6, sizes, rng)
    hs = hashfam.split_stack(stack, sizes)
    assert [h.rows for h in hs] == sizes
    direct = hashfam.stack_zero_masks(stack, sizes, hashfam.witness_bits(6))
    assert np.array_equal(direct, hashfam.zero_masks(hs, hashfam.witness_bits(6)))


# -- serialization ---------------------------------------------------------

@given(hashes(max_l=12, max_m=9))
def test_serialize_round_trip(params):
    h = _hash(*params)
    text = serialize(h)
    assert deserialize(text) == h
    assert serialize(deserialize(text)) == text


def test_serialize_layout():
    h = AffineHash([[1, 0, 1], [0, 1, 1]], [1, 0])
    assert serialize(h) == "l=3 m=2\n5\n6\n1\n"


def test_deserialize_rejects_garbage():
    with pytest.raises(ValueError):
        deserialize("l=2 m=1\n7\n0\n")
    with pytest.raises(ValueError):
        deserialize("l=2 m=2\n1\n")
    with pytest.raises(ValueError):
        deserialize("")


def test_hash_from_index_bounds():
    assert hash_from_index(2, 1, 7) == AffineHash([[1, 1]], [1])
    with pytest.raises(ValueError):
        hash_from_index(2, 1, 8)
