import numpy as np
import pytest

from fbpindex import rng as prng
from fbpindex.bitcore import BinaryTemplate
from fbpindex.errors import ConfigurationError, DimensionError
from fbpindex.protect import (IntegerTemplate, Protector, Scheme, SchemeKey, biohash,
                              biohash_matrix, code_width, collision_matrix, hamming_matrix,
                              iom_decode, iom_encode, iom_grp, sign_binarize, similarity)

KEY = SchemeKey(Scheme.BIOHASHING, 42, "face")
IOM_KEY = SchemeKey(Scheme.IOM_GRP, 42, "face")


def gram_schmidt(vectors):
    out = []
    for v in vectors:
        w = v.copy()
        for u in out:
            w -= (w @ u) * u
        out.append(w / np.linalg.norm(w))
    return np.array(out)


def test_sign_baseline():
    assert str(sign_binarize([0.0, -0.1, 2.0, -3.0])) == "1010"


def test_biohash_injected_matrix():
    matrix = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]])
    e = np.array([0.3, -0.7, 0.2, 0.1])
    assert str(biohash(e, KEY, l=2, matrix=matrix)) == "10"


def test_biohash_matrix_is_gram_schmidt_of_seeded_gaussians():
    d, l = 24, 10
    raw = prng.gaussian(42, prng.stream_id("biohashing", d, l), l * d).reshape(l, d)
    expected = gram_schmidt(raw)
    got = biohash_matrix(42, d, l)
    assert np.allclose(got, expected, atol=1e-10)
    assert np.allclose(got @ got.T, np.eye(l), atol=1e-10)


def test_biohash_length_bounds():
    with pytest.raises(ValueError):
        biohash_matrix(1, 8, 9)


def test_biohash_key_dependence(rng):
    e = rng.normal(size=64)
    a = biohash(e, KEY, l=64)
    b = biohash(e, SchemeKey(Scheme.BIOHASHING, 43, "face"), l=64)
    assert a == biohash(e, KEY, l=64)
    assert a != b


def test_iom_injected_vectors():
    e = np.array([0.5, -1.0, 2.0])
    vectors = np.stack([e, -e])[None, :, :]
    t = iom_grp(e, IOM_KEY, m_ints=1, q=2, vectors=vectors)
    assert t.ints.tolist() == [0]


def test_iom_size_and_codes(rng):
    e = rng.normal(size=32)
    t = iom_grp(e, IOM_KEY, m_ints=512, q=16)
    f = iom_encode(t)
    assert f.n == 2048
    assert iom_decode(f, 16) == t
    assert code_width(16) == 4
    with pytest.raises(ConfigurationError):
        code_width(12)


def test_iom_encoding_big_endian():
    f = iom_encode(IntegerTemplate([1, 14], 16))
    assert str(f) == "00011110"


def test_similarity_definitions():
    a = BinaryTemplate.from_string("1100")
    b = BinaryTemplate.from_string("1010")
    assert similarity(a, b, "biohashing") == 0.5
    x = IntegerTemplate([1, 2, 3, 4], 16)
    y = IntegerTemplate([1, 0, 3, 0], 16)
    assert similarity(x, y, Scheme.IOM_GRP) == 0.5
    with pytest.raises(DimensionError):
        similarity(a, BinaryTemplate.from_string("1"), "sign")
    with pytest.raises(DimensionError):
        similarity(a, b, "iom-grp")


def test_batch_kernels_match_naive(rng):
    a = rng.integers(0, 2, size=(6, 50))
    b = rng.integers(0, 2, size=(4, 50))
    naive = np.array([[np.count_nonzero(x != y) for y in b] for x in a])
    assert np.array_equal(hamming_matrix(a, b), naive)
    ia = rng.integers(0, 8, size=(5, 30))
    ib = rng.integers(0, 8, size=(3, 30))
    naive = np.array([[np.count_nonzero(x == y) for y in ib] for x in ia])
    assert np.array_equal(collision_matrix(ia, ib, 8), naive)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_protector_batch_matches_single_path(scheme, rng):
    e = rng.normal(size=(5, 40))
    p = Protector(SchemeKey(scheme, 7, "iris"), length=32, m_ints=20, q=8)
    batch = p.protect(e)
    assert batch.n_bits == p.n_bits(40)
    for i in range(5):
        if scheme is Scheme.SIGN:
            assert batch.binary(i) == sign_binarize(e[i])
        elif scheme is Scheme.BIOHASHING:
            assert batch.binary(i) == biohash(e[i], p.key, l=32)
        else:
            t = iom_grp(e[i], p.key, m_ints=20, q=8)
            assert batch.scored(i) == t
            assert batch.binary(i) == iom_encode(t)


def test_scheme_parse():
    assert Scheme.parse("IoM-GRP") is Scheme.IOM_GRP
    with pytest.raises(ConfigurationError):
        Scheme.parse("rot13")
