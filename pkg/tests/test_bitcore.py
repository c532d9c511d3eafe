import numpy as np
import pytest
from hypothesis import given, strategies as st

from fbpindex.bitcore import BinaryTemplate, Pattern, concat, hamming_distance, xor
from fbpindex.errors import DimensionError

bitstrings = st.text(alphabet="01", min_size=1, max_size=80)


def test_hamming_known_value():
    a = BinaryTemplate.from_string("0000")
    b = BinaryTemplate.from_string("0101")
    assert hamming_distance(a, b) == 2


def test_hamming_length_mismatch():
    with pytest.raises(DimensionError):
        hamming_distance(BinaryTemplate.from_string("01"), BinaryTemplate.from_string("011"))


@given(bitstrings)
def test_hamming_with_self_is_zero(s):
    t = BinaryTemplate.from_string(s)
    assert hamming_distance(t, t) == 0


@given(bitstrings)
def test_hex_roundtrip(s):
    t = BinaryTemplate.from_string(s)
    assert BinaryTemplate.from_hex(t.to_hex(), t.n) == t
    assert BinaryTemplate.from_dict(t.to_dict()) == t


def test_hex_is_msb_first():
    assert BinaryTemplate.from_string("1000000001").to_hex() == "8040"


def test_hex_rejects_dirty_padding():
    with pytest.raises(ValueError):
        BinaryTemplate.from_hex("ff", 4)
    with pytest.raises(ValueError):
        BinaryTemplate.from_hex("ffff", 4)


def test_template_is_immutable():
    t = BinaryTemplate.from_string("0110")
    with pytest.raises(ValueError):
        t.bits[0] = 1


@pytest.mark.parametrize("bad", [[0, 2], [], [[0, 1]]])
def test_template_rejects_non_bits(bad):
    with pytest.raises(ValueError):
        BinaryTemplate(np.array(bad))


def test_pattern_big_endian():
    p = Pattern.from_string("0110")
    assert p.value == 6 and p.k == 4
    assert p.bits == (0, 1, 1, 0)
    assert str(Pattern(1, 3)) == "001"


def test_pattern_range_checked():
    with pytest.raises(ValueError):
        Pattern(8, 3)
    with pytest.raises(ValueError):
        Pattern(0, 0)


def test_xor_and_concat():
    assert xor(Pattern.from_string("1100"), Pattern.from_string("1010")) == Pattern.from_string("0110")
    assert xor(Pattern.from_string("101")) == Pattern.from_string("101")
    with pytest.raises(DimensionError):
        xor(Pattern(1, 3), Pattern(1, 4))
    joined = concat([BinaryTemplate.from_string("01"), BinaryTemplate.from_string("110")])
    assert str(joined) == "01110"
    with pytest.raises(ValueError):
        concat([])


@given(st.lists(st.integers(0, 255), min_size=1, max_size=5))
def test_xor_matches_integer_xor(values):
    expected = 0
    for v in values:
        expected ^= v
    assert xor(*[Pattern(v, 8) for v in values]).value == expected
