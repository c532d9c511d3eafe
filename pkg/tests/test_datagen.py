import numpy as np
import pytest

from fbpindex import datagen
from fbpindex.errors import ConfigurationError, DataFormatError

from conftest import small_spec


def test_generate_is_pure(small_dataset):
    again = datagen.generate(small_spec())
    assert again == small_dataset
    assert datagen.generate(small_spec(seed=12)) != small_dataset


def test_shapes_and_ids(small_dataset):
    assert small_dataset.characteristics == ["face", "fingerprint", "iris"]
    assert small_dataset.subject_ids[:2] == ("id000", "id001")
    for arr in small_dataset.data.values():
        assert arr.shape == (120, 4, 64) and arr.dtype == np.float32


def test_sigma_controls_intra_class_spread(small_dataset):
    for name, sigma in (("face", 0.5), ("fingerprint", 0.3), ("iris", 0.8)):
        arr = small_dataset.data[name].astype(np.float64)
        spread = (arr - arr.mean(axis=1, keepdims=True)).std() * np.sqrt(4 / 3)
        assert spread == pytest.approx(sigma, rel=0.05)


def test_sigma_zero_gives_identical_samples():
    ds = datagen.generate(small_spec(n=5, sigmas=(0.0, 0.0, 0.0)))
    for arr in ds.data.values():
        assert (arr == arr[:, :1]).all()


def test_characteristics_are_independent_streams():
    a = datagen.generate(small_spec(n=5))
    spec = small_spec(n=5)
    only_iris = datagen.SynthSpec(5, spec.characteristics[2:], spec.seed)
    assert np.array_equal(datagen.generate(only_iris).data["iris"], a.data["iris"])


@pytest.mark.parametrize("fmt", ["csv", "bin"])
def test_roundtrip(tmp_path, fmt):
    ds = datagen.generate(small_spec(n=6, d=16))
    path = tmp_path / ("data.csv" if fmt == "csv" else "data")
    datagen.store(path, ds)
    assert datagen.load(path if fmt == "csv" else path.with_suffix(".json")) == ds


def write(tmp_path, text):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    return p


HEADER = "subject_id,characteristic,sample_id,v0,v1\n"


@pytest.mark.parametrize("body,line", [
    ("a,face,0,1.0\n", 2),
    ("a,face,0,1.0,x\n", 2),
    ("a,face,0,1.0,2.0\na,face,0,1.0,2.0\n", 3),
    ("a,face,0,1.0,nan\n", 2),
])
def test_malformed_rows_report_line(tmp_path, body, line):
    with pytest.raises(DataFormatError) as err:
        datagen.load_csv(write(tmp_path, HEADER + body))
    assert err.value.line == line
    assert str(err.value).startswith(f"line {line}:")


def test_incomplete_dataset(tmp_path):
    body = "a,face,0,1,2\na,face,1,1,2\nb,face,0,1,2\n"
    with pytest.raises(DataFormatError):
        datagen.load_csv(write(tmp_path, HEADER + body))
    with pytest.raises(DataFormatError):
        datagen.load_csv(write(tmp_path, "x,y\n"))
    with pytest.raises(DataFormatError):
        datagen.load(tmp_path / "missing.csv")


def test_truncated_binary(tmp_path):
    ds = datagen.generate(small_spec(n=4, d=16))
    datagen.store_binary(tmp_path / "d", ds)
    raw = (tmp_path / "d.bin").read_bytes()
    (tmp_path / "d.bin").write_bytes(raw[:-8])
    with pytest.raises(DataFormatError):
        datagen.load(tmp_path / "d.json")


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        small_spec(d=8).validate(k_max=8)
    with pytest.raises(ConfigurationError):
        datagen.SynthSpec(characteristics=(datagen.CharacteristicSpec("a"),) * 2).validate()
    with pytest.raises(ConfigurationError):
        small_spec(sigmas=(-1, 0, 0)).validate()
    spec = small_spec()
    assert datagen.SynthSpec.from_dict(spec.to_dict()) == spec
