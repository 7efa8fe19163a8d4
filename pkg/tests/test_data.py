import numpy as np
import pytest

from seqfusion.data import (ClassCounts, Dataset, FeatureView, class_counts,
                            concat_views, load_dataset, write_dataset)
from seqfusion.exceptions import (EmptyModality, MissingColumn, NonBinaryLabel,
                                  NonFiniteValue, UnknownModality)
from seqfusion.synth import SignalProfile, generate

from conftest import make_dataset

SMALL_CSV = """sample_id,label,clin_age,clin_sex,img_a,img_b,img_c
p1,1,61.5,1,0.1,0.2,0.3
p2,0,48.0,0,1.5,-2.0,3.25
p3,0,70.25,1,0,0,0
p4,1,55,0,-1e-3,2e5,7
"""


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_small_file(tmp_path):
    ds = load_dataset(write(tmp_path, SMALL_CSV))
    assert ds.n == 4
    assert ds.sample_ids == ("p1", "p2", "p3", "p4")
    assert ds.labels.tolist() == [1, 0, 0, 1]
    assert ds.view("clinical").matrix.shape == (4, 2)
    assert ds.view("image").matrix.shape == (4, 3)
    assert ds.view("clinical").feature_names == ("clin_age", "clin_sex")
    assert ds.view("image").matrix[3, 1] == 2e5


def test_load_custom_schema(tmp_path):
    ds = load_dataset(write(tmp_path, SMALL_CSV), {"img_": "ct", "clin_": "ehr"})
    assert list(ds.modalities) == ["ct", "ehr"]


def test_non_binary_label_names_row(tmp_path):
    bad = SMALL_CSV.replace("p3,0,", "p3,2,")
    with pytest.raises(NonBinaryLabel, match="row 3"):
        load_dataset(write(tmp_path, bad))


def test_missing_label_column(tmp_path):
    with pytest.raises(MissingColumn):
        load_dataset(write(tmp_path, "sample_id,clin_a,img_b\nx,1,2\n"))


@pytest.mark.parametrize("cell", ["nan", "inf", "-inf", "abc"])
def test_non_finite_cell(tmp_path, cell):
    bad = SMALL_CSV.replace("p2,0,48.0", f"p2,0,{cell}")
    with pytest.raises(NonFiniteValue, match="row 2.*clin_age"):
        load_dataset(write(tmp_path, bad))


def test_empty_modality(tmp_path):
    with pytest.raises(EmptyModality):
        load_dataset(write(tmp_path, SMALL_CSV), {"clin_": "clinical", "ct_": "image"})


def test_round_trip_generated(tmp_path):
    ds = generate(SignalProfile(n=50, d_image=5, seed=3))
    path = write_dataset(ds, tmp_path / "g.csv")
    back = load_dataset(path)
    assert back.equals(ds)
    for name in ds.modalities:
        assert back.view(name).matrix.tobytes() == ds.view(name).matrix.tobytes()


def test_class_counts():
    ds = make_dataset([1, 0, 0, 1], np.zeros(4), np.zeros(4))
    assert class_counts(ds) == ClassCounts(positive=2, negative=2)


def test_class_counts_table_cohort():
    labels = np.array([1] * 165 + [0] * 435)
    counts = class_counts(make_dataset(labels, np.zeros(600), np.zeros(600)))
    assert (counts.positive, counts.negative, counts.n, counts.k) == (165, 435, 600, 2)


def test_class_counts_all_negative():
    counts = class_counts(make_dataset([0] * 5, np.zeros(5), np.zeros(5)))
    assert (counts.positive, counts.negative) == (0, 5)


def test_concat_views():
    ds = make_dataset([1, 0, 0, 1], np.arange(8).reshape(4, 2), np.arange(12).reshape(4, 3) + 100)
    both = concat_views(ds, ["clinical", "image"])
    assert both.matrix.shape == (4, 5)
    assert np.array_equal(both.matrix[:, :2], ds.view("clinical").matrix)
    assert concat_views(ds, ["image"]) is ds.view("image")
    swapped = concat_views(ds, ["image", "clinical"])
    assert sorted(map(tuple, both.matrix.T.tolist())) == sorted(map(tuple, swapped.matrix.T.tolist()))
    assert not np.array_equal(both.matrix, swapped.matrix)


def test_concat_unknown():
    ds = make_dataset([1, 0], np.zeros(2), np.zeros(2))
    with pytest.raises(UnknownModality):
        concat_views(ds, ["clinical", "genomics"])


def test_views_immutable():
    ds = make_dataset([1, 0], np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        ds.view("image").matrix[0, 0] = 1.0


def test_view_row_mismatch():
    from seqfusion.exceptions import LengthMismatch
    with pytest.raises(LengthMismatch):
        Dataset(("a", "b"), np.array([0, 1]),
                {"x": FeatureView("x", ("x_a",), np.zeros((3, 1)))})


def test_duplicate_feature_names():
    with pytest.raises(ValueError):
        FeatureView("x", ("a", "a"), np.zeros((2, 2)))
