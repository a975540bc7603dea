import numpy as np
import pytest

from aegan_omics import ingest
from aegan_omics.errors import DataError
from aegan_omics.ingest import FeatureMatrix, LabelVector


def write(path, text):
    path.write_text(text)
    return path


def test_features_by_samples_transposed(tmp_path):
    p = write(tmp_path / "m.tsv", "feature\tS1\tS2\tS3\nTP53\t1\t2\t3\nBRCA1\t4\t5\t6\n")
    m = ingest.load_matrix(p, "expression")
    assert m.sample_ids == ("S1", "S2", "S3")
    assert m.feature_names == ("TP53", "BRCA1")
    np.testing.assert_array_equal(m.values, [[1, 4], [2, 5], [3, 6]])


def test_samples_by_features(tmp_path):
    p = write(tmp_path / "m.tsv", "sample\tA\tB\nS1\t1\t2\nS2\t3\t4\n")
    m = ingest.load_matrix(p, "cn", orientation=ingest.SAMPLES_BY_FEATURES)
    assert m.shape == (2, 2) and m.values[1, 0] == 3


def test_missing_values_imputed_with_means(tmp_path):
    p = write(tmp_path / "m.tsv", "sample\tA\tB\nS1\t1\t2\nS2\tNA\t4\nS3\t3\t6\nS4\t5\t8\nS5\t7\t10\n")
    m = ingest.load_matrix(p, "x", orientation=ingest.SAMPLES_BY_FEATURES)
    assert m.values[1, 0] == 4.0


def test_too_many_missing_drops_feature(tmp_path):
    p = write(tmp_path / "m.tsv", "sample\tA\tB\nS1\tNA\t2\nS2\tnan\t4\nS3\t3\t6\n")
    m = ingest.load_matrix(p, "x", orientation=ingest.SAMPLES_BY_FEATURES)
    assert m.feature_names == ("B",)


def test_impute_fits_on_given_rows():
    v = np.array([[1.0], [np.nan], [3.0], [100.0]])
    filled, kept, means = ingest.impute_missing(v, fit_rows=[0, 1, 2], max_missing_fraction=0.5)
    assert filled[1, 0] == 2.0 and means[0] == 2.0 and kept.all()


def test_non_numeric_cell_reports_location(tmp_path):
    p = write(tmp_path / "m.tsv", "feature\tS1\tS2\nTP53\t1\tabc\n")
    with pytest.raises(DataError, match="row 2"):
        ingest.load_matrix(p, "x")


def test_duplicate_features(tmp_path):
    p = write(tmp_path / "m.tsv", "feature\tS1\tS2\nTP53\t1\t2\nTP53\t3\t4\n")
    with pytest.raises(DataError, match="TP53"):
        ingest.load_matrix(p, "x")


def test_ragged_row(tmp_path):
    p = write(tmp_path / "m.tsv", "feature\tS1\tS2\nTP53\t1\n")
    with pytest.raises(DataError):
        ingest.load_matrix(p, "x")


def test_matrix_roundtrip(tmp_path, nprng):
    m = FeatureMatrix("x", ["a", "b"], ["F1", "F2", "F3"], nprng.normal(size=(2, 3)))
    for orient in ingest.ORIENTATIONS:
        ingest.write_matrix(m, tmp_path / "m.tsv", orientation=orient)
        back = ingest.load_matrix(tmp_path / "m.tsv", "x", orientation=orient)
        np.testing.assert_array_equal(back.values, m.values)
        assert back.feature_names == m.feature_names


def test_labels_numeric(tmp_path):
    p = write(tmp_path / "l.tsv", "sample_id\tlabel\nA\t0\nB\t1\nC\t0\n")
    lab = ingest.load_labels(p)
    assert lab.labels.tolist() == [0, 1, 0]


def test_labels_rarer_class_positive(tmp_path):
    p = write(tmp_path / "l.tsv", "id\ty\nA\tnormal\nB\ttumor\nC\tnormal\n")
    lab = ingest.load_labels(p)
    assert lab.positive_class_name == "tumor" and lab.labels.tolist() == [0, 1, 0]


def test_labels_explicit_positive(tmp_path):
    p = write(tmp_path / "l.tsv", "id\ty\nA\tnormal\nB\ttumor\nC\tnormal\n")
    assert ingest.load_labels(p, positive_class="normal").labels.tolist() == [1, 0, 1]


def test_labels_single_class(tmp_path):
    p = write(tmp_path / "l.tsv", "id\ty\nA\t1\nB\t1\n")
    with pytest.raises(DataError):
        ingest.load_labels(p)


def test_align_uses_label_order_and_intersection():
    a = FeatureMatrix("a", ["s3", "s1", "s2"], ["F"], [[3.0], [1.0], [2.0]])
    b = FeatureMatrix("b", ["s1", "s2", "s3", "s4"], ["G"], [[10.0], [20.0], [30.0], [40.0]])
    lab = LabelVector(["s2", "s1", "s3", "s5"], [1, 0, 0, 1])
    (ma, mb), lv = ingest.align_samples([a, b], lab)
    assert lv.sample_ids == ("s2", "s1", "s3")
    np.testing.assert_array_equal(ma.values[:, 0], [2, 1, 3])
    np.testing.assert_array_equal(mb.values[:, 0], [20, 10, 30])


def test_align_no_overlap():
    a = FeatureMatrix("a", ["x"], ["F"], [[1.0]])
    with pytest.raises(DataError):
        ingest.align_samples([a], LabelVector(["s1", "s2"], [0, 1]))


def test_gene_symbols():
    m = FeatureMatrix("e", ["s"], ["TP53", "?|100130426", "HLA-A", "tp53", "AADACL4@"],
                      np.zeros((1, 5)))
    kept, rejected = ingest.validate_gene_symbols(m)
    assert kept.feature_names == ("TP53", "HLA-A", "AADACL4@")
    assert rejected == ["?|100130426", "tp53"]


def test_gene_list(tmp_path):
    p = write(tmp_path / "g.txt", "# header\nBRCA1\nTP53  # note\n\nMISSING\n")
    genes = ingest.load_gene_list(p)
    assert genes == ["BRCA1", "TP53", "MISSING"]
    m = FeatureMatrix("e", ["s"], ["TP53", "BRCA1", "EGFR"], [[1.0, 2.0, 3.0]])
    assert ingest.restrict_to_gene_list(m, genes).feature_names == ("BRCA1", "TP53")


def test_gene_list_no_overlap():
    m = FeatureMatrix("e", ["s"], ["TP53"], [[1.0]])
    with pytest.raises(DataError):
        ingest.restrict_to_gene_list(m, ["EGFR"])


def test_matrix_shape_checked():
    with pytest.raises(DataError):
        FeatureMatrix("x", ["a"], ["F", "G"], [[1.0]])
