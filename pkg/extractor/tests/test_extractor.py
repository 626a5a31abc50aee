import os

import numpy as np
import pytest
from PIL import Image

import vitlca
from vitlca_extractor import ExtractionConfig, extract, select_subset
from vitlca_extractor.cli import main
from vitlca_extractor.writer import write_vlca


@pytest.fixture(scope="module")
def image_folder(tmp_path_factory):
    """Tiny two-class image-folder dataset of solid-color images."""
    root = tmp_path_factory.mktemp("images")
    rng = np.random.default_rng(0)
    for cls, color in (("red", (200, 30, 30)), ("blue", (30, 30, 200))):
        d = root / cls
        d.mkdir()
        for i in range(3):
            pixels = np.clip(
                np.asarray(color) + rng.integers(-20, 20, (32, 32, 3)), 0, 255
            ).astype(np.uint8)
            Image.fromarray(pixels).save(d / f"{i}.png")
    return str(root)


@pytest.fixture(scope="module")
def extracted(image_folder, tmp_path_factory):
    out = str(tmp_path_factory.mktemp("out") / "emb.vlca")
    config = ExtractionConfig(dataset="image-folder", out_path=out,
                              data_root=image_folder, weights="random",
                              batch_size=4, seed=7)
    extract(config)
    return out


def test_output_is_valid_vlca_with_768_dims(extracted):
    es = vitlca.load_embedding_set(extracted)
    assert es.n_dim == 768
    assert es.n_classes == 2
    assert len(es) == 6
    assert np.all(np.isfinite(es.vectors))
    assert sorted(np.bincount(es.labels).tolist()) == [3, 3]


def test_provenance_records_run_metadata(extracted):
    es = vitlca.load_embedding_set(extracted)
    for token in ("vit_b_16", "layer=final", "pool=cls", "resize224x224", "seed=7"):
        assert token in es.provenance


def test_extraction_is_deterministic(image_folder, tmp_path):
    outs = []
    for name in ("a.vlca", "b.vlca"):
        out = str(tmp_path / name)
        extract(ExtractionConfig(dataset="image-folder", out_path=out,
                                 data_root=image_folder, weights="random", seed=7))
        outs.append(open(out, "rb").read())
    assert outs[0] == outs[1]


def test_mean_pool_differs_from_cls(image_folder, tmp_path, extracted):
    out = str(tmp_path / "mean.vlca")
    extract(ExtractionConfig(dataset="image-folder", out_path=out,
                             data_root=image_folder, weights="random",
                             seed=7, pool="mean"))
    mean_es = vitlca.load_embedding_set(out)
    cls_es = vitlca.load_embedding_set(extracted)
    assert mean_es.n_dim == 768
    assert not np.array_equal(mean_es.vectors, cls_es.vectors)
    assert "pool=mean" in mean_es.provenance


def test_subset_selection_deterministic():
    a = select_subset(1000, 50, seed=3)
    b = select_subset(1000, 50, seed=3)
    c = select_subset(1000, 50, seed=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert len(set(a.tolist())) == 50
    assert np.all(np.diff(a) > 0)


def test_subset_full_and_oversized():
    assert np.array_equal(select_subset(10, None, 0), np.arange(10))
    assert np.array_equal(select_subset(10, 10, 0), np.arange(10))
    with pytest.raises(ValueError, match="exceeds"):
        select_subset(10, 11, 0)


def test_subset_applies_to_extraction(image_folder, tmp_path):
    out = str(tmp_path / "sub.vlca")
    extract(ExtractionConfig(dataset="image-folder", out_path=out,
                             data_root=image_folder, weights="random",
                             seed=7, subset_size=4))
    assert len(vitlca.load_embedding_set(out)) == 4


def test_writer_rejects_nonfinite(tmp_path):
    v = np.zeros((1, 4), dtype=np.float32)
    v[0, 0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        write_vlca(str(tmp_path / "x.vlca"), v, np.zeros(1), 1, "")


def test_writer_rejects_bad_label(tmp_path):
    with pytest.raises(ValueError, match="label"):
        write_vlca(str(tmp_path / "x.vlca"), np.zeros((1, 4), dtype=np.float32),
                   np.array([3]), 2, "")


def test_cli_end_to_end(image_folder, tmp_path, capsys):
    out = str(tmp_path / "cli.vlca")
    rc = main(["extract", "--dataset", "image-folder", "--data-root", image_folder,
               "--out", out, "--weights", "random", "--seed", "7"])
    assert rc == 0
    assert "written" in capsys.readouterr().out
    assert vitlca.load_embedding_set(out).n_dim == 768


def test_cli_missing_folder(tmp_path, capsys):
    rc = main(["extract", "--dataset", "image-folder", "--data-root",
               str(tmp_path / "missing"), "--out", str(tmp_path / "x.vlca"),
               "--weights", "random"])
    assert rc == 1


def _pretrained_available():
    hub = os.path.join(os.path.expanduser("~"), ".cache", "torch", "hub", "checkpoints")
    return os.path.isdir(hub) and any("vit_b_16" in f for f in os.listdir(hub))


@pytest.mark.skipif(not _pretrained_available(),
                    reason="pretrained ViT-B/16 weights not cached and no network "
                           "route to download them in this environment")
def test_cifar10_reduced_scale_accuracy(tmp_path):
    """End-to-end reduced-scale run: 5000-atom dictionary, 2000 test images,
    maxsum top-1 expected >= 0.85."""
    from vitlca.evaluate import RunConfig, evaluate
    from vitlca.lca import LcaParams, build_dictionary, compute_gramian

    train_path = str(tmp_path / "train.vlca")
    test_path = str(tmp_path / "test.vlca")
    extract(ExtractionConfig(dataset="cifar10", out_path=train_path, split="train",
                             data_root=str(tmp_path / "data"), subset_size=5000,
                             seed=0, download=True))
    extract(ExtractionConfig(dataset="cifar10", out_path=test_path, split="test",
                             data_root=str(tmp_path / "data"), subset_size=2000,
                             seed=0, download=True))
    train = vitlca.load_embedding_set(train_path)
    test = vitlca.load_embedding_set(test_path)
    d = build_dictionary(train)
    g = compute_gramian(d)
    report = evaluate(d, g, test, RunConfig(params=LcaParams()))
    print(f"maxsum top-1: {report.top1_accuracy_maxsum:.4f}, "
          f"measured M_hat: {report.mean_active_count:.1f}")
    assert report.top1_accuracy_maxsum >= 0.85
