"""Frozen ViT-B/16 embedding extraction over image datasets.

Runs the pretrained encoder in inference mode, takes the final-layer
classification-token output (length 768, before any head), and writes
the records with dataset labels into a ".vlca" file.  Everything about
the run (model id, weights, layer, pooling, preprocessing constants,
subset seed) is recorded in the file's provenance string.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torchvision import datasets, transforms
from torchvision.models import ViT_B_16_Weights, vit_b_16

from .writer import write_vlca

# standard ImageNet normalization constants, recorded in provenance
IMAGE_SIZE = 224
NORM_MEAN = (0.485, 0.456, 0.406)
NORM_STD = (0.229, 0.224, 0.225)

DATASETS = ("cifar10", "cifar100", "imagenet-val", "image-folder")


@dataclass
class ExtractionConfig:
    dataset: str
    out_path: str
    split: str = "train"
    data_root: str = "./data"
    subset_size: int | None = None
    seed: int = 0
    batch_size: int = 32
    device: str = "cpu"
    pool: str = "cls"           # cls | mean
    weights: str = "pretrained"  # pretrained | random (random: fixed-seed init, for tests)
    download: bool = False

    def validate(self) -> None:
        if self.dataset not in DATASETS:
            raise ValueError(f"unknown dataset {self.dataset!r}; choose from {DATASETS}")
        if self.pool not in ("cls", "mean"):
            raise ValueError(f"pool must be 'cls' or 'mean', got {self.pool!r}")
        if self.weights not in ("pretrained", "random"):
            raise ValueError(f"weights must be 'pretrained' or 'random', got {self.weights!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.subset_size is not None and self.subset_size < 1:
            raise ValueError("subset_size must be >= 1")


def build_transform() -> transforms.Compose:
    return transforms.Compose([
        transforms.Resize((IMAGE_SIZE, IMAGE_SIZE)),
        transforms.ToTensor(),
        transforms.Normalize(NORM_MEAN, NORM_STD),
    ])


def load_dataset(config: ExtractionConfig):
    tf = build_transform()
    if config.dataset == "cifar10":
        return datasets.CIFAR10(config.data_root, train=config.split == "train",
                                transform=tf, download=config.download), 10
    if config.dataset == "cifar100":
        return datasets.CIFAR100(config.data_root, train=config.split == "train",
                                 transform=tf, download=config.download), 100
    if config.dataset == "imagenet-val":
        ds = datasets.ImageNet(config.data_root, split="val", transform=tf)
        return ds, 1000
    ds = datasets.ImageFolder(config.data_root, transform=tf)
    return ds, len(ds.classes)


def load_model(config: ExtractionConfig) -> torch.nn.Module:
    if config.weights == "pretrained":
        model = vit_b_16(weights=ViT_B_16_Weights.IMAGENET1K_V1)
    else:
        # deterministic random init; only meaningful for pipeline tests
        torch.manual_seed(config.seed)
        model = vit_b_16(weights=None)
    model.eval()
    return model.to(config.device)


@torch.no_grad()
def token_embeddings(model, batch: torch.Tensor, pool: str) -> torch.Tensor:
    """Final encoder-layer token embeddings, before the classification head."""
    x = model._process_input(batch)
    cls = model.class_token.expand(x.shape[0], -1, -1)
    x = torch.cat([cls, x], dim=1)
    x = model.encoder(x)
    if pool == "cls":
        return x[:, 0]
    return x[:, 1:].mean(dim=1)


def select_subset(n_total: int, subset_size: int | None, seed: int) -> np.ndarray:
    """Seed-deterministic duplicate-free index selection, ascending order."""
    if subset_size is None or subset_size >= n_total:
        if subset_size is not None and subset_size > n_total:
            raise ValueError(f"subset_size {subset_size} exceeds dataset size {n_total}")
        return np.arange(n_total)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_total, size=subset_size, replace=False))


def provenance_string(config: ExtractionConfig, n_records: int) -> str:
    return (
        f"model=torchvision/vit_b_16 weights={config.weights} layer=final pool={config.pool} "
        f"preprocessing=resize{IMAGE_SIZE}x{IMAGE_SIZE},normalize(mean={NORM_MEAN},std={NORM_STD}) "
        f"dataset={config.dataset} split={config.split} subset={n_records} seed={config.seed}"
    )


def extract(config: ExtractionConfig) -> str:
    """Run the extraction and write the ".vlca" file; returns the output path."""
    config.validate()
    dataset, n_classes = load_dataset(config)
    indices = select_subset(len(dataset), config.subset_size, config.seed)
    model = load_model(config)

    vectors = np.empty((len(indices), 768), dtype=np.float32)
    labels = np.empty(len(indices), dtype=np.uint32)
    for start in range(0, len(indices), config.batch_size):
        chunk = indices[start : start + config.batch_size]
        images, targets = zip(*(dataset[int(i)] for i in chunk))
        batch = torch.stack(images).to(config.device)
        emb = token_embeddings(model, batch, config.pool)
        vectors[start : start + len(chunk)] = emb.cpu().numpy().astype(np.float32)
        labels[start : start + len(chunk)] = np.asarray(targets, dtype=np.uint32)

    write_vlca(config.out_path, vectors, labels, n_classes,
               provenance_string(config, len(indices)))
    return config.out_path
