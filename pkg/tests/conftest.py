"""Shared fixtures: tiny synthetic datasets written to disk."""

import numpy as np
import pytest
from PIL import Image

from afva import external, pipeline


def save_rgb_png(path, array_uint8):
    Image.fromarray(array_uint8.astype("uint8"), mode="RGB").save(path, format="PNG")


def random_probs(rng, concentration=0.05):
    return rng.dirichlet(np.full(1000, concentration))


def build_dataset(
    root,
    n_records,
    seed=0,
    image_size=12,
    labels="random",
    tags=("calm", "sunny"),
    keyword="serene",
):
    """Write images, object-probability files, and semantic maps under
    ``root`` and return the corresponding records.

    labels: "random", "object" (target driven by the object block), a
    callable rng->(v, a), or None for unlabeled records.
    """
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_records):
        image_path = root / f"img{i:03d}.png"
        save_rgb_png(image_path, rng.integers(0, 256, size=(image_size, image_size, 3)))

        if labels == "object":
            # One smooth, high-variance coordinate carries the signal; the
            # label is exactly affine in it.
            lead = float(rng.uniform(0.05, 0.95))
            probs = np.concatenate(
                [[lead], rng.dirichlet(np.ones(999)) * (1.0 - lead)]
            )
        else:
            probs = random_probs(rng)
        object_path = root / f"obj{i:03d}.txt"
        external.save_object_feature(
            external.ObjectFeature(probs=probs, source="vgg16"), object_path
        )

        semantic_path = root / f"sem{i:03d}.png"
        Image.fromarray(
            rng.integers(0, 150, size=(8, 8)).astype("uint8"), mode="L"
        ).save(semantic_path, format="PNG")

        if labels is None:
            label = None
        elif labels == "object":
            label = pipeline.VaLabel(
                valence=1.0 + 8.0 * probs[0], arousal=9.0 - 8.0 * probs[0]
            )
        elif labels == "random":
            label = pipeline.VaLabel(
                valence=float(rng.uniform(1, 9)), arousal=float(rng.uniform(1, 9))
            )
        else:
            v, a = labels(rng)
            label = pipeline.VaLabel(valence=v, arousal=a)

        records.append(
            pipeline.DatasetRecord(
                id=f"rec{i:03d}",
                image_path=str(image_path),
                object_feature_path={"vgg16": str(object_path)},
                semantic_map_path=str(semantic_path),
                label=label,
                keyword=keyword,
                tags=tags,
            )
        )
    return records


@pytest.fixture
def dataset_dir(tmp_path):
    return tmp_path


@pytest.fixture
def small_manifest(tmp_path):
    records = build_dataset(tmp_path, n_records=3, seed=11)
    manifest = tmp_path / "manifest.jsonl"
    pipeline.write_manifest(records, manifest)
    return manifest, records
