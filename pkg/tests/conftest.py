import random

import pytest

from humancorpus.attributes import ATTRIBUTE_NAMES
from humancorpus.config import PipelineConfig
from humancorpus.records import AttributeLabel, FaceDetection, SampleRecord


@pytest.fixture
def config():
    return PipelineConfig()


def make_record(rid="r1", faces=((10, 10, 200, 200, 0.99),),
                attr_ps=(0.9,) * 6, caption="", **kwargs):
    """Compact record builder: faces as (x, y, w, h, conf) tuples, attrs as
    probabilities assigned to the first attribute names."""
    face_objs = tuple(FaceDetection(bbox=f[:4], conf=f[4]) for f in faces)
    attrs = tuple(AttributeLabel(name=ATTRIBUTE_NAMES[i], p=p)
                  for i, p in enumerate(attr_ps))
    kwargs.setdefault("image", f"{rid}.jpg")
    return SampleRecord(id=rid, faces=face_objs, attrs=attrs,
                        caption=caption, **kwargs)


def random_corpus_row(rng: random.Random, idx: int):
    """One synthetic raw row with randomized gate-relevant values, including
    exact boundary cases."""
    n_faces = rng.randint(0, 3)
    faces = []
    for _ in range(n_faces):
        w = rng.choice([64, 100, 128, 128.5, 129, 200, 400])
        h = rng.choice([64, 100, 128, 128.5, 129, 200, 400])
        conf = rng.choice([0.5, 0.9, 0.98, 0.981, 0.99, 1.0])
        faces.append((w, h, conf))
    n_attrs = rng.randint(0, 12)
    ps = [rng.choice([0.2, 0.5, 0.85, 0.851, 0.9, 0.99]) for _ in range(n_attrs)]
    words = rng.choice([0, 3, 9, 10, 11, 40])
    text = " ".join(f"w{k}" for k in range(words))
    if rng.random() < 0.08:
        text = "I'm sorry, but I cannot describe this image. " + text
    return {"id": f"s{idx:05d}", "faces": faces, "attrs": ps, "text": text}
