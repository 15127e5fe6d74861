import pathlib

import pytest

from bigengine.bigraph import Control, Signature

MODELS = pathlib.Path(__file__).resolve().parent.parent / "models"


@pytest.fixture
def models_dir():
    return MODELS


@pytest.fixture
def building_sig():
    return Signature([
        Control("Building", 0),
        Control("Floor", 0),
        Control("Room", 0),
        Control("Camera", 0),
        Control("Adult", 0, atomic=True),
        Control("Child", 0, atomic=True),
        Control("Device", 1, atomic=True),
    ])


def model_source(name: str) -> str:
    return (MODELS / name).read_text(encoding="utf-8")
