from importlib import resources
from pathlib import Path

import pytest

from corpusforge.config import load_config
from corpusforge.corpus import DocumentRecord, LanguageTag, Source, SourceKind


@pytest.fixture(scope="session")
def mini_dir() -> Path:
    return Path(str(resources.files("corpusforge").joinpath("data", "mini")))


@pytest.fixture(scope="session")
def mini_config(mini_dir):
    return load_config(mini_dir / "mini.ini")


def make_doc(text, lang="hi", doc_id=0, source=Source.WIKIPEDIA):
    return DocumentRecord(doc_id, LanguageTag.parse(lang), SourceKind(source), text)
