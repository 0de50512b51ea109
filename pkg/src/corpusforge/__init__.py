"""Data-side pipeline for multilingual Indic encoder pretraining.

Corpus ingestion and accounting, exponential upsampling, rule-based
romanization, WordPiece vocabulary training, and MLM/TLM instance records.
"""

from .corpus import DocumentRecord, LanguageTag, ParallelPair, Source, count_tokens, ingest
from .instances import InstanceConfig, TrainingInstance, read_records, write_records
from .sampler import build_plan, materialize, multiplier
from .translit import RomanizationTable, romanize
from .vocab import Vocabulary, VocabTrainConfig, detokenize, tokenize, train_vocab

__version__ = "0.1.0"

__all__ = [
    "DocumentRecord", "InstanceConfig", "LanguageTag", "ParallelPair", "RomanizationTable", "Source",
    "TrainingInstance", "VocabTrainConfig", "Vocabulary", "build_plan", "count_tokens", "detokenize",
    "ingest", "materialize", "multiplier", "read_records", "romanize", "tokenize", "train_vocab",
    "write_records",
]
