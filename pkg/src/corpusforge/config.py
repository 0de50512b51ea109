"""Pipeline configuration: an INI file read with configparser.

Sections::

    [pipeline]   out, seed, alpha, plan_source, on_error
    [vocab]      target_size, smoothing_exponent, min_word_frequency, max_word_length
    [instances]  max_seq_len, mask_rate, mask_token_frac, random_frac, keep_frac, max_predictions
    [translit]   enabled, tables (comma separated TSV paths; empty = bundled), exclude
    [corpus NAME]    path, lang, source   (lang/source default to the file name pattern)
    [parallel NAME]  path, lang           (native<TAB>english lines)

Relative paths resolve against the directory holding the config file. Without an
``out`` key the output directory is ``./out`` relative to the working directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import CorpusError, LanguageTag, Source, SourceKind, parse_corpus_filename
from .instances import InstanceConfig
from .sampler import DEFAULT_ALPHA, _check_alpha
from .translit import DEFAULT_EXCLUDED
from .vocab import VocabTrainConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusDecl:
    name: str
    path: Path
    lang: LanguageTag
    source: SourceKind


@dataclass(frozen=True)
class ParallelDecl:
    name: str
    path: Path
    lang: LanguageTag


@dataclass(frozen=True)
class PipelineConfig:
    corpora: tuple[CorpusDecl, ...] = ()
    parallel: tuple[ParallelDecl, ...] = ()
    out: Path = Path("out")
    seed: int = 12345
    alpha: float = DEFAULT_ALPHA
    plan_source: Source = Source.WIKIPEDIA
    on_error: str = "abort"
    vocab: VocabTrainConfig = field(default_factory=VocabTrainConfig)
    instances: InstanceConfig = field(default_factory=InstanceConfig)
    translit_enabled: bool = True
    translit_tables: tuple[Path, ...] = ()
    translit_exclude: frozenset[str] = DEFAULT_EXCLUDED

    def __post_init__(self):
        try:
            _check_alpha(self.alpha)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.on_error not in ("skip", "abort"):
            raise ConfigError(f"on_error must be skip or abort, got {self.on_error!r}")

    def missing_paths(self) -> list[Path]:
        paths = [d.path for d in self.corpora] + [d.path for d in self.parallel]
        paths += list(self.translit_tables)
        return [p for p in paths if not p.exists()]

    def with_overrides(self, *, seed=None, alpha=None, out=None) -> PipelineConfig:
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=seed, instances=replace(cfg.instances, seed=seed))
        if alpha is not None:
            cfg = replace(cfg, alpha=alpha)
        if out is not None:
            cfg = replace(cfg, out=Path(out))
        return cfg


def _split_list(raw: str) -> list[str]:
    return [x.strip() for x in raw.replace("\n", ",").split(",") if x.strip()]


def parse_config(text: str, base_dir: Path | str = ".") -> PipelineConfig:
    base = Path(base_dir)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    def resolve(raw: str) -> Path:
        p = Path(raw).expanduser()
        return p if p.is_absolute() else base / p

    try:
        pipe = cp["pipeline"] if cp.has_section("pipeline") else {}
        seed = int(pipe.get("seed", 12345))
        kwargs = dict(
            out=resolve(pipe["out"]) if "out" in pipe else Path("out"),
            seed=seed,
            alpha=float(pipe.get("alpha", DEFAULT_ALPHA)),
            plan_source=Source.parse(pipe.get("plan_source", "wikipedia")),
            on_error=pipe.get("on_error", "abort"),
        )
        if cp.has_section("vocab"):
            v = cp["vocab"]
            kwargs["vocab"] = VocabTrainConfig(
                target_size=v.getint("target_size", 8000),
                smoothing_exponent=v.getfloat("smoothing_exponent", 1.0),
                min_word_frequency=v.getfloat("min_word_frequency", 1),
                max_word_length=v.getint("max_word_length", 100),
            )
        inst = cp["instances"] if cp.has_section("instances") else {}
        max_pred = inst.get("max_predictions")
        kwargs["instances"] = InstanceConfig(
            max_seq_len=int(inst.get("max_seq_len", 512)),
            mask_rate=float(inst.get("mask_rate", 0.15)),
            mask_token_frac=float(inst.get("mask_token_frac", 0.8)),
            random_frac=float(inst.get("random_frac", 0.1)),
            keep_frac=float(inst.get("keep_frac", 0.1)),
            seed=seed,
            max_predictions=int(max_pred) if max_pred else None,
        )
        if cp.has_section("translit"):
            t = cp["translit"]
            kwargs["translit_enabled"] = t.getboolean("enabled", True)
            kwargs["translit_tables"] = tuple(resolve(p) for p in _split_list(t.get("tables", "")))
            if "exclude" in t:
                kwargs["translit_exclude"] = frozenset(_split_list(t["exclude"]))

        corpora, parallel = [], []
        for name in cp.sections():
            kind, _, label = name.partition(" ")
            sec = cp[name]
            if kind == "corpus":
                if "path" not in sec:
                    raise ConfigError(f"[{name}] needs a path")
                path = resolve(sec["path"])
                if "lang" in sec and "source" in sec:
                    lang, source = LanguageTag.parse(sec["lang"]), SourceKind.of(sec["source"], label)
                else:
                    file_lang, file_source = parse_corpus_filename(path)
                    lang = LanguageTag.parse(sec["lang"]) if "lang" in sec else file_lang
                    source = SourceKind.of(sec.get("source", str(file_source)), label)
                if source.kind.is_parallel:
                    raise ConfigError(f"[{name}] parallel data belongs in a [parallel ...] section")
                corpora.append(CorpusDecl(label or path.name, path, lang, source))
            elif kind == "parallel":
                if "path" not in sec or "lang" not in sec:
                    raise ConfigError(f"[{name}] needs path and lang")
                parallel.append(ParallelDecl(label or sec["path"], resolve(sec["path"]),
                                             LanguageTag.parse(sec["lang"])))
            elif kind not in ("pipeline", "vocab", "instances", "translit"):
                raise ConfigError(f"unknown section [{name}]")
        return PipelineConfig(corpora=tuple(corpora), parallel=tuple(parallel), **kwargs)
    except ConfigError:
        raise
    except (ValueError, CorpusError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, path.parent)
