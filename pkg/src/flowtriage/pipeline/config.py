"""Pipeline configuration: one JSON document wiring every stage together."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Invalid or incomplete pipeline configuration."""


@dataclass
class ProviderSpec:
    kind: str
    options: dict = field(default_factory=dict)


@dataclass
class PipelineConfig:
    schema_path: Path
    models_dir: Path
    kb_path: Path
    flows_path: Path | None = None
    stats_path: Path | None = None
    thesaurus_path: Path | None = None
    fallback_chunk_ids: tuple[str, ...] = ()
    dataset_name: str = "unspecified"
    top_k_features: int = 5
    retrieval_k: int = 5
    mode: str = "both"  # rag | vanilla | both
    seed: int = 0
    feature_override: tuple[str, ...] = ()
    embedding: ProviderSpec = field(default_factory=lambda: ProviderSpec("hash", {"width": 256, "seed": 13}))
    reranker: ProviderSpec = field(default_factory=lambda: ProviderSpec("jaccard"))
    generator: ProviderSpec = field(default_factory=lambda: ProviderSpec("template"))
    max_words: int = 700
    temperature: float = 0.0
    workers: int = 1
    out_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("rag", "vanilla", "both"):
            raise ConfigError(f"mode must be rag, vanilla, or both; got {self.mode!r}")
        if self.top_k_features < 1 or self.retrieval_k < 1:
            raise ConfigError("top_k_features and retrieval_k must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"configuration file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration is not valid JSON: {exc}") from None
        return cls.from_dict(doc, base=path.parent)

    @classmethod
    def from_dict(cls, doc: dict, base: Path = Path(".")) -> "PipelineConfig":
        def resolve(key: str, required: bool = False) -> Path | None:
            value = doc.get(key)
            if value is None:
                if required:
                    raise ConfigError(f"configuration missing required key: {key!r}")
                return None
            return (base / value).resolve() if not Path(value).is_absolute() else Path(value)

        providers = doc.get("providers", {})

        def provider(name: str, default_kind: str, defaults: dict | None = None) -> ProviderSpec:
            spec = dict(providers.get(name, {}))
            kind = spec.pop("kind", default_kind)
            merged = dict(defaults or {})
            merged.update(spec)
            return ProviderSpec(kind=kind, options=merged)

        config = cls(
            schema_path=resolve("schema", required=True),
            models_dir=resolve("models_dir", required=True),
            kb_path=resolve("kb", required=True),
            flows_path=resolve("flows"),
            stats_path=resolve("stats"),
            thesaurus_path=resolve("thesaurus"),
            fallback_chunk_ids=tuple(doc.get("fallback_chunk_ids", [])),
            dataset_name=doc.get("dataset", "unspecified"),
            top_k_features=int(doc.get("top_k_features", 5)),
            retrieval_k=int(doc.get("retrieval_k", 5)),
            mode=doc.get("mode", "both"),
            seed=int(doc.get("seed", 0)),
            feature_override=tuple(doc.get("feature_override", [])),
            embedding=provider("embedding", "hash", {"width": 256, "seed": 13}),
            reranker=provider("reranker", "jaccard"),
            generator=provider("generator", "template"),
            max_words=int(doc.get("max_words", 700)),
            temperature=float(doc.get("temperature", 0.0)),
            workers=int(doc.get("workers", 1)),
            out_dir=resolve("out_dir"),
        )
        return config

    def validate_artifacts(self) -> None:
        """Verify every referenced artifact exists before the run starts."""
        missing = []
        for name, path in (
            ("schema", self.schema_path),
            ("models_dir", self.models_dir),
            ("kb", self.kb_path),
        ):
            if not Path(path).exists():
                missing.append(f"{name}: {path}")
        for name, path in (
            ("flows", self.flows_path),
            ("stats", self.stats_path),
            ("thesaurus", self.thesaurus_path),
        ):
            if path is not None and not Path(path).exists():
                missing.append(f"{name}: {path}")
        if missing:
            raise ConfigError("missing configured artifacts: " + "; ".join(missing))
