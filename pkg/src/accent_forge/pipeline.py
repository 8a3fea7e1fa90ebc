"""Batch records in, TTS requests out.

Everything here works one record at a time so that a JSONL stream of any
length runs in constant memory.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

from . import __version__
from .align import DEFAULT_POLICY, InsertionPolicy, align_durations
from .dsl import parse_ruleset_bytes
from .g2p import Lexicon, OovPolicy, fixture_lexicon, g2p
from .ipa import Inventory, Utterance, default_inventory, render, tokenize
from .presets import PRESET_VERSION, AccentId, builtin_ruleset
from .rules import ApplyOptions, RuleSet, apply_ruleset
from .trace import TransformTrace, trace_to_json

TTS_REQUEST_SCHEMA = "accent-forge/tts-request@1"
ERROR_SCHEMA = "accent-forge/error@1"
SCORE_SCHEMA = "accent-forge/score@1"

NO_ACCENT = "none"
CUSTOM_ACCENT = "custom"
DEFAULT_SPEAKERS = {AccentId.SP.value: "ef_dora", AccentId.IN.value: "hf_alpha", NO_ACCENT: "bm_fable", CUSTOM_ACCENT: "bm_fable"}


class PipelineError(ValueError):
    kind = "pipeline-error"


class InvalidRecord(PipelineError):
    kind = "invalid-record"


class MalformedJsonl(PipelineError):
    kind = "malformed-jsonl"

    def __init__(self, line_no: int, detail: str) -> None:
        self.line_no = line_no
        super().__init__(f"line {line_no}: {detail}")


class MissingId(PipelineError):
    kind = "missing-id"

    def __init__(self, utterance_id: str, where: str) -> None:
        self.utterance_id = utterance_id
        super().__init__(f"utterance {utterance_id!r} missing from {where}")


def _durations(value: object, what: str) -> tuple[float, ...] | None:
    if value is None:
        return None
    if not isinstance(value, list) or not all(isinstance(d, (int, float)) and not isinstance(d, bool) for d in value):
        raise InvalidRecord(f"{what} must be a list of numbers")
    out = tuple(float(d) for d in value)
    if any(not math.isfinite(d) or d < 0 for d in out):
        raise InvalidRecord(f"{what} must be finite and non-negative")
    return out


def _utterance_id(obj: Mapping) -> str:
    uid = obj.get("utterance_id")
    if not isinstance(uid, str) or not uid:
        raise InvalidRecord("utterance_id must be a non-empty string")
    return uid


@dataclass(frozen=True)
class BatchRecord:
    utterance_id: str
    text: str | None = None
    ipa: str | None = None
    durations: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if (self.text is None) == (self.ipa is None):
            raise InvalidRecord(f"{self.utterance_id}: exactly one of 'text' or 'ipa' is required")

    @classmethod
    def from_json(cls, obj: object) -> "BatchRecord":
        if not isinstance(obj, dict):
            raise InvalidRecord("record must be a JSON object")
        uid = _utterance_id(obj)
        text, ipa = obj.get("text"), obj.get("ipa")
        for name, v in (("text", text), ("ipa", ipa)):
            if v is not None and not isinstance(v, str):
                raise InvalidRecord(f"{uid}: {name!r} must be a string")
        return cls(uid, text, ipa, _durations(obj.get("durations"), "durations"))


@dataclass(frozen=True)
class TtsRequest:
    utterance_id: str
    phonemes: str
    speaker_id: str
    accent: str
    ruleset_version: str
    durations: tuple[float, ...] | None = None
    seed: int | None = None
    strength: Mapping[str, float] | None = None

    def validate(self, inventory: Inventory | None = None) -> None:
        if not self.utterance_id:
            raise InvalidRecord("utterance_id must be non-empty")
        if not self.speaker_id:
            raise InvalidRecord(f"{self.utterance_id}: speaker_id must be non-empty")
        if self.durations is not None:
            n = tokenize(self.phonemes, inventory).phoneme_count
            if n != len(self.durations):
                raise InvalidRecord(f"{self.utterance_id}: {len(self.durations)} durations for {n} phonemes")

    def to_json(self) -> dict:
        obj: dict = {
            "schema": TTS_REQUEST_SCHEMA,
            "utterance_id": self.utterance_id,
            "phonemes": self.phonemes,
            "speaker_id": self.speaker_id,
            "accent": self.accent,
            "ruleset_version": self.ruleset_version,
        }
        if self.durations is not None:
            obj["durations"] = list(self.durations)
        if self.seed is not None:
            obj["seed"] = self.seed
        if self.strength:
            obj["strength"] = dict(sorted(self.strength.items()))
        return obj

    @classmethod
    def from_json(cls, obj: object, inventory: Inventory | None = None) -> "TtsRequest":
        if not isinstance(obj, dict):
            raise InvalidRecord("request must be a JSON object")
        uid = _utterance_id(obj)
        schema = obj.get("schema", TTS_REQUEST_SCHEMA)
        if schema != TTS_REQUEST_SCHEMA:
            raise InvalidRecord(f"{uid}: unsupported schema {schema!r}")
        for key in ("phonemes", "speaker_id", "accent", "ruleset_version"):
            if not isinstance(obj.get(key), str):
                raise InvalidRecord(f"{uid}: {key!r} must be a string")
        seed = obj.get("seed")
        if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
            raise InvalidRecord(f"{uid}: seed must be an integer")
        strength = obj.get("strength")
        if strength is not None:
            if not isinstance(strength, dict) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) and 0 <= v <= 1 for v in strength.values()
            ):
                raise InvalidRecord(f"{uid}: strength must map rule ids to probabilities")
            strength = {str(k): float(v) for k, v in strength.items()}
        req = cls(
            uid,
            obj["phonemes"],
            obj["speaker_id"],
            obj["accent"],
            obj["ruleset_version"],
            _durations(obj.get("durations"), "durations"),
            seed,
            strength,
        )
        req.validate(inventory)
        return req


def error_record(utterance_id: str | None, exc: Exception, line_no: int | None = None) -> dict:
    kind = getattr(exc, "kind", None) or _kebab(type(exc).__name__)
    rec = {"schema": ERROR_SCHEMA, "utterance_id": utterance_id, "error": kind, "message": str(exc)}
    if line_no is not None:
        rec["line"] = line_no
    return rec


def _kebab(name: str) -> str:
    return "".join("-" + c.lower() if c.isupper() and i else c.lower() for i, c in enumerate(name))


@dataclass(frozen=True)
class AccentSource:
    """A resolved ``--accent`` value: preset id, rule file, or no accent."""

    label: str
    ruleset: RuleSet
    version: str

    @classmethod
    def resolve(cls, value: str, inventory: Inventory | None = None) -> "AccentSource":
        if value.lower() == NO_ACCENT:
            return cls(NO_ACCENT, RuleSet(NO_ACCENT, ()), NO_ACCENT)
        try:
            accent = AccentId.parse(value)
        except ValueError:
            path = Path(value)
            if not path.is_file():
                raise PipelineError(f"--accent must be sp, in, none, or an .accentrules file; got {value!r}") from None
            data = path.read_bytes()
            rs = parse_ruleset_bytes(data, inventory)
            return cls(CUSTOM_ACCENT, rs, f"{rs.name or path.stem}@sha256:{hashlib.sha256(data).hexdigest()[:12]}")
        return cls(accent.value, builtin_ruleset(accent), f"{accent.value}@{PRESET_VERSION}")


@dataclass
class TransformConfig:
    accent: AccentSource
    options: ApplyOptions = field(default_factory=ApplyOptions)
    align: bool | None = None  # None: align whenever durations are given
    policy: InsertionPolicy = DEFAULT_POLICY
    speaker_id: str | None = None
    emit_trace: bool = False
    lexicon: Lexicon | None = None
    oov: OovPolicy = OovPolicy.ERROR
    inventory: Inventory | None = None

    @property
    def speaker(self) -> str:
        return self.speaker_id or DEFAULT_SPEAKERS[self.accent.label]


@dataclass(frozen=True)
class TransformResult:
    utterance: Utterance
    trace: TransformTrace
    durations: tuple[float, ...] | None


def transform_utterance(u: Utterance, cfg: TransformConfig, durations: Iterable[float] | None = None) -> TransformResult:
    out, trace = apply_ruleset(cfg.accent.ruleset, u, cfg.options, cfg.inventory)
    projected = None
    if durations is not None and cfg.align is not False:
        durations = tuple(durations)
        if len(durations) != u.phoneme_count:
            raise InvalidRecord(f"{len(durations)} durations for {u.phoneme_count} source phonemes")
        projected = tuple(align_durations(trace, durations, cfg.policy))
    return TransformResult(out, trace, projected)


def source_utterance(rec: BatchRecord, cfg: TransformConfig) -> Utterance:
    if rec.ipa is not None:
        return tokenize(rec.ipa, cfg.inventory)
    return g2p(rec.text or "", cfg.lexicon or fixture_lexicon(), cfg.oov)


def transform_record(rec: BatchRecord, cfg: TransformConfig) -> dict:
    u = source_utterance(rec, cfg)
    res = transform_utterance(u, cfg, rec.durations)
    opts = cfg.options
    req = TtsRequest(
        rec.utterance_id,
        render(res.utterance, cfg.inventory),
        cfg.speaker,
        cfg.accent.label,
        cfg.accent.version,
        res.durations,
        opts.seed if opts.per_rule_probability else None,
        dict(opts.per_rule_probability) or None,
    )
    obj = req.to_json()
    if cfg.emit_trace:
        obj["trace"] = trace_to_json(res.trace)
    return obj


def read_jsonl(stream: IO[str]) -> Iterator[tuple[int, object]]:
    """Yield (line number, decoded value), skipping blank lines."""
    for line_no, line in enumerate(stream, 1):
        if not line.strip():
            continue
        try:
            yield line_no, json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedJsonl(line_no, e.msg) from None


def dump_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"


@dataclass
class BatchStats:
    ok: int = 0
    failed: int = 0


def run_batch(stream: IO[str], cfg: TransformConfig, out: IO[str]) -> BatchStats:
    """Transform a BatchRecord stream; bad records become inline error objects.

    Raises :class:`MalformedJsonl` on undecodable lines, after flushing the
    records that preceded it.
    """
    stats = BatchStats()
    for line_no, obj in read_jsonl(stream):
        uid = obj.get("utterance_id") if isinstance(obj, dict) and isinstance(obj.get("utterance_id"), str) else None
        try:
            result = transform_record(BatchRecord.from_json(obj), cfg)
        except ValueError as e:
            out.write(dump_line(error_record(uid, e, line_no)))
            stats.failed += 1
        else:
            out.write(dump_line(result))
            stats.ok += 1
    return stats


def version_string() -> str:
    presets = " ".join(f"{a.value}@{PRESET_VERSION}" for a in AccentId)
    return f"accent-forge {__version__} (presets {presets}; inventory {default_inventory().ref})"
