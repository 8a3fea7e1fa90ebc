"""accent-forge command line."""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import ExitStack
from fractions import Fraction
from pathlib import Path
from typing import IO, Optional, Sequence

from .align import Borrow, InsertionPolicy
from .dsl import DslError, parse_document, serialize_ruleset
from .g2p import G2PError, OovPolicy, fixture_lexicon, g2p, load_lexicon
from .ipa import IpaError, default_inventory, render, tokenize
from .metrics import cer, corpus_report, wer
from .pipeline import (
    SCORE_SCHEMA,
    AccentSource,
    MalformedJsonl,
    MissingId,
    PipelineError,
    TransformConfig,
    dump_line,
    read_jsonl,
    run_batch,
    transform_utterance,
    version_string,
)
from .presets import AccentId, builtin_ruleset, preset_path
from .rules import ApplyOptions, RuleError
from .submit import DEFAULT_ATTEMPTS, DEFAULT_BACKOFF, DEFAULT_CONCURRENCY, Submitter, summary_json
from .trace import trace_to_json

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


def _strength(value: str) -> tuple[str, float]:
    rid, sep, p = value.partition("=")
    try:
        prob = float(p)
    except ValueError:
        prob = -1.0
    if not sep or not rid or not 0.0 <= prob <= 1.0:
        raise argparse.ArgumentTypeError(f"expected RULE_ID=P with P in [0, 1], got {value!r}")
    return rid, prob


def _rule_subset(value: str) -> frozenset[str]:
    return frozenset(r.strip() for r in value.split(",") if r.strip())


def _fraction(value: str) -> Fraction:
    try:
        f = Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None
    if not 0 < f < 1:
        raise argparse.ArgumentTypeError("fraction must be strictly between 0 and 1")
    return f


def _open_in(stack: ExitStack, path: str) -> IO[str]:
    return sys.stdin if path == "-" else stack.enter_context(open(path, encoding="utf-8"))


def _open_out(stack: ExitStack, path: str | None) -> IO[str]:
    if path in (None, "-"):
        return sys.stdout
    return stack.enter_context(open(path, "w", encoding="utf-8", newline="\n"))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="accent-forge", description="Rewrite US-English phonemes into accented variants.")
    p.add_argument("--version", action="version", version=version_string())
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", help="apply an accent to IPA, text or a JSONL batch")
    t.add_argument("input", nargs="?", help="IPA string (or text with --g2p); omit to read lines from stdin")
    t.add_argument("--accent", default="sp", help="sp, in, none, or a path to an .accentrules file (default: sp)")
    t.add_argument("--jsonl", metavar="PATH", help="BatchRecord JSONL input ('-' for stdin); emits TtsRequest JSONL")
    t.add_argument("-o", "--output", help="output file (default: stdout)")
    t.add_argument("--g2p", action="store_true", help="treat input as orthography and transcribe it first")
    t.add_argument("--lexicon", help="CMU-format lexicon (default: bundled fixture)")
    t.add_argument("--oov", choices=[o.value for o in OovPolicy], default="error")
    t.add_argument("--rules", type=_rule_subset, help="comma-separated rule ids to enable ('' for none)")
    t.add_argument("--strength", type=_strength, action="append", default=[], metavar="ID=P", help="per-rule firing probability")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--disable-tag", action="append", default=[], metavar="TAG", help="skip mapping entries with this tag")
    t.add_argument("--align", dest="align", action="store_true", default=None, help="project durations (default when given)")
    t.add_argument("--no-align", dest="align", action="store_false", help="omit durations from the output")
    t.add_argument("--durations", help="comma-separated source durations in seconds (plain mode)")
    t.add_argument("--borrow", choices=[b.value for b in Borrow], default="following")
    t.add_argument("--borrow-fraction", type=_fraction, default=Fraction(1, 2))
    t.add_argument("--speaker", help="speaker id for emitted requests")
    t.add_argument("--emit-trace", action="store_true", help="include the edit trace")

    r = sub.add_parser("rules", help="inspect, validate or format rule sets")
    r.add_argument("action", choices=["list", "check", "fmt"])
    r.add_argument("target", help="sp, in, or an .accentrules path")
    r.add_argument("-w", "--write", action="store_true", help="fmt: rewrite the file in place")

    g = sub.add_parser("g2p", help="transcribe orthography to IPA")
    g.add_argument("text")
    g.add_argument("--lexicon")
    g.add_argument("--oov", choices=[o.value for o in OovPolicy], default="error")

    k = sub.add_parser("tokenize", help="split an IPA string into phonemes")
    k.add_argument("ipa")

    s = sub.add_parser("score", help="WER/CER between two JSONL transcript files")
    s.add_argument("ref")
    s.add_argument("hyp")
    s.add_argument("--unit", choices=["word", "char"], default="word")
    s.add_argument("--field", default="text", help="transcript field name (default: text)")

    m = sub.add_parser("submit", help="send TtsRequest JSONL to a synthesis endpoint")
    m.add_argument("requests")
    m.add_argument("endpoint")
    m.add_argument("--out-dir", required=True)
    m.add_argument("--concurrency", type=int, default=DEFAULT_CONCURRENCY)
    m.add_argument("--attempts", type=int, default=DEFAULT_ATTEMPTS)
    m.add_argument("--backoff", type=float, default=DEFAULT_BACKOFF, help="first retry delay in seconds, doubled each time")
    m.add_argument("--timeout", type=float, default=30.0)
    return p


def _config(args: argparse.Namespace) -> TransformConfig:
    inv = default_inventory()
    accent = AccentSource.resolve(args.accent, inv)
    opts = ApplyOptions(
        enabled_rule_ids=args.rules,
        per_rule_probability=dict(args.strength),
        seed=args.seed,
        disabled_tags=frozenset(args.disable_tag),
    )
    opts.check_against(accent.ruleset)
    return TransformConfig(
        accent=accent,
        options=opts,
        align=args.align,
        policy=InsertionPolicy(Borrow(args.borrow), args.borrow_fraction),
        speaker_id=args.speaker,
        emit_trace=args.emit_trace,
        lexicon=load_lexicon(args.lexicon) if args.lexicon else None,
        oov=OovPolicy(args.oov),
        inventory=inv,
    )


def _transform_plain(line: str, args: argparse.Namespace, cfg: TransformConfig) -> str:
    if args.g2p:
        u = g2p(line, cfg.lexicon or fixture_lexicon(), cfg.oov)
    else:
        u = tokenize(line, cfg.inventory)
    durations = [float(d) for d in args.durations.split(",")] if args.durations else None
    res = transform_utterance(u, cfg, durations)
    text = render(res.utterance, cfg.inventory)
    if not args.emit_trace and res.durations is None:
        return text + "\n"
    obj: dict = {"phonemes": text}
    if res.durations is not None:
        obj["durations"] = list(res.durations)
    if args.emit_trace:
        obj["trace"] = trace_to_json(res.trace)
    return dump_line(obj)


def cmd_transform(args: argparse.Namespace) -> int:
    cfg = _config(args)
    with ExitStack() as stack:
        out = _open_out(stack, args.output)
        if args.jsonl:
            if args.input is not None:
                raise PipelineError("give either an input string or --jsonl, not both")
            stats = run_batch(_open_in(stack, args.jsonl), cfg, out)
            return EXIT_PARTIAL if stats.failed else EXIT_OK
        lines = [args.input] if args.input is not None else (ln.rstrip("\n") for ln in sys.stdin)
        failed = 0
        for line in lines:
            if not line.strip() and args.input is None:
                continue
            try:
                out.write(_transform_plain(line, args, cfg))
            except ValueError as e:
                if args.input is not None:
                    raise
                print(f"accent-forge: {e}", file=sys.stderr)
                failed += 1
        return EXIT_PARTIAL if failed else EXIT_OK


def _load_rules_target(target: str):
    try:
        accent = AccentId.parse(target)
    except ValueError:
        return Path(target), Path(target).read_text(encoding="utf-8")
    return Path(preset_path(accent)), builtin_ruleset(accent)


def cmd_rules(args: argparse.Namespace) -> int:
    path, loaded = _load_rules_target(args.target)
    if isinstance(loaded, str):
        doc = parse_document(loaded)
        for d in doc.diagnostics:
            print(f"{path}:{d.line}:{d.column}: {d.severity}: {d.message}", file=sys.stderr)
        if not doc.ok:
            return EXIT_ERROR
        rs, text = doc.parsed, loaded
    else:
        rs, text = loaded, path.read_text(encoding="utf-8")

    if args.action == "list":
        print(f"{rs.name} ({len(rs.rules)} rules, inventory {rs.inventory_ref})")
        for rule in rs.rules:
            print(f"{rule.id}\t{rule.context.value}\t{len(rule.entries)} mappings\t{rule.name}")
    elif args.action == "check":
        print(f"{path}: ok ({len(rs.rules)} rules)")
    else:
        canonical = serialize_ruleset(rs)
        if args.write:
            if canonical != text:
                path.write_text(canonical, encoding="utf-8")
        else:
            sys.stdout.write(canonical)
    return EXIT_OK


def cmd_g2p(args: argparse.Namespace) -> int:
    lex = load_lexicon(args.lexicon) if args.lexicon else fixture_lexicon()
    print(render(g2p(args.text, lex, OovPolicy(args.oov))))
    return EXIT_OK


def cmd_tokenize(args: argparse.Namespace) -> int:
    u = tokenize(args.ipa)
    words = [w.oov and f"<{w.oov}>" or " ".join(w.phonemes) for w in u.words]
    print(json.dumps({"phonemes": list(u.phonemes), "words": words, "render": render(u)}, ensure_ascii=False))
    return EXIT_OK


def _transcripts(path: str, field: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, obj in read_jsonl(f):
            if not isinstance(obj, dict) or not isinstance(obj.get("utterance_id"), str):
                raise MalformedJsonl(line_no, "expected an object with a string utterance_id")
            if not isinstance(obj.get(field), str):
                raise MalformedJsonl(line_no, f"missing string field {field!r}")
            if obj["utterance_id"] in out:
                raise MalformedJsonl(line_no, f"duplicate utterance_id {obj['utterance_id']!r}")
            out[obj["utterance_id"]] = obj[field]
    return out


def score_files(ref_path: str, hyp_path: str, unit: str = "word", field: str = "text") -> dict:
    """Per-utterance reports plus a pooled aggregate (total edits / total reference length)."""
    ref, hyp = _transcripts(ref_path, field), _transcripts(hyp_path, field)
    for uid in ref:
        if uid not in hyp:
            raise MissingId(uid, hyp_path)
    for uid in hyp:
        if uid not in ref:
            raise MissingId(uid, ref_path)
    measure = wer if unit == "word" else cer
    reports = {uid: measure(ref[uid], hyp[uid]) for uid in ref}
    return {
        "schema": SCORE_SCHEMA,
        "unit": unit,
        "utterances": [{"utterance_id": uid, **r.to_json()} for uid, r in reports.items()],
        "aggregate": corpus_report(reports.values()).to_json(),
    }


def cmd_score(args: argparse.Namespace) -> int:
    print(json.dumps(score_files(args.ref, args.hyp, args.unit, args.field), ensure_ascii=False, indent=2))
    return EXIT_OK


def cmd_submit(args: argparse.Namespace) -> int:
    with Submitter(
        args.endpoint,
        args.out_dir,
        concurrency=args.concurrency,
        attempts=args.attempts,
        backoff=args.backoff,
        timeout=args.timeout,
    ) as sub, open(args.requests, encoding="utf-8") as f:
        summary = sub.run(f)
    print(summary_json(summary))
    return EXIT_ERROR if summary.failed else EXIT_OK


COMMANDS = {
    "transform": cmd_transform,
    "rules": cmd_rules,
    "g2p": cmd_g2p,
    "tokenize": cmd_tokenize,
    "score": cmd_score,
    "submit": cmd_submit,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (PipelineError, DslError, RuleError, IpaError, G2PError, ValueError, OSError) as e:
        print(f"accent-forge: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
