from __future__ import annotations

import json
import subprocess
import sys

import pytest

from accent_forge.cli import main
from accent_forge.dsl import serialize_ruleset
from accent_forge.pipeline import BatchRecord, InvalidRecord, TtsRequest
from accent_forge.presets import preset_path, reference_ruleset


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def jsonl(path, rows):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows), encoding="utf-8")
    return path


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    assert "sp@1" in out and "in@1" in out and "default@1" in out


def test_transform_plain(capsys):
    assert run(capsys, "transform", "--accent", "sp", "θɹi")[:2] == (0, "sɹi\n")
    assert run(capsys, "transform", "--accent", "in", "θɹi")[:2] == (0, "t̪ɽi\n")
    assert run(capsys, "transform", "--accent", "sp", "--rules", "", "θɹi vɛɹi")[:2] == (0, "θɹi vɛɹi\n")
    assert run(capsys, "transform", "--accent", "none", "θɹi")[:2] == (0, "θɹi\n")


def test_transform_g2p(capsys):
    assert run(capsys, "transform", "--g2p", "three big stones")[:2] == (0, "sɹˈi bˈik estˈons\n")


def test_transform_durations_and_trace(capsys):
    code, out, _ = run(capsys, "transform", "stɔn", "--durations", "0.2,0.4,0.1,0.1", "--emit-trace")
    obj = json.loads(out)
    assert code == 0
    assert obj["phonemes"] == "eston"
    assert obj["durations"] == [0.1, 0.1, 0.4, 0.1, 0.1]
    assert obj["trace"]["ops"][0] == {"op": "insert", "out": 0, "rule": "sp3", "symbol": "e"}
    code, out, _ = run(capsys, "transform", "stɔn", "--durations", "0.2,0.4,0.1,0.1", "--no-align")
    assert out == "eston\n"


def test_transform_errors(capsys):
    code, _, err = run(capsys, "transform", "θɹx")
    assert code == 1 and "U+0078" in err
    code, _, err = run(capsys, "transform", "--accent", "sp", "--rules", "in1", "θɹi")
    assert code == 1 and "in1" in err
    code, _, err = run(capsys, "transform", "--accent", "nowhere.accentrules", "θɹi")
    assert code == 1


def test_transform_custom_rules_file(tmp_path, capsys):
    path = tmp_path / "mine.accentrules"
    path.write_text('ruleset "mine" inventory "default@1"\nrule "m1" "th-stopping" { θ -> t; ð -> d; }\n', encoding="utf-8")
    assert run(capsys, "transform", "--accent", str(path), "θɹi")[:2] == (0, "tɹi\n")
    src = jsonl(tmp_path / "in.jsonl", [{"utterance_id": "a", "ipa": "ðə"}])
    code, out, _ = run(capsys, "transform", "--accent", str(path), "--jsonl", str(src))
    obj = json.loads(out)
    assert obj["accent"] == "custom" and obj["ruleset_version"].startswith("mine@sha256:")


def test_batch_partial_failure(tmp_path, capsys):
    src = jsonl(
        tmp_path / "in.jsonl",
        [
            {"utterance_id": "a", "ipa": "stɔnz", "durations": [0.1, 0.1, 0.2, 0.1, 0.1]},
            {"utterance_id": "b", "text": "zorblax"},
            {"utterance_id": "c", "ipa": "θɹi", "text": "three"},
            {"utterance_id": "d", "ipa": "θɹi", "durations": [0.1]},
            {"utterance_id": "e", "text": "three"},
        ],
    )
    code, out, _ = run(capsys, "transform", "--jsonl", str(src))
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 2
    assert [r["utterance_id"] for r in rows] == ["a", "b", "c", "d", "e"]
    assert rows[0]["durations"] == [0.05, 0.05, 0.1, 0.2, 0.1, 0.1]
    assert [r.get("error") for r in rows] == [None, "oov-word", "invalid-record", "invalid-record", None]
    assert rows[3]["line"] == 4


def test_batch_no_align_omits_durations(tmp_path, capsys):
    src = jsonl(tmp_path / "in.jsonl", [{"utterance_id": "a", "ipa": "stɔnz", "durations": [0.1] * 5}])
    code, out, _ = run(capsys, "transform", "--jsonl", str(src), "--no-align", "--speaker", "af_heart")
    obj = json.loads(out)
    assert "durations" not in obj and obj["speaker_id"] == "af_heart"


def test_batch_malformed_line_aborts(tmp_path, capsys):
    src = tmp_path / "in.jsonl"
    src.write_text('{"utterance_id": "a", "ipa": "θɹi"}\n{oops\n{"utterance_id": "b", "ipa": "θɹi"}\n', encoding="utf-8")
    code, out, err = run(capsys, "transform", "--jsonl", str(src))
    assert code == 1
    assert "line 2" in err
    assert len(out.splitlines()) == 1


def test_batch_strength_is_reproducible(tmp_path, capsys):
    src = jsonl(tmp_path / "in.jsonl", [{"utterance_id": str(k), "ipa": "tɹit dɹɛd tɔt"} for k in range(50)])
    argv = ["transform", "--accent", "in", "--seed", "7", "--strength", "in1=0.5", "--jsonl", str(src)]
    first = run(capsys, *argv)[1]
    assert first == run(capsys, *argv)[1]
    row = json.loads(first.splitlines()[0])
    assert row["seed"] == 7 and row["strength"] == {"in1": 0.5}


def test_rules_commands(tmp_path, capsys):
    code, out, _ = run(capsys, "rules", "list", "sp")
    assert code == 0 and len([line for line in out.splitlines() if line.startswith("sp") and "\t" in line]) == 6
    assert run(capsys, "rules", "check", preset_path("in"))[0] == 0
    canonical = serialize_ruleset(reference_ruleset("sp"))
    path = tmp_path / "sp.accentrules"
    path.write_text(canonical, encoding="utf-8")
    assert run(capsys, "rules", "fmt", str(path))[1] == canonical


def test_rules_fmt_write_and_check_errors(tmp_path, capsys):
    path = tmp_path / "messy.accentrules"
    path.write_text('rule "x" "y"{a->e;context:word-final;}', encoding="utf-8")
    assert run(capsys, "rules", "fmt", "-w", str(path))[0] == 0
    assert path.read_text(encoding="utf-8") == 'ruleset "" inventory "default@1"\n\nrule "x" "y" {\n  context: word-final;\n  a -> e;\n}\n'
    bad = tmp_path / "bad.accentrules"
    bad.write_text('rule "x" "y" {\n  q -> e;\n}\n', encoding="utf-8")
    code, _, err = run(capsys, "rules", "check", str(bad))
    assert code == 1 and f"{bad}:2:3: error" in err


def test_g2p_and_tokenize(capsys):
    assert run(capsys, "g2p", "three")[1] == "θɹˈi\n"
    assert json.loads(run(capsys, "tokenize", "tʃeɪ")[1])["phonemes"] == ["tʃ", "eɪ"]


def test_score(tmp_path, capsys):
    ref_rows = [{"utterance_id": "u0", "text": " ".join(f"w{i}" for i in range(10))}]
    ref_rows += [{"utterance_id": f"u{k}", "text": " ".join(f"x{i}" for i in range(10))} for k in range(1, 10)]
    hyp_rows = [dict(r) for r in ref_rows]
    hyp_rows[0]["text"] = hyp_rows[0]["text"].replace("w3", "oops")
    ref = jsonl(tmp_path / "ref.jsonl", ref_rows)
    hyp = jsonl(tmp_path / "hyp.jsonl", list(reversed(hyp_rows)))
    code, out, _ = run(capsys, "score", str(ref), str(hyp))
    report = json.loads(out)
    assert code == 0
    assert report["aggregate"]["rate"] == pytest.approx(0.01)
    assert report["utterances"][0]["utterance_id"] == "u0"
    assert report["utterances"][0]["substitutions"] == 1
    assert json.loads(run(capsys, "score", str(ref), str(ref))[1])["aggregate"]["rate"] == 0.0
    jsonl(hyp, hyp_rows[1:])
    code, _, err = run(capsys, "score", str(ref), str(hyp))
    assert code == 1 and "'u0'" in err


def test_batch_record_and_request_validation():
    with pytest.raises(InvalidRecord):
        BatchRecord.from_json({"utterance_id": "a"})
    with pytest.raises(InvalidRecord):
        BatchRecord.from_json({"utterance_id": "", "ipa": "a"})
    with pytest.raises(InvalidRecord):
        BatchRecord.from_json({"utterance_id": "a", "ipa": "a", "durations": [float("nan")]})
    good = {"utterance_id": "a", "phonemes": "θɹi", "speaker_id": "s", "accent": "sp", "ruleset_version": "sp@1"}
    assert TtsRequest.from_json(good).to_json()["phonemes"] == "θɹi"
    with pytest.raises(InvalidRecord):
        TtsRequest.from_json({**good, "durations": [0.1, 0.2]})
    with pytest.raises(InvalidRecord):
        TtsRequest.from_json({**good, "seed": True})
    with pytest.raises(InvalidRecord):
        TtsRequest.from_json({**good, "schema": "other@9"})


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "accent_forge", "transform", "--accent", "sp", "vɛɹi"], capture_output=True, text=True, check=True
    ).stdout
    assert out == "beɾi\n"
