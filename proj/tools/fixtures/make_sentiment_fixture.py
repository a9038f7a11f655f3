#!/usr/bin/env python3
"""Writes tests/data/sentiment_sentences.json.

Each entry carries a sentence, its expected compound score and its class,
evaluated here in Python directly from the bundled lexicon files with the
published scoring rule. The C++ analyzer is tested against these values, so
this script deliberately shares no code with it.
"""
import json
import math
import pathlib
import re

ROOT = pathlib.Path(__file__).resolve().parents[2]
LEX = ROOT / "data" / "lexicon"

SENTENCES = [
    "good",
    "not good",
    "",
    "The street is clear and good, so I will keep walking.",
    "This is frustrating, a wall blocks the way again.",
    "Great, I found my goal at the Subway sign!",
    "I am not sure where to go and feel a bit lost.",
    "The plaza is very beautiful this morning.",
    "The plaza is not very beautiful tonight.",
    "I feel extremely happy to see the station.",
    "The crowd is slightly annoying but fine.",
    "Nothing here looks safe or friendly.",
    "I never feel comfortable in dark alleys.",
    "What a terrible, awful detour.",
    "The fence is in the way, which is bad.",
    "I can't find the entrance and I am worried.",
    "The snow makes the sidewalk dangerous and cold.",
    "A pleasant breeze and a nice view of the square.",
    "I am confused, the sign points nowhere useful.",
    "Wonderful, the coffee shop is right ahead.",
    "The train is cancelled, that is disappointing.",
    "I hope to meet my friend soon, that would be lovely.",
    "It isn't bad at all, just a little noisy.",
    "The quiet street feels calm and peaceful.",
    "Hmm, a bench to my left and a tree ahead.",
    "I am really really glad the path is open.",
    "The building ahead is tall and grey.",
    "Stuck again; this is hopeless and stupid.",
    "Not the worst route, but hardly the best either.",
    "I love this neighborhood, it's so welcoming.",
]


def load_tsv(path):
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        tok, val = line.split("\t")
        out[tok] = val
    return out


def load_list(path):
    return {
        line.strip()
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    }


VALENCE = {k: float(v) for k, v in load_tsv(LEX / "vader_subset.tsv").items()}
BOOSTERS = {k: int(v) for k, v in load_tsv(LEX / "boosters.tsv").items()}
NEGATORS = load_list(LEX / "negators.txt")


def tokens(text):
    out = []
    for raw in text.split():
        tok = []
        for i, c in enumerate(raw):
            if c.isascii() and c.isalnum():
                tok.append(c.lower())
            elif (c == "'" and 0 < i < len(raw) - 1 and raw[i - 1].isascii() and raw[i - 1].isalpha()
                  and raw[i + 1].isascii() and raw[i + 1].isalpha()):
                tok.append(c)
        if tok:
            out.append("".join(tok))
    return out


def compound(text):
    toks = tokens(text)
    total = 0.0
    for i, t in enumerate(toks):
        v = VALENCE.get(t, 0.0)
        if v == 0.0:
            continue
        sign = 1.0 if v > 0 else -1.0
        for back in (1, 2):
            if i - back >= 0:
                v += sign * 0.293 * BOOSTERS.get(toks[i - back], 0)
        if any(toks[i - back] in NEGATORS for back in (1, 2, 3) if i - back >= 0):
            v *= -0.74
        total += v
    return 0.0 if total == 0.0 else total / math.sqrt(total * total + 15.0)


def classify(c):
    if c >= 0.05:
        return "positive"
    if c <= -0.05:
        return "negative"
    return "neutral"


def main():
    rows = []
    for s in SENTENCES:
        c = compound(s)
        rows.append({"text": s, "compound": c, "class": classify(c)})
    out = ROOT / "tests" / "data" / "sentiment_sentences.json"
    out.write_text(json.dumps(rows, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    counts = {}
    for r in rows:
        counts[r["class"]] = counts.get(r["class"], 0) + 1
    print(f"wrote {out} ({len(rows)} sentences, {counts})")


if __name__ == "__main__":
    main()
