#!/usr/bin/env python3
"""Regenerate the bundled toy fixture under tests/fixtures/toy.

The source side is a small English-like grammar; the target side is a
word-by-word pseudo-language that puts adjectives after nouns. Embeddings are
topic centre + POS centre + noise, so cosine >= 0.5 roughly means "same topic".
Rare words occur once in the parallel corpus but regularly in the monolingual
corpora, which is what lets them survive the LM ratio test.

Usage: make_toy_fixture.py [output_dir]
"""

import math
import random
import sys
from pathlib import Path

SEED = 20240611
DIM = 12
PARALLEL_PAIRS = 240
MONO_SENTENCES = 3000

FUNCTION = {"the": "DET", "a": "DET", "in": "ADP", "with": "ADP", "we": "PRON", "is": "AUX"}

# (surface, pos, number, topic)
FREQUENT = [
    ("book", "NOUN", "Sing", "doc"), ("letter", "NOUN", "Sing", "doc"), ("report", "NOUN", "Sing", "doc"),
    ("map", "NOUN", "Sing", "doc"), ("note", "NOUN", "Sing", "doc"),
    ("books", "NOUN", "Plur", "doc"), ("letters", "NOUN", "Plur", "doc"), ("notes", "NOUN", "Plur", "doc"),
    ("dog", "NOUN", "Sing", "animal"), ("cat", "NOUN", "Sing", "animal"), ("horse", "NOUN", "Sing", "animal"),
    ("bird", "NOUN", "Sing", "animal"),
    ("dogs", "NOUN", "Plur", "animal"), ("cats", "NOUN", "Plur", "animal"), ("birds", "NOUN", "Plur", "animal"),
    ("apple", "NOUN", "Sing", "food"), ("bread", "NOUN", "Sing", "food"), ("cheese", "NOUN", "Sing", "food"),
    ("soup", "NOUN", "Sing", "food"),
    ("apples", "NOUN", "Plur", "food"), ("cakes", "NOUN", "Plur", "food"),
    ("knife", "NOUN", "Sing", "tool"), ("rope", "NOUN", "Sing", "tool"), ("saw", "NOUN", "Sing", "tool"),
    ("lamp", "NOUN", "Sing", "tool"),
    ("knives", "NOUN", "Plur", "tool"), ("ropes", "NOUN", "Plur", "tool"),
    ("house", "NOUN", "Sing", "place"), ("garden", "NOUN", "Sing", "place"), ("market", "NOUN", "Sing", "place"),
    ("school", "NOUN", "Sing", "place"), ("river", "NOUN", "Sing", "place"),
    ("reads", "VERB", "Sing", "doc"), ("read", "VERB", "Plur", "doc"),
    ("writes", "VERB", "Sing", "doc"), ("write", "VERB", "Plur", "doc"),
    ("eats", "VERB", "Sing", "food"), ("eat", "VERB", "Plur", "food"),
    ("carries", "VERB", "Sing", "tool"), ("carry", "VERB", "Plur", "tool"),
    ("sees", "VERB", "Sing", None), ("see", "VERB", "Plur", None),
    ("finds", "VERB", "Sing", None), ("find", "VERB", "Plur", None),
    ("keeps", "VERB", "Sing", None), ("keep", "VERB", "Plur", None),
    ("sells", "VERB", "Sing", None), ("sell", "VERB", "Plur", None),
    ("big", "ADJ", None, None), ("small", "ADJ", None, None), ("old", "ADJ", None, None),
    ("new", "ADJ", None, None), ("red", "ADJ", None, None), ("heavy", "ADJ", None, None),
    ("fresh", "ADJ", None, "food"), ("wild", "ADJ", None, "animal"), ("printed", "ADJ", None, "doc"),
    ("sharp", "ADJ", None, "tool"),
    ("song", "NOUN", "Sing", "music"), ("drums", "NOUN", "Plur", "music"),
    ("plays", "VERB", "Sing", "music"), ("play", "VERB", "Plur", "music"),
]

# Topics that are scarce in the parallel corpus (relative sampling weight), so
# their rare words have few on-topic candidates and the gates actually bind.
SPARSE_TOPICS = {"music": 0.5}

RARE = [
    ("ledger", "NOUN", "Sing", "doc"), ("journal", "NOUN", "Sing", "doc"), ("pamphlet", "NOUN", "Sing", "doc"),
    ("manuscript", "NOUN", "Sing", "doc"), ("ledgers", "NOUN", "Plur", "doc"), ("journals", "NOUN", "Plur", "doc"),
    ("fox", "NOUN", "Sing", "animal"), ("wolf", "NOUN", "Sing", "animal"), ("otter", "NOUN", "Sing", "animal"),
    ("foxes", "NOUN", "Plur", "animal"),
    ("mango", "NOUN", "Sing", "food"), ("walnut", "NOUN", "Sing", "food"), ("plums", "NOUN", "Plur", "food"),
    ("chisel", "NOUN", "Sing", "tool"), ("wrench", "NOUN", "Sing", "tool"), ("chisels", "NOUN", "Plur", "tool"),
    ("harbor", "NOUN", "Sing", "place"), ("meadow", "NOUN", "Sing", "place"),
    ("scribbles", "VERB", "Sing", "doc"), ("devours", "VERB", "Sing", "food"),
    ("ancient", "ADJ", None, None), ("tiny", "ADJ", None, None),
    ("violin", "NOUN", "Sing", "music"), ("flute", "NOUN", "Sing", "music"), ("trumpet", "NOUN", "Sing", "music"),
    ("cellos", "NOUN", "Plur", "music"), ("hums", "VERB", "Sing", "music"),
]

# Singletons the validity filters must drop. "gizmo" has neither a vector nor
# an annotation.
INVALID_RARE = ["1987", "!", "gizmo"]

# (source term, number, topic, in_corpus)
DICTIONARY = [
    ("atlas", "Sing", "doc", False), ("diary", "Sing", "doc", False), ("parrot", "Sing", "animal", False),
    ("rabbit", "Sing", "animal", False), ("lemon", "Sing", "food", False), ("onion", "Sing", "food", False),
    ("hammer", "Sing", "tool", False), ("ladder", "Sing", "tool", False), ("castle", "Sing", "place", False),
    ("bridge", "Sing", "place", False), ("poems", "Plur", "doc", False), ("kittens", "Plur", "animal", False),
    ("tomatoes", "Plur", "food", False), ("nails", "Plur", "tool", False), ("villages", "Plur", "place", False),
    ("annual report", "Sing", "doc", False), ("tax form", "Sing", "doc", False),
    ("fishing boat", "Sing", "tool", False), ("olive oil", "Sing", "food", False),
    ("city hall", "Sing", "place", False), ("guide dog", "Sing", "animal", False),
    ("bank statement", "Sing", "doc", False), ("apple pie", "Sing", "food", False),
    ("paper map", "Sing", "doc", False), ("garden shed", "Sing", "place", False),
    ("book", "Sing", "doc", True), ("cat", "Sing", "animal", True), ("bread", "Sing", "food", True),
    ("lamp", "Sing", "tool", True), ("river", "Sing", "place", True),
    ("quasar", "Sing", "place", False), ("solar quasar", "Sing", "place", False),
]

# Modifier tokens that only occur inside multi-word dictionary terms.
MODIFIERS = {
    "annual": "doc", "tax": "doc", "fishing": "tool", "olive": "food", "city": "place", "guide": "animal",
    "bank": "doc", "paper": "doc", "solar": "place",
}
HEADS_ONLY_IN_TERMS = {"form": "doc", "boat": "tool", "oil": "food", "hall": "place", "statement": "doc",
                       "pie": "food", "shed": "place"}
NO_VECTOR = {"quasar", "gizmo"}
NO_ANNOTATION = {"form", "gizmo", "map"}
WHOLE_TERM_ANNOTATION = {"olive oil"}


def pseudo_words(surfaces, rng):
    onsets = ["b", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t", "w", "ng", "ny"]
    vowels = ["a", "e", "i", "o", "u"]
    taken = set(surfaces)
    out = {}
    for s in sorted(surfaces):
        if not s[0].isalpha():
            out[s] = s
            continue
        while True:
            w = "".join(rng.choice(onsets) + rng.choice(vowels) for _ in range(rng.randint(2, 3)))
            if w not in taken:
                taken.add(w)
                out[s] = w
                break
    return out


class Grammar:
    def __init__(self, words, tr, weights=None):
        self.words = words
        self.tr = tr
        self.weights = weights or {}

    def pick(self, rng, pos, number=None, topic=None):
        pool = [w for w in self.words if w[1] == pos and (number is None or w[2] == number)
                and (topic is None or w[3] == topic)]
        return rng.choices(pool, weights=[self.weights.get(w[3], 1.0) for w in pool])[0][0]

    def sentence(self, rng, force=None):
        """Returns (source tokens, target tokens). force=(pos, number, topic, surface) pins one slot."""
        t = rng.randrange(5)
        if force is not None:
            pos, number, topic, _ = force
            t = {"NOUN": 0 if number == "Sing" else 1, "VERB": 0, "ADJ": 4}[pos]
            if topic == "place" and pos == "NOUN":
                t = 2
        slots = {
            0: ["the", ("ADJ",), ("NOUN", "Sing"), ("VERB", "Sing"), "the", ("NOUN", None), "."],
            1: ["the", ("NOUN", "Plur"), ("VERB", "Plur"), "a", ("ADJ",), ("NOUN", "Sing"), "."],
            2: ["a", ("NOUN", "Sing"), "is", "in", "the", ("PLACE",), "."],
            3: ["we", ("VERB", "Plur"), "the", ("NOUN", None), "with", "the", ("TOOL",), "."],
            4: ["the", ("ADJ",), ("NOUN", "Plur"), ("VERB", "Plur"), "the", ("ADJ",), ("NOUN", "Sing"), "."],
        }[t]
        forced_done = force is None
        src = []
        kinds = []
        for slot in slots:
            if isinstance(slot, str):
                src.append([slot])
                kinds.append("LIT")
                continue
            kind = slot[0]
            if not forced_done and self._fits(slot, force):
                src.append(force[3].split())
                forced_done = True
            elif kind == "PLACE":
                src.append(self.pick(rng, "NOUN", "Sing", "place").split())
            elif kind == "TOOL":
                src.append(self.pick(rng, "NOUN", "Sing", "tool").split())
            elif kind == "ADJ":
                src.append(self.pick(rng, "ADJ").split())
            else:
                src.append(self.pick(rng, kind, slot[1]).split())
            kinds.append("ADJ" if kind == "ADJ" else "X")
        assert forced_done, force
        return self.render(src, kinds)

    @staticmethod
    def _fits(slot, force):
        pos, number, topic, _ = force
        kind = slot[0]
        if kind == "PLACE":
            return pos == "NOUN" and topic == "place" and number == "Sing"
        if kind == "TOOL":
            return False
        if kind == "ADJ":
            return pos == "ADJ"
        return kind == pos and (len(slot) < 2 or slot[1] is None or slot[1] == number)

    def render(self, src_groups, kinds):
        tgt_groups = [self.translate(g) for g in src_groups]
        # Target puts an adjective after the noun phrase it modifies.
        i = 0
        while i + 1 < len(tgt_groups):
            if kinds[i] == "ADJ" and kinds[i + 1] == "X":
                tgt_groups[i], tgt_groups[i + 1] = tgt_groups[i + 1], tgt_groups[i]
                kinds[i], kinds[i + 1] = kinds[i + 1], kinds[i]
                i += 2
            else:
                i += 1
        return [t for g in src_groups for t in g], [t for g in tgt_groups for t in g]

    def translate(self, group):
        # Multi-word terms are head-first on the target side.
        return [self.tr[w] for w in reversed(group)]


def vector(rng, centres, topic, pos, noise=0.35):
    v = [0.0] * DIM
    if topic is not None:
        v = [a + b for a, b in zip(v, centres["topic:" + topic])]
    v = [a + 0.7 * b for a, b in zip(v, centres["pos:" + pos])]
    sd = noise / math.sqrt(DIM)
    return [a + rng.gauss(0.0, sd) for a in v]


def unit(rng):
    v = [rng.gauss(0.0, 1.0) for _ in range(DIM)]
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "tests/fixtures/toy"
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(SEED)

    dict_tokens = {t for term, *_ in DICTIONARY for t in term.split()}
    all_source = (set(FUNCTION) | {w[0] for w in FREQUENT} | {w[0] for w in RARE} | set(INVALID_RARE)
                  | dict_tokens | {"."})
    tr = pseudo_words(all_source, rng)
    tr["."] = "."

    # Parallel corpus: frequent words only, then one host sentence per rare word.
    parallel = Grammar(FREQUENT, tr, SPARSE_TOPICS)
    pairs = [parallel.sentence(rng) for _ in range(PARALLEL_PAIRS)]
    hosts = rng.sample(range(PARALLEL_PAIRS), len(RARE) + len(INVALID_RARE))
    for (surface, pos, number, topic), h in zip(RARE, hosts):
        pairs[h] = parallel.sentence(rng, force=(pos, number, topic, surface))
    special = hosts[len(RARE):]
    pairs[special[0]] = (["in", "1987", "the", "dog", "sees", "the", "cat", "."],
                         [tr["in"], "1987", tr["the"], tr["dog"], tr["sees"], tr["the"], tr["cat"], "."])
    src, tgt = parallel.sentence(rng, force=("NOUN", "Sing", None, "gizmo"))
    pairs[special[1]] = (src, tgt)
    src, tgt = pairs[special[2]]
    pairs[special[2]] = (src[:-1] + ["!"], tgt[:-1] + ["!"])

    counts = {}
    for s, _ in pairs:
        for w in s:
            counts[w] = counts.get(w, 0) + 1
    for surface, *_ in RARE:
        assert counts.get(surface) == 1, (surface, counts.get(surface))
    for w in INVALID_RARE:
        assert counts.get(w) == 1, w
    for surface, *_ in FREQUENT:
        assert counts.get(surface, 0) >= 2, (surface, counts.get(surface, 0))
    for term, _, _, in_corpus in DICTIONARY:
        if not in_corpus:
            assert any(t not in counts for t in term.split()), term

    # Monolingual corpora: every noun, rare or dictionary, is equally likely.
    dict_nouns = [(term, "NOUN", number, topic) for term, number, topic, _ in DICTIONARY]
    mono_words = FREQUENT + RARE + [d for d in dict_nouns if d[0] not in {w[0] for w in FREQUENT}]
    mono = Grammar(mono_words, tr)
    mono_src = [mono.sentence(rng)[0] for _ in range(MONO_SENTENCES)]
    mono_tgt = [mono.sentence(rng)[1] for _ in range(MONO_SENTENCES)]

    def write_lines(name, sentences):
        (out / name).write_text("".join(" ".join(s) + "\n" for s in sentences), encoding="utf-8")

    write_lines("train.src", [p[0] for p in pairs])
    write_lines("train.tgt", [p[1] for p in pairs])
    write_lines("mono.src", mono_src)
    write_lines("mono.tgt", mono_tgt)

    # Word metadata: pos, number, topic.
    meta = {w: (p, n, t) for w, p, n, t in FREQUENT + RARE}
    for w, p in FUNCTION.items():
        meta[w] = (p, None, None)
    meta["."] = ("PUNCT", None, None)
    meta["!"] = ("PUNCT", None, None)
    meta["1987"] = ("NUM", None, None)
    for term, number, topic, _ in DICTIONARY:
        toks = term.split()
        meta.setdefault(toks[-1], ("NOUN", number, topic))
    for w, topic in MODIFIERS.items():
        meta.setdefault(w, ("NOUN", "Sing", topic))
    for w, topic in HEADS_ONLY_IN_TERMS.items():
        meta.setdefault(w, ("NOUN", "Sing", topic))

    centres = {}
    for name in ["doc", "animal", "food", "tool", "place", "music"]:
        centres["topic:" + name] = unit(rng)
    for name in ["NOUN", "VERB", "ADJ", "DET", "ADP", "PRON", "AUX", "PUNCT", "NUM"]:
        centres["pos:" + name] = unit(rng)

    def write_embeddings(name, side_of):
        rows = []
        for w in sorted(meta):
            if w in NO_VECTOR or not w[0].isalpha():
                continue
            pos, _, topic = meta[w]
            rows.append((side_of(w), vector(rng, centres, topic, pos)))
        text = f"{len(rows)} {DIM}\n" + "".join(
            tok + "".join(f" {x:.6f}" for x in v) + "\n" for tok, v in rows)
        (out / name).write_text(text, encoding="utf-8")

    write_embeddings("emb.src.vec", lambda w: w)
    write_embeddings("emb.tgt.vec", lambda w: tr[w])

    def write_annotations(name, side_of):
        lines = []
        for w in sorted(meta):
            if w in NO_ANNOTATION:
                continue
            pos, number, _ = meta[w]
            morph = f"Number={number}" if number else "_"
            lines.append(f"{side_of(w)}\t{pos}\t{morph}\n")
        for term in sorted(WHOLE_TERM_ANNOTATION):
            lines.append(f"{side_of(term)}\tNOUN\tNumber=Sing\n")
        (out / name).write_text("".join(lines), encoding="utf-8")

    write_annotations("ann.src.tsv", lambda w: w)
    write_annotations("ann.tgt.tsv", lambda w: " ".join(tr[t] for t in reversed(w.split())))

    (out / "dict.tsv").write_text(
        "".join(f"{term}\t{' '.join(tr[t] for t in reversed(term.split()))}\n" for term, *_ in DICTIONARY),
        encoding="utf-8")

    (out / "toy.conf").write_text(
        "# Bundled toy fixture; regenerate with tools/make_toy_fixture.py\n"
        "source_corpus = train.src\n"
        "target_corpus = train.tgt\n"
        "mono_source = mono.src\n"
        "mono_target = mono.tgt\n"
        "embeddings_source = emb.src.vec\n"
        "embeddings_target = emb.tgt.vec\n"
        "annotations_source = ann.src.tsv\n"
        "annotations_target = ann.tgt.tsv\n"
        "dictionary = dict.tsv\n",
        encoding="utf-8")


if __name__ == "__main__":
    main()
