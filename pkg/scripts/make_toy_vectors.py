"""Write clustered 100-d vectors for the toy corpus in word2vec text format.

A word's vector is its category centre plus noise; the category is the
entity type the word appears under, else its POS tag. A few words are left
out so the unknown-word row gets exercised.
"""

from pathlib import Path

import numpy as np

from indoner.corpus import normalize_word, read_conll

DIM = 100
LEFT_OUT = {"tasikmalaya", "@henjiwong", "rumahnya"}

if __name__ == "__main__":
    data = Path(__file__).resolve().parents[1] / "src" / "indoner" / "data"
    sents = read_conll(data / "toy_train.conll") + read_conll(data / "toy_heldout.conll")
    category: dict[str, str] = {}
    for s in sents:
        for tok in s:
            key = normalize_word(tok.surface)
            cat = tok.ne[2:] if tok.ne != "O" else tok.pos
            if cat in ("PER", "LOC", "IND", "EVT", "FNB") or key not in category:
                category[key] = cat
    rng = np.random.default_rng(2018)
    centres = {c: rng.normal(0, 0.5, DIM) for c in sorted(set(category.values()))}
    words = [w for w in category if w not in LEFT_OUT]
    with open(data / "toy_vectors.txt", "w", encoding="utf-8") as f:
        f.write(f"{len(words)} {DIM}\n")
        for w in words:
            vec = centres[category[w]] + rng.normal(0, 0.3, DIM)
            f.write(w + " " + " ".join(f"{v:.4f}" for v in vec) + "\n")
