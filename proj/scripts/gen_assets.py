#!/usr/bin/env python3
"""Generates the bundled desk-scale assets.

Outputs (committed under assets/):
  qwerty_us.txt               symmetric US-layout adjacency map
  mini_sentiment.csv          ~2000-row two-label training corpus
  attack_inputs.csv           curated labeled attack sentences
  embeddings_general.txt      50-dim toy general-space table
  embeddings_counterfitted.txt 50-dim counter-fitted surrogate
  lm_corpus.txt               LM training sentences (one per line)

The script also simulates the built-in classifier (bit-exact port of the
C++ PRNG and naive-Bayes formulas) and prints feasibility statistics so
the corpus/embedding design can be tuned against the acceptance targets.
"""

import csv
import itertools
import math
import os
import sys

import numpy as np

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "assets")
DIM = 50
MASK = (1 << 64) - 1


# ---------------------------------------------------------------------------
# Bit-exact port of the C++ splitmix64 Rng (rng.hpp).
class Rng:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def index(self, n):
        if n <= 1:
            return 0
        threshold = ((1 << 64) - n) % n
        while True:
            r = self.next()
            if r >= threshold:
                return r % n


# ---------------------------------------------------------------------------
# QWERTY adjacency from key geometry.
def qwerty_map():
    rows = ["1234567890", "qwertyuiop", "asdfghjkl", "zxcvbnm"]
    offsets = [0.0, 0.5, 0.75, 1.25]
    pos = {}
    for r, row in enumerate(rows):
        for c, ch in enumerate(row):
            pos[ch] = (c + offsets[r], float(r))
    adj = {ch: set() for ch in pos}
    for a in pos:
        for b in pos:
            if a == b:
                continue
            dx = pos[a][0] - pos[b][0]
            dy = pos[a][1] - pos[b][1]
            if math.hypot(dx, dy) <= 1.3:
                adj[a].add(b)
                adj[b].add(a)
    for a in adj:
        for b in adj[a]:
            assert a in adj[b]
        assert adj[a], a
    return {a: "".join(sorted(adj[a])) for a in sorted(adj)}


# ---------------------------------------------------------------------------
# Vocabulary.
#
# cf_clusters: true synonym sets (close in BOTH spaces).
# general_merges: antonym pairs additionally close in the general space
# only, so the counter-fitted filter has real work to do.
#
# Members are (word, polarity, weight): polarity +1/-1 says which label's
# sentences use the word; 0 means the word is used on both sides (rarely).
CF_CLUSTERS = {
    "funny": [("funny", 1, 10), ("hilarious", 1, 6), ("comical", 0, 2), ("laughable", -1, 6)],
    "smart": [("smart", 1, 9), ("clever", 1, 6), ("cunning", 0, 2)],
    "moving": [("moving", 1, 9), ("touching", 1, 6), ("sentimental", 0, 2), ("mawkish", -1, 5)],
    "bold": [("bold", 1, 7), ("daring", 1, 5), ("brash", -1, 5)],
    "gripping": [("gripping", 1, 7), ("thrilling", 1, 6), ("tense", 0, 2), ("stressful", -1, 4)],
    "charming": [("charming", 1, 8), ("delightful", 1, 6), ("quaint", 0, 2), ("saccharine", -1, 4)],
    "good": [("good", 1, 14), ("great", 1, 10), ("excellent", 1, 6), ("superb", 1, 4)],
    "beautiful": [("beautiful", 1, 7), ("gorgeous", 1, 5), ("ornate", 0, 2)],
    "slow": [("slow", -1, 10), ("unhurried", 0, 2), ("measured", 1, 4), ("deliberate", 1, 3)],
    "weird": [("weird", -1, 8), ("strange", -1, 6), ("surreal", 1, 4), ("odd", 0, 2)],
    "predictable": [("predictable", -1, 9), ("conventional", -1, 4), ("familiar", 0, 2)],
    "dull": [("dull", -1, 11), ("boring", -1, 8), ("tedious", -1, 5), ("dreary", 0, 2)],
    "bad": [("bad", -1, 14), ("awful", -1, 8), ("terrible", -1, 8), ("dreadful", -1, 4)],
    "messy": [("messy", -1, 7), ("chaotic", -1, 5), ("unruly", 0, 2)],
    "shallow": [("shallow", -1, 7), ("hollow", -1, 5), ("simplistic", -1, 5), ("simple", 0, 3)],
    "enjoyed": [("enjoyed", 1, 8), ("loved", 1, 8), ("liked", 1, 5), ("savored", 0, 2)],
    "hated": [("hated", -1, 8), ("despised", -1, 4), ("loathed", -1, 3)],
    "movie": [("movie", 0, 0), ("film", 0, 0), ("picture", 0, 0), ("flick", 0, 0)],
    "story": [("story", 0, 0), ("tale", 0, 0), ("narrative", 0, 0)],
    "director": [("director", 0, 0), ("filmmaker", 0, 0)],
    "script": [("script", 0, 0), ("screenplay", 0, 0)],
    "ending": [("ending", 0, 0), ("finale", 0, 0), ("conclusion", 0, 0)],
}

GENERAL_MERGES = [("good", "bad"), ("enjoyed", "hated"), ("funny", "dull")]

NEG_MILD = ["uneven", "clunky", "thin", "flat", "sluggish", "muddled", "tired", "labored"]
POS_MILD = ["warm", "heartfelt", "witty", "graceful", "polished", "lively", "crisp", "elegant"]

ASPECTS = ["pacing", "plot", "dialogue", "premise", "tone", "visuals", "runtime", "editing"]
FILLERS = ["the", "a", "an", "this", "that", "it", "its", "is", "was", "feels",
           "seems", "with", "about", "despite", "while", "but", "and", "of",
           "in", "for", "at", "one", "never", "quite", "rather", "almost",
           "overall", "stays", "shows", "has", "to", "spare", "i", "every",
           "minute", "scene", "cast", "moments", "characters", "leads", "real"]
TOPICS = ["two brothers", "first love", "a small town", "growing up",
          "a family feud", "a long winter", "lost friends", "city life"]


def cluster_words():
    out = {}
    for cname, members in CF_CLUSTERS.items():
        for (w, pol, weight) in members:
            out[w] = cname
    return out


def full_vocab():
    vocab = set(cluster_words())
    vocab.update(NEG_MILD)
    vocab.update(POS_MILD)
    vocab.update(ASPECTS)
    vocab.update(FILLERS)
    for t in TOPICS:
        vocab.update(t.split())
    return sorted(vocab)


# ---------------------------------------------------------------------------
# Embeddings.
def build_space(rng, clusters, vocab, eps):
    """clusters: word -> cluster name (isolated words map to themselves)."""
    names = sorted(set(clusters.get(w, w) for w in vocab))
    centers = {}
    accepted = []
    for name in names:
        for _ in range(20000):
            v = rng.standard_normal(DIM)
            v /= np.linalg.norm(v)
            if all(abs(float(v @ u)) < 0.30 for u in accepted):
                break
        else:
            raise RuntimeError("could not place cluster center " + name)
        centers[name] = v
        accepted.append(v)
    vecs = {}
    for w in vocab:
        c = centers[clusters.get(w, w)]
        if clusters.get(w, w) == w:
            vecs[w] = c.copy()
        else:
            noise = rng.standard_normal(DIM)
            noise -= (noise @ c) * c  # keep the offset orthogonal
            noise *= eps / np.linalg.norm(noise)
            v = c + noise
            vecs[w] = v / np.linalg.norm(v)
    return vecs


def check_space(vecs, clusters, delta=0.6):
    words = sorted(vecs)
    worst_intra, worst_cross = 1.0, -1.0
    for a, b in itertools.combinations(words, 2):
        cos = float(vecs[a] @ vecs[b])
        same = clusters.get(a, a) == clusters.get(b, b)
        if same:
            worst_intra = min(worst_intra, cos)
        else:
            worst_cross = max(worst_cross, cos)
    assert worst_intra >= delta + 0.1, f"intra too loose: {worst_intra}"
    assert worst_cross <= delta - 0.1, f"cross too tight: {worst_cross}"
    return worst_intra, worst_cross


def write_space(path, vecs):
    with open(path, "w") as f:
        for w in sorted(vecs):
            f.write(w + " " + " ".join(f"{x:.6f}" for x in vecs[w]) + "\n")


# ---------------------------------------------------------------------------
# Corpus generation.
def pick(rng, pool):
    """pool: list of (word, weight)."""
    total = sum(w for _, w in pool)
    r = rng.integers(0, total)
    acc = 0
    for word, w in pool:
        acc += w
        if r < acc:
            return word
    return pool[-1][0]


# Mixed-polarity adjective clusters: the decisive word of swap-band
# sentences, so a cross-polarity synonym is reachable.
SWAP_ADJ = {
    "pos": [("funny", 10), ("hilarious", 6), ("smart", 9), ("clever", 6),
            ("moving", 9), ("touching", 6), ("bold", 7), ("daring", 5),
            ("gripping", 7), ("thrilling", 6), ("charming", 8), ("delightful", 6),
            ("measured", 4), ("deliberate", 3), ("surreal", 4),
            ("beautiful", 7), ("gorgeous", 5)],
    "neg": [("laughable", 6), ("mawkish", 5), ("brash", 5), ("stressful", 4),
            ("saccharine", 4), ("slow", 10), ("weird", 8), ("strange", 6),
            ("predictable", 9), ("conventional", 4), ("dull", 11), ("boring", 8),
            ("tedious", 5), ("messy", 7), ("chaotic", 5), ("shallow", 7),
            ("hollow", 5), ("simplistic", 5)],
}

# Pure-polarity strong words: only the typo channel can neutralize them.
STRONG = {
    "pos": [("good", 10), ("great", 8), ("excellent", 5), ("superb", 3)],
    "neg": [("bad", 10), ("awful", 7), ("terrible", 7), ("dreadful", 3)],
}

VERBS = {
    "pos": [("enjoyed", 6), ("loved", 6), ("liked", 4)],
    "neg": [("hated", 6), ("despised", 3), ("loathed", 2)],
}

# Cluster members used on both sides at low rate, so their learned weight
# stays near zero.
NEUTRALISH = [("comical", 1), ("cunning", 1), ("sentimental", 1), ("tense", 1),
              ("quaint", 1), ("unhurried", 1), ("odd", 1), ("familiar", 1),
              ("dreary", 1), ("unruly", 1), ("simple", 1), ("savored", 1)]

NOUNS = [("movie", 6), ("film", 4), ("picture", 2), ("flick", 2),
         ("story", 4), ("tale", 2), ("narrative", 1), ("script", 2),
         ("screenplay", 1), ("director", 1), ("filmmaker", 1),
         ("ending", 2), ("finale", 1), ("conclusion", 1)]


def mild_word(rng, label, contra):
    """One mild context word. `contra` pulls against the label."""
    want_pos = (label == "pos") != contra
    pool = POS_MILD if want_pos else NEG_MILD
    return pool[rng.integers(0, len(pool))]


def make_sentence(rng, label, kind):
    other = "neg" if label == "pos" else "pos"
    noun = pick(rng, NOUNS)
    aspect = ASPECTS[rng.integers(0, len(ASPECTS))]
    topic = TOPICS[rng.integers(0, len(TOPICS))]

    if kind == "swap":
        # Exactly one decisive mixed-cluster adjective; mild context keeps
        # its designed polarity via the 3:1 same/contra fill ratio.
        a1 = pick(rng, SWAP_ADJ[label])
        contra = rng.integers(0, 4) == 0
        mild = mild_word(rng, label, contra)
        t = rng.integers(0, 4)
        if t == 0:
            return f"the {noun} is {a1} and the {aspect} feels {mild}"
        if t == 1:
            return f"a {a1} {noun} about {topic} with {mild} {aspect}"
        if t == 2:
            return f"the {aspect} feels {mild} and the {noun} is {a1}"
        return f"this {a1} {noun} about {topic} feels {mild} overall"
    if kind == "typo":
        # One pure-polarity word plus a contra mild word: knocking the
        # strong word out to an unseen form flips the leftover evidence.
        mild = mild_word(rng, label, contra=True)
        if rng.integers(0, 3) == 0:
            verb = pick(rng, VERBS[label])
            t = rng.integers(0, 2)
            if t == 0:
                return f"i {verb} this {noun} about {topic} despite its {mild} {aspect}"
            return f"i {verb} every minute despite the {mild} {aspect} of this {noun}"
        s = pick(rng, STRONG[label])
        t = rng.integers(0, 3)
        if t == 0:
            return f"despite the {mild} {aspect} the {noun} stays {s}"
        if t == 1:
            return f"the {aspect} feels {mild} but the {noun} stays {s}"
        return f"a {noun} about {topic} that stays {s} despite the {mild} {aspect}"
    # kind == "hard": two strong words and a same-side mild word; neither
    # channel should be able to flip these.
    s1 = pick(rng, STRONG[label])
    s2 = pick(rng, STRONG[label])
    mild = mild_word(rng, label, contra=False)
    t = rng.integers(0, 3)
    if t == 0:
        return f"the {noun} is {s1} and {s2} with a {mild} {aspect}"
    if t == 1:
        a1 = pick(rng, NEUTRALISH)
        return f"the {s1} {noun} stays {s2} and {a1} throughout"
    return f"a {s1} and {s2} {noun} about {topic} with its {mild} {aspect}"


def build_corpus(rng, count, mix):
    rows, seen = [], set()
    kinds, weights = zip(*mix)
    while len(rows) < count:
        label = "pos" if len(rows) % 2 == 0 else "neg"
        kind = kinds[int(rng.choice(len(kinds), p=np.array(weights) / sum(weights)))]
        s = make_sentence(rng, label, kind)
        if s in seen:
            continue
        seen.add(s)
        rows.append((label, s, kind))
    return rows


# ---------------------------------------------------------------------------
# C++-equivalent naive Bayes for curation.
class NB:
    def __init__(self, rows, smoothing=1.0):
        self.smoothing = smoothing
        self.labels = sorted(set(label for label, _ in rows))
        self.counts = {}
        self.totals = {l: 0.0 for l in self.labels}
        docs = {l: 0.0 for l in self.labels}
        for label, text in rows:
            docs[label] += 1
            for tok in text.split():
                row = self.counts.setdefault(tok, {l: 0.0 for l in self.labels})
                row[label] += 1
                self.totals[label] += 1
        self.log_prior = {l: math.log(docs[l] / len(rows)) for l in self.labels}
        self.vocab_size = len(self.counts)

    def posteriors(self, tokens):
        logp = {}
        for l in self.labels:
            denom = math.log(self.totals[l] + self.smoothing * (self.vocab_size + 1))
            acc = self.log_prior[l]
            for t in tokens:
                c = self.counts.get(t, {}).get(l, 0.0)
                acc += math.log(c + self.smoothing) - denom
            logp[l] = acc
        mx = max(logp.values())
        z = sum(math.exp(v - mx) for v in logp.values())
        return {l: math.exp(v - mx) / z for l, v in logp.items()}

    def predict(self, tokens):
        post = self.posteriors(tokens)
        best = self.labels[0]
        for l in self.labels[1:]:
            if post[l] > post[best]:
                best = l
        return best


def cpp_holdout_split(rows):
    """Mirror of the CLI's deterministic 90/10 split (Rng seed 17)."""
    order = list(range(len(rows)))
    rng = Rng(17)
    for i in range(len(order), 1, -1):
        j = rng.index(i)
        order[i - 1], order[j] = order[j], order[i - 1]
    train_count = max(1, (len(rows) * 9) // 10)
    train = [rows[k] for k in order[:train_count]]
    hold = [rows[k] for k in order[train_count:]]
    return train, hold


# ---------------------------------------------------------------------------
# Attack feasibility simulation.
def feasibility(nb, sentence, label, cwords):
    toks = sentence.split()
    if nb.predict(toks) != label:
        return None
    slots = []
    for i, t in enumerate(toks):
        cname = cwords.get(t)
        if cname is None:
            continue
        mates = [w for (w, _, _) in CF_CLUSTERS[cname] if w != t]
        if mates:
            slots.append((i, mates))
    swap_flip = False
    for combo_size in (1, 2):
        if swap_flip:
            break
        for chosen in itertools.combinations(slots, combo_size):
            for repl in itertools.product(*[m for (_, m) in chosen]):
                cand = list(toks)
                for ((i, _), w) in zip(chosen, repl):
                    cand[i] = w
                if nb.predict(cand) != label:
                    swap_flip = True
                    break
            if swap_flip:
                break
    # Typo channel: one word knocked out to OOV (budget for n<=10 is 1),
    # on top of any single swap.
    typo_flip = False
    variants = [list(toks)]
    for (i, mates) in slots:
        for w in mates:
            cand = list(toks)
            cand[i] = w
            variants.append(cand)
    for base in variants:
        for i in range(len(base)):
            cand = list(base)
            cand[i] = "@@oov@@"
            if nb.predict(cand) != label:
                typo_flip = True
                break
        if typo_flip:
            break
    return swap_flip, typo_flip


# ---------------------------------------------------------------------------
def main():
    os.makedirs(OUT, exist_ok=True)
    np_rng = np.random.default_rng(20240817)

    # 1. QWERTY map.
    qmap = qwerty_map()
    with open(os.path.join(OUT, "qwerty_us.txt"), "w") as f:
        for ch, adj in qmap.items():
            f.write(f"{ch}:{adj}\n")

    # 2. Corpus: mostly swap-attackable, a typo-attackable band, and a
    # hard band so failures exist. A sprinkle of label noise keeps the
    # trained victim off 100% accuracy.
    corpus = build_corpus(np_rng, 2000, [("swap", 5), ("typo", 3), ("hard", 2)])
    noisy = []
    for label, text, kind in corpus:
        if np_rng.integers(0, 25) == 0:
            label = "neg" if label == "pos" else "pos"
        noisy.append((label, text, kind))
    corpus = noisy
    with open(os.path.join(OUT, "mini_sentiment.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label", "text"])
        for label, text, _ in corpus:
            w.writerow([label, text])

    with open(os.path.join(OUT, "lm_corpus.txt"), "w") as f:
        for _, text, _ in corpus:
            f.write(text + "\n")

    # 3. Embeddings: counter-fitted space uses the true synonym clusters;
    # the general space merges a few antonym clusters on top.
    vocab = full_vocab()
    cwords = cluster_words()
    cf_assign = {w: cwords.get(w, w) for w in vocab}
    merged = dict(cf_assign)
    for a, b in GENERAL_MERGES:
        for w in vocab:
            if merged[w] == b:
                merged[w] = a
    cf_vecs = build_space(np_rng, cf_assign, vocab, eps=0.32)
    gen_vecs = build_space(np_rng, merged, vocab, eps=0.36)
    ci, cc = check_space(cf_vecs, cf_assign)
    gi, gc = check_space(gen_vecs, merged)
    write_space(os.path.join(OUT, "embeddings_counterfitted.txt"), cf_vecs)
    write_space(os.path.join(OUT, "embeddings_general.txt"), gen_vecs)

    # 4. The victim the CLI will train (90% split, seed-17 shuffle).
    train, hold = cpp_holdout_split([(l, t) for l, t, _ in corpus])
    nb = NB(train)
    hold_acc = sum(nb.predict(t.split()) == l for l, t in hold) / len(hold)

    # 5. Attack inputs: fresh sentences the victim classifies correctly.
    seen = set(t for _, t, _ in corpus)
    inputs, stats = [], {"swap": 0, "typo_only": 0, "neither": 0}
    tries = 0
    kind_mix = (["swap"] * 9 + ["typo"] * 7 + ["hard"] * 4)
    while len(inputs) < 130 and tries < 20000:
        tries += 1
        label = "pos" if len(inputs) % 2 == 0 else "neg"
        kind = kind_mix[int(np_rng.integers(0, len(kind_mix)))]
        s = make_sentence(np_rng, label, kind)
        if s in seen:
            continue
        feas = feasibility(nb, s, label, cwords)
        if feas is None:
            continue
        seen.add(s)
        inputs.append((label, s))
        swap_flip, typo_flip = feas
        if swap_flip:
            stats["swap"] += 1
        elif typo_flip:
            stats["typo_only"] += 1
        else:
            stats["neither"] += 1

    with open(os.path.join(OUT, "attack_inputs.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label", "text"])
        for label, text in inputs:
            w.writerow([label, text])

    first = inputs[:100]
    fs = {"swap": 0, "typo_only": 0, "neither": 0}
    lens = []
    for label, s in first:
        swap_flip, typo_flip = feasibility(nb, s, label, cwords)
        lens.append(len(s.split()))
        if swap_flip:
            fs["swap"] += 1
        elif typo_flip:
            fs["typo_only"] += 1
        else:
            fs["neither"] += 1

    print(f"corpus: {len(corpus)} rows, vocab {nb.vocab_size}")
    print(f"holdout accuracy (90/10, seed-17 shuffle): {100 * hold_acc:.2f}%")
    print(f"embedding separation: cf intra>={ci:.3f} cross<={cc:.3f}; "
          f"general intra>={gi:.3f} cross<={gc:.3f}")
    print(f"attack inputs: {len(inputs)} (all correctly classified)")
    print(f"first-100 feasibility: swap-flippable {fs['swap']}, "
          f"typo-only {fs['typo_only']}, neither {fs['neither']}")
    print(f"mean input length: {sum(lens) / len(lens):.2f} tokens")
    if fs["swap"] < 30 or fs["swap"] + fs["typo_only"] < 55:
        print("WARNING: feasibility below target", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
