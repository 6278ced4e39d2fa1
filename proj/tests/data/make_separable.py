"""Regenerates separable.csv: 4 classes x 50 comments over disjoint keyword sets."""
import csv
import random

VOCAB = {
    "obvious": "increment counter assign variable loop index add bump set field".split(),
    "task": "todo fixme later implement refactor pending cleanup revisit workaround remove".split(),
    "vague": "stuff thing whatnot kinda magic weird dunno maybe hmm odd".split(),
    "not-a-smell": "protocol handshake cache invariant thread timeout retry buffer latency checksum".split(),
}
SHARED = "code block value method".split()

rng = random.Random(20240611)
rows = []
for label, words in VOCAB.items():
    for i in range(50):
        toks = rng.sample(words, 4) + rng.sample(SHARED, 1)
        rng.shuffle(toks)
        rows.append([f"{label}-{i:02d}", "synthetic", "java", f"src/{label}.java", "", "", " ".join(toks), "NA", label])

with open("separable.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["id", "project", "language", "file_path", "line_start", "line_end", "comment", "code", "label"])
    w.writerows(rows)
