"""Smoke test for the hpnf_py extension.

Build and run from the workspace root:

    cargo build --release -p hpnf-py --features extension-module
    cp target/release/libhpnf_py.so python/hpnf_py.so
    python3 python/smoke_test.py
"""

import json
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import hpnf_py  # noqa: E402


def main():
    assert len(hpnf_py.FEATURE_NAMES) == 32
    assert hpnf_py.sentiment("great news") > 0.05
    assert hpnf_py.sentiment("this is a hoax") < -0.05

    t, df, p, significant = hpnf_py.t_test([1, 2, 3, 4, 5], [2, 4, 6, 8, 10])
    assert abs(t + 1.8973665961010275) < 1e-9 and abs(p - 0.10753119493062718) < 1e-6
    assert not significant

    corpus = hpnf_py.synth(n_fake=40, n_real=40, seed=7)
    assert len(corpus) == 80
    vectors = corpus.extract()
    assert len(vectors) == 80
    v = vectors[0]
    assert v.label == "fake" and len(v.values) == 32 and len(v.mask) == 32
    assert v["S4"] >= 1

    edges = corpus.edges(v.news_id)
    assert edges["news_id"] == v.news_id and edges["macro_edges"]

    with tempfile.TemporaryDirectory() as d:
        corpus.write(d)
        again = hpnf_py.load_corpus(d)
        assert again.news_ids() == corpus.news_ids()

    cmp = hpnf_py.compare_groups(vectors)
    assert cmp[0]["feature"] == "S1"

    metrics = hpnf_py.repeated_holdout(vectors, "rf", runs=2)
    assert metrics["runs"] == 2 and 0.0 <= metrics["mean"]["f1"] <= 1.0

    model = hpnf_py.Model.train(vectors, "dt", seed=1)
    predicted = model.predict(vectors)
    correct = sum(p == x.label for p, x in zip(predicted, vectors))
    assert correct >= 0.95 * len(vectors)
    restored = hpnf_py.Model.from_json(model.to_json())
    assert restored.kind == "dt"
    ranking = model.importance(vectors)
    assert abs(sum(w for _, w in ranking) - 1.0) < 1e-9
    json.dumps(ranking)

    print("hpnf_py smoke test passed")


if __name__ == "__main__":
    main()
