import math

from confval.textsim import (
    dominant_representative,
    medoid,
    rank_by_similarity,
    similarity_matrix,
    single_linkage_clusters,
    tokenize,
)


def hand_tfidf_cosine(docs):
    """Independent arithmetic oracle: raw-count TF, idf=ln((1+n)/(1+df))+1,
    L2 normalization, dot-product cosine."""
    token_lists = [tokenize(d) for d in docs]
    vocabulary = sorted({t for tokens in token_lists for t in tokens})
    n = len(docs)
    df = {t: sum(1 for tokens in token_lists if t in tokens) for t in vocabulary}
    rows = []
    for tokens in token_lists:
        weights = []
        for t in vocabulary:
            tf = tokens.count(t)
            weights.append(tf * (math.log((1 + n) / (1 + df[t])) + 1.0))
        norm = math.sqrt(sum(w * w for w in weights))
        rows.append([w / norm if norm else 0.0 for w in weights])
    sims = [[sum(a * b for a, b in zip(u, v)) for v in rows] for u in rows]
    return sims


def test_similarity_matches_hand_computation():
    docs = ["port out of range", "port value out of range", "file missing entirely"]
    ours = similarity_matrix(docs)
    oracle = hand_tfidf_cosine(docs)
    for i in range(3):
        for j in range(3):
            assert abs(ours[i][j] - oracle[i][j]) < 1e-12


def test_dominant_cluster_beats_outlier():
    docs = ["port out of range", "port value out of range", "file missing"]
    sims = hand_tfidf_cosine(docs)
    assert sims[0][1] >= 0.4  # the two port reasons merge
    assert sims[0][2] < 0.4 and sims[1][2] < 0.4
    representative = dominant_representative(docs)
    assert representative in docs[:2]
    # medoid of the pair: equal intra sums, earliest index wins
    assert representative == docs[0]


def test_equal_size_tie_prefers_tighter_cluster():
    docs = ["alpha beta gamma", "alpha beta delta", "omega psi", "omega psi"]
    representative = dominant_representative(docs)
    assert representative == "omega psi"


def test_identical_reasons_collapse():
    docs = ["same reason"] * 5
    assert dominant_representative(docs) == "same reason"


def test_single_document_is_its_own_representative():
    assert dominant_representative(["only"]) == "only"


def test_single_linkage_transitivity():
    # a~b and b~c merge all three even when a and c are far apart
    sims = [
        [1.0, 0.9, 0.1],
        [0.9, 1.0, 0.5],
        [0.1, 0.5, 1.0],
    ]
    clusters = single_linkage_clusters(sims, threshold=0.4)
    assert clusters == [[0, 1, 2]]


def test_medoid_prefers_central_member():
    sims = [
        [1.0, 0.8, 0.1],
        [0.8, 1.0, 0.6],
        [0.1, 0.6, 1.0],
    ]
    assert medoid([0, 1, 2], sims) == 1


def test_rank_by_similarity_orders_by_overlap():
    query = "server port timeout"
    docs = ["disk cache eviction", "server port timeout", "server port"]
    order = rank_by_similarity(query, docs)
    assert order[0] == 1
    assert order[-1] == 0
