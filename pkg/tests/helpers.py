"""Shared fixtures and independent oracle implementations.

Every oracle here is written from the documented contract, not from the
package's code paths: BM25 via direct counting, retrieval via exhaustive
scoring of every chunk, ROUGE via naive n-gram counting and a quadratic
LCS table, BLEU via naive clipping, and Wilcoxon via sign-pattern
enumeration.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np

from flowtriage.flows.types import FeatureSchema
from flowtriage.knowledge import Chunk, KnowledgeBase
from flowtriage.text import tokenize

# ---------------------------------------------------------------- flow schema


def tiny_schema(pad_to: int = 66) -> FeatureSchema:
    return FeatureSchema(
        schema_id="test-tiny",
        numeric_features=("sttl", "sload", "dload", "spkts"),
        categorical_features={"proto": ("tcp", "udp", "icmp")},
        pad_to=pad_to,
        interpretation={
            "sttl": ("Source Time-to-Live", "irregular values may indicate spoofed packets"),
            "sload": ("Source byte throughput", "high rates are consistent with flooding"),
        },
        metadata_columns={
            "flow_id": "id",
            "timestamp": "ts",
            "src_ip": "srcip",
            "src_port": "sport",
            "dst_ip": "dstip",
            "dst_port": "dsport",
            "protocol": "proto",
        },
        label_column="label",
    )


# ------------------------------------------------------------------ fixture KB

_WORD_POOLS = {
    "DoS": [
        "dos", "flood", "syn", "rate", "limiting", "cookies", "exhaustion",
        "single", "source", "volumetric", "packets", "blocking", "t1498",
    ],
    "DDoS": [
        "ddos", "distributed", "botnet", "amplification", "reflection",
        "upstream", "filtering", "coordination", "bandwidth", "scrubbing",
        "t1498.001", "dns", "ntp",
    ],
    "Benign": [
        "benign", "normal", "baseline", "legitimate", "monitoring",
        "handshake", "bidirectional", "compliant", "routine", "validated",
    ],
    "general": [
        "incident", "response", "containment", "eradication", "recovery",
        "analysis", "documentation", "escalation", "review", "triage",
    ],
}

_SHARED_WORDS = [
    "network", "traffic", "security", "mitigation", "detection", "alert",
    "procedure", "control", "guidance", "report",
]

_DOC_SOURCES = [
    ("doc-nist-61", "NIST SP 800-61 Rev. 2"),
    ("doc-nist-94", "NIST SP 800-94"),
    ("doc-mitre-1498", "T1498"),
    ("doc-mitre-sub", "T1498.001"),
    ("doc-playbook", "SOC-PB-7"),
]


def build_fixture_kb(n_chunks: int = 50, seed: int = 42) -> KnowledgeBase:
    """A deterministic, class-tagged 50-chunk KB for retrieval tests."""
    rng = np.random.default_rng(seed)
    labels = (["DoS"] * 16 + ["DDoS"] * 16 + ["Benign"] * 10 + ["general"] * 8)[:n_chunks]
    while len(labels) < n_chunks:
        labels.append("general")
    chunks = []
    for i, label in enumerate(labels):
        pool = _WORD_POOLS[label]
        n_tokens = int(rng.integers(25, 45))
        words = [pool[int(rng.integers(0, len(pool)))] for _ in range(n_tokens // 2)]
        words += [_SHARED_WORDS[int(rng.integers(0, len(_SHARED_WORDS)))] for _ in range(n_tokens - len(words))]
        rng.shuffle(words)
        doc_id, citation = _DOC_SOURCES[i % len(_DOC_SOURCES)]
        chunks.append(
            Chunk(
                chunk_id=f"c{i:03d}",
                doc_id=doc_id,
                text=" ".join(words),
                token_span=(0, len(words)),
                relevance_label=label,
                citation_label=citation,
                section_id=f"s{i % 4}",
            )
        )
    return KnowledgeBase.from_chunks(chunks)


def fixture_queries() -> list[tuple[str, str]]:
    """33 (query, relevant-class) pairs mixing class and shared vocabulary."""
    templates = {
        "DoS": [
            "dos flood mitigation", "syn flood rate limiting", "dos exhaustion response",
            "single source flood blocking", "rate limiting cookies", "volumetric dos packets",
            "dos attack detection guidance", "flood containment procedure",
            "t1498 dos response", "dos traffic alert", "syn cookies control",
        ],
        "DDoS": [
            "ddos botnet mitigation", "amplification attack filtering", "distributed flood upstream",
            "reflection attack response", "botnet coordination detection", "ddos bandwidth scrubbing",
            "dns amplification guidance", "ntp reflection control", "t1498.001 ddos response",
            "distributed attack report", "upstream filtering procedure",
        ],
        "Benign": [
            "benign traffic baseline", "normal handshake monitoring", "legitimate traffic validated",
            "baseline monitoring procedure", "routine traffic review", "benign alert triage",
            "normal bidirectional traffic", "compliant network baseline", "benign detection report",
            "legitimate monitoring guidance", "normal traffic control",
        ],
    }
    queries = []
    for label, qs in templates.items():
        queries.extend((q, label) for q in qs)
    return queries


# --------------------------------------------------------------- BM25 oracle


def oracle_bm25(query_tokens: list[str], doc_tokens: list[list[str]], k1=1.5, b=0.75) -> list[float]:
    """Direct BM25 from first principles over tokenized documents."""
    n_docs = len(doc_tokens)
    avgdl = sum(len(d) for d in doc_tokens) / n_docs
    tfs = [Counter(d) for d in doc_tokens]
    df = Counter()
    for tf in tfs:
        df.update(tf.keys())
    scores = []
    for tf, doc in zip(tfs, doc_tokens):
        s = 0.0
        for term in query_tokens:
            f = tf.get(term, 0)
            if f == 0:
                continue
            idf = math.log((n_docs - df[term] + 0.5) / (df[term] + 0.5) + 1.0)
            s += idf * f * (k1 + 1.0) / (f + k1 * (1 - b + b * len(doc) / avgdl))
        scores.append(s)
    return scores


# ----------------------------------------------------------- retrieval oracle


def oracle_expand(query: str, thesaurus_entries: dict[str, tuple[str, ...]]) -> str:
    appended, seen = [], set()
    for token in tokenize(query):
        for syn in thesaurus_entries.get(token, ()):
            if syn not in seen:
                seen.add(syn)
                appended.append(syn)
    return query + (" " + " ".join(appended) if appended else "")


def oracle_jaccard(query: str, text: str) -> float:
    q, c = set(tokenize(query)), set(tokenize(text))
    if not q or not c:
        return 0.0
    return len(q & c) / len(q | c)


def oracle_retrieve(
    query: str,
    kb: KnowledgeBase,
    provider,
    thesaurus_entries: dict[str, tuple[str, ...]],
    k: int = 5,
    depth: int = 30,
) -> list[str]:
    """Exhaustively score every chunk through the pipeline's formulas."""
    expanded = oracle_expand(query, thesaurus_entries)
    q_tokens = tokenize(expanded)

    ids = [c.chunk_id for c in kb.chunks]
    doc_tokens = [tokenize(c.text) for c in kb.chunks]
    bm25 = oracle_bm25(q_tokens, doc_tokens)

    q_vec = np.asarray(provider.embed(expanded), dtype=np.float64)
    cosines = []
    for chunk in kb.chunks:
        d_vec = np.asarray(provider.embed(chunk.text), dtype=np.float64)
        nq, nd = np.linalg.norm(q_vec), np.linalg.norm(d_vec)
        cosines.append(float(q_vec @ d_vec / (nq * nd)) if nq > 0 and nd > 0 else 0.0)

    lex_top = sorted(
        ((cid, s) for cid, s in zip(ids, bm25) if s > 0), key=lambda t: (-t[1], t[0])
    )[:depth]
    sem_top = sorted(zip(ids, cosines), key=lambda t: (-t[1], t[0]))[:depth]
    union = sorted({cid for cid, _ in lex_top} | {cid for cid, _ in sem_top})

    by_id = {cid: i for i, cid in enumerate(ids)}
    raw = [(cid, bm25[by_id[cid]], cosines[by_id[cid]]) for cid in union]
    lo = min(r[1] for r in raw)
    hi = max(r[1] for r in raw)
    span = hi - lo
    fused = []
    for cid, b_raw, cos in raw:
        b_norm = 1.0 if span == 0 else (b_raw - lo) / span
        sem = (cos + 1.0) / 2.0
        fused.append((cid, 0.60 * sem + 0.40 * b_norm))
    fused.sort(key=lambda t: (-t[1], t[0]))
    shortlist = [cid for cid, _ in fused[:depth]]

    reranked = sorted(
        ((cid, oracle_jaccard(query, kb.by_id(cid).text)) for cid in shortlist),
        key=lambda t: (-t[1], t[0]),
    )
    return [cid for cid, _ in reranked[:k]]


# --------------------------------------------------------------- text oracles


def oracle_rouge_n(cand: list[str], ref: list[str], n: int) -> tuple[float, float, float]:
    def grams(toks):
        return Counter(tuple(toks[i : i + n]) for i in range(len(toks) - n + 1))

    cg, rg = grams(cand), grams(ref)
    overlap = 0
    for gram, count in cg.items():
        overlap += min(count, rg.get(gram, 0))
    p = overlap / sum(cg.values()) if cg else 0.0
    r = overlap / sum(rg.values()) if rg else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def oracle_rouge_l(cand: list[str], ref: list[str]) -> tuple[float, float, float]:
    table = [[0] * (len(ref) + 1) for _ in range(len(cand) + 1)]
    for i in range(1, len(cand) + 1):
        for j in range(1, len(ref) + 1):
            if cand[i - 1] == ref[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    lcs = table[-1][-1]
    p = lcs / len(cand) if cand else 0.0
    r = lcs / len(ref) if ref else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def oracle_bleu(cand: list[str], ref: list[str]) -> float:
    if not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, 5):
        cg = Counter(tuple(cand[i : i + n]) for i in range(len(cand) - n + 1))
        rg = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
        matches = sum(min(c, rg.get(g, 0)) for g, c in cg.items())
        total = sum(cg.values())
        if n == 1:
            if matches == 0:
                return 0.0
            p = matches / total
        else:
            p = (matches + 1) / (total + 1)
        log_sum += math.log(p)
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return bp * math.exp(log_sum / 4)


def oracle_wilcoxon(pairs: list[tuple[float, float]]) -> tuple[float, float]:
    """(W, two-sided p) by enumerating all sign patterns; n must be small."""
    diffs = [a - b for a, b in pairs if a != b]
    n = len(diffs)
    absd = [abs(d) for d in diffs]
    order = sorted(range(n), key=lambda i: absd[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and absd[order[j + 1]] == absd[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j + 2) / 2.0
        i = j + 1
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    w = min(w_plus, w_minus)
    count = 0
    for signs in itertools.product((0, 1), repeat=n):
        if sum(r for r, s in zip(ranks, signs) if s) <= w + 1e-12:
            count += 1
    return w, min(1.0, 2.0 * count / 2**n)
