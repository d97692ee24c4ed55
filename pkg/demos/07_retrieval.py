"""Two-stage retrieval over tool documentation snippets.

Stage 1 retrieves the top-k chunks by cosine similarity from the index;
stage 2 reranks them by query-token coverage and keeps the top m. The
hashed-token embedder makes every ranking reproducible.
"""

from pathlib import Path

from hlskit.ragkit import (
    HashedTokenEmbedder,
    RetrievalConfig,
    TokenOverlapReranker,
    VectorIndex,
    chunk_document,
    two_stage_query,
)

OUT = Path(__file__).parent / "_out"
OUT.mkdir(parents=True, exist_ok=True)

DOCS = {
    "directives/unroll.md": (
        "The UNROLL directive duplicates the loop body so multiple "
        "iterations execute in parallel. Full unrolling removes the loop "
        "entirely; partial unrolling takes a factor."
    ),
    "directives/pipeline.md": (
        "PIPELINE_INIT_INTERVAL schedules a new loop iteration every II "
        "cycles, overlapping successive iterations. Lower II increases "
        "throughput but raises memory port pressure."
    ),
    "directives/interleave.md": (
        "The INTERLEAVE directive splits an array across independent "
        "memory banks so several reads can be serviced in one cycle. "
        "Windowed access patterns need one bank per simultaneous access."
    ),
    "directives/goals.md": (
        "DESIGN_GOAL selects the optimizer objective: area minimizes "
        "resource usage, latency minimizes total cycles at extra area."
    ),
}

embedder = HashedTokenEmbedder(dimension=256)
index = VectorIndex(dimension=256)
for doc_id, text in DOCS.items():
    index.add(chunk_document(doc_id, text, window=160, stride=80), embedder)
print(f"indexed {len(index)} chunks from {len(DOCS)} documents")

index_path = OUT / "docs_index.ndjson"
index.save(index_path)
index = VectorIndex.load(index_path)  # persistence round-trip

config = RetrievalConfig(k=6, m=3, window_bytes=160, stride_bytes=80)
for query in (
    "how many memory banks for simultaneous array reads",
    "overlap loop iterations every cycle",
):
    print(f"\nquery: {query}")
    results = two_stage_query(index, query, embedder, TokenOverlapReranker(), config)
    for chunk, score in results:
        snippet = chunk.text.replace("\n", " ")[:70]
        print(f"  {score:.3f}  {chunk.doc_id}[{chunk.chunk_index}]  {snippet}...")
