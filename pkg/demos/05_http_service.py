"""
Querying the engine over HTTP
=============================

Ingests a small corpus, mounts the index in the retrieval service on an
ephemeral local port, and drives it the way the console does: a health
check, a ranked search, and a live re-analysis of the top hit under a
stricter attention threshold.
"""

import base64
import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from tzr import IngestJob, RetrievalIndex, TestEncoder, ingest
from tzr.server import build_app
from tzr.synthetic import generate_planted_corpus

encoder = TestEncoder()

with tempfile.TemporaryDirectory() as workdir:
    corpus = generate_planted_corpus(Path(workdir) / "frames", n_frames=10, seed=21)
    index_path = Path(workdir) / "frames.tzr"
    ingest(IngestJob(source=corpus.directory, index_path=str(index_path)), encoder)

    app = build_app(RetrievalIndex.load(index_path), encoder)
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.02)
    port = server.servers[0].sockets[0].getsockname()[1]
    base = f"http://127.0.0.1:{port}"
    print(f"service listening on {base}")

    with httpx.Client(base_url=base, timeout=30) as client:
        print(f"health: {client.get('/healthz').json()}")

        hits = client.get("/search", params={"q": "color:6", "k": 3}).json()["results"]
        print("\ntop 3 for 'color:6':")
        for rank, hit in enumerate(hits, start=1):
            print(f"  {rank}. frame {hit['frame_id']} score {hit['score']:+.4f} via {hit['best_source']}")

        # Re-analyze the winning frame's image under a stricter threshold:
        # fewer windows qualify as low attention, so the candidate count drops.
        top = hits[0]
        image_b64 = base64.b64encode(Path(top["source_uri"]).read_bytes()).decode()
        for threshold in (0.4, 0.05):
            body = {"image_b64": image_b64, "query": "color:6", "params": {"threshold": threshold}}
            stages = client.post("/analyze", json=body).json()
            print(
                f"\nanalyze frame {top['frame_id']} at threshold {threshold}: "
                f"{len(stages['candidates'])} candidate windows, "
                f"{len(stages['regions'])} regions, "
                f"best {stages['best']['score']:+.4f} via {stages['best']['source']}"
            )

    server.should_exit = True
    thread.join(timeout=5)
print("service stopped")
