"""Record a scripted API walkthrough into frontend test fixtures.

Runs the real HTTP application over the four-source fixture corpus and
captures every request/response pair. The frontend tests replay this
traffic through a fake transport, so every number the UI renders can be
audited against bytes the service actually produced.

Usage: python3 frontend/scripts/record_fixtures.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "tests"))

from fastapi.testclient import TestClient

from conftest import ERASMUS_CORPUS, build_workspace, counter_clock
from biograph.lexicon import load_default_lexicons
from biograph.service import SessionLog, create_app

OUT = ROOT / "frontend" / "tests" / "fixtures" / "traffic.json"


def main() -> None:
    ws = build_workspace(ERASMUS_CORPUS, load_default_lexicons())
    app = create_app(ws, SessionLog(clock=counter_clock(5000.0)))
    traffic = []

    with TestClient(app) as client:
        def call(method, url, body=None):
            if method == "GET":
                r = client.get(url)
            else:
                r = client.post(url, json=body)
            assert r.status_code == 200, (url, r.status_code, r.text)
            traffic.append({
                "method": method,
                "url": url,
                "body": body,
                "response": json.loads(r.content),
            })
            return json.loads(r.content)

        # search -> refine -> person -> fact fold-out
        call("POST", "/api/v1/search", {"q": "Erasmus"})
        call("POST", "/api/v1/search",
             {"q": "Erasmus", "facets": {"source": ["vdaa"]}})
        call("GET", "/api/v1/person/erasmus")
        call("GET", "/api/v1/person/erasmus/timeline")
        call("GET", "/api/v1/person/erasmus/fact/birth-date")
        call("GET", "/api/v1/person/erasmus/fact/birth-place")
        # visualization payloads
        call("GET", "/api/v1/viz/participation")
        call("GET", "/api/v1/viz/climax?scoring=participants")
        # session walkthrough with a branch, replayed twice
        created = call("POST", "/api/v1/session",
                       {"request": {"q": "Erasmus"}})
        sid = created["sessionId"]
        call("POST", f"/api/v1/session/{sid}/step",
             {"kind": "refine", "facets": {"source": ["vdaa"]}})
        call("POST", f"/api/v1/session/{sid}/branch",
             {"fromStep": "step-0",
              "op": {"kind": "refine", "facets": {"source": ["dbnl"]}}})
        first = call("GET", f"/api/v1/session/{sid}")
        second = call("GET", f"/api/v1/session/{sid}")
        assert first == second

    # fold the source texts in so highlight checks can reach the documents
    texts = {e.entry_id: e.text for e in ws.corpus.entries}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(
        json.dumps({"traffic": traffic, "texts": texts},
                   ensure_ascii=False, indent=1) + "\n",
        encoding="utf-8",
    )
    print(f"recorded {len(traffic)} exchanges -> {OUT}")


if __name__ == "__main__":
    main()
