import json
import time
from pathlib import Path

import jsonschema
import pytest
from fastapi.testclient import TestClient
from referencing import Registry, Resource

from screenkit.chem import write_smiles
from screenkit.pipeline import SCHEMA
from screenkit.pipeline.cli import main
from screenkit.pipeline.service import JobStore, create_app

ORDER = ["queued", "running", "done"]
SCHEMAS = Path(__file__).resolve().parent.parent / "docs" / "schemas"


def published(name):
    return json.loads((SCHEMAS / name).read_text())


def record_validator():
    spec = Resource.from_contents(published("jobspec.schema.json"))
    registry = Registry().with_resource("jobspec.schema.json", spec)
    return jsonschema.Draft202012Validator(published("jobrecord.schema.json"), registry=registry)


@pytest.fixture
def workdir(tmp_path, corpus):
    (tmp_path / "lib.smi").write_text("".join(f"{write_smiles(m)}\t{m.name}\n" for m in corpus[:25]))
    (tmp_path / "mpp.csv").write_text("smiles,label\n" + "\n".join(
        f"{write_smiles(m)},{len(m.bonds) / 7}" for m in corpus[:20]) + "\n")
    return tmp_path


SIM = {"task": "sim", "inputs": {"a": "lib.smi", "b": "lib.smi"}, "params": {"metric": "wl"}, "seed": 0}
TRAIN = {"task": "train", "inputs": {"data": "mpp.csv"}, "params": {"head": "mpp", "epochs": 2}, "seed": 4}


def poll(client, job_id, timeout=60):
    seen = []
    end = time.monotonic() + timeout
    while time.monotonic() < end:
        state = client.get(f"/jobs/{job_id}").json()["state"]
        if not seen or seen[-1] != state:
            seen.append(state)
        if state in ("done", "failed"):
            return seen
        time.sleep(0.01)
    raise TimeoutError(seen)


def is_subsequence(seen, order):
    it = iter(order)
    return all(s in it for s in seen)


def test_submit_poll_fetch(workdir):
    with TestClient(create_app(workdir)) as client:
        assert client.get("/health").json()["status"] == "ok"
        r = client.post("/jobs", json=SIM)
        assert r.status_code == 202 and r.json()["state"] == "queued"
        job = r.json()["id"]
        seen = poll(client, job)
        assert seen[-1] == "done" and is_subsequence(seen, ORDER)
        rec = client.get(f"/jobs/{job}").json()
        assert rec["artifacts"] == ["similarity.csv"] and rec["spec"] == SIM
        art = client.get(f"/jobs/{job}/artifacts/similarity.csv")
        assert art.status_code == 200 and art.headers["content-type"].startswith("text/csv")
        assert art.content.startswith(b"# screenkit")


def test_queued_state_visible_before_worker(workdir):
    app = create_app(workdir, start_worker=False)
    with TestClient(app) as client:
        job = client.post("/jobs", json=SIM).json()["id"]
        assert client.get(f"/jobs/{job}").json()["state"] == "queued"
        app.state.store.start()
        seen = ["queued"] + poll(client, job)
        assert is_subsequence([s for k, s in enumerate(seen) if k == 0 or seen[k - 1] != s], ORDER)


def test_fifo_execution(workdir):
    app = create_app(workdir, start_worker=False)
    with TestClient(app) as client:
        ids = [client.post("/jobs", json={**SIM, "seed": k}).json()["id"] for k in range(3)]
        app.state.store.start()
        recs = [app.state.store.wait(i) for i in ids]
    assert all(r["state"] == "done" for r in recs)
    starts = [r["started"] for r in recs]
    assert starts == sorted(starts)
    assert all(a["finished"] <= b["started"] for a, b in zip(recs, recs[1:]))


def test_bad_requests(workdir):
    with TestClient(create_app(workdir)) as client:
        r = client.post("/jobs", json={"task": "screen", "inputs": {}, "params": {"top": 0}})
        assert r.status_code == 400
        fields = [e["field"] for e in r.json()["errors"]]
        assert any("seed" in f for f in fields) and any("top" in f for f in fields)
        assert all(e["message"] for e in r.json()["errors"])
        r = client.post("/jobs", content=b"{not json", headers={"content-type": "application/json"})
        assert r.status_code == 400
        assert client.get("/jobs/ffffffffffffffff").status_code == 404
        assert client.get("/jobs/..%2Fetc").status_code == 404
        job = client.post("/jobs", json=SIM).json()["id"]
        poll(client, job)
        assert client.get(f"/jobs/{job}/artifacts/nothing.csv").status_code == 404


def test_failed_job_records_error(workdir):
    with TestClient(create_app(workdir)) as client:
        job = client.post("/jobs", json={"task": "parse", "inputs": {"smiles": "absent.smi"}, "seed": 0}).json()["id"]
        seen = poll(client, job)
        assert seen[-1] == "failed" and is_subsequence(seen, ["queued", "running", "failed"])
        rec = client.get(f"/jobs/{job}").json()
        assert "absent.smi" in rec["error"] and rec["artifacts"] == []


@pytest.mark.parametrize("spec", [SIM, TRAIN], ids=["sim", "train"])
def test_artifacts_equal_cli_run(workdir, spec):
    (workdir / "job.json").write_text(json.dumps(spec))
    assert main(["run", str(workdir / "job.json"), "--out-dir", str(workdir / "cli-out")]) == 0
    with TestClient(create_app(workdir)) as client:
        job = client.post("/jobs", json=spec).json()["id"]
        poll(client, job)
        names = client.get(f"/jobs/{job}").json()["artifacts"]
        assert names == sorted(p.name for p in (workdir / "cli-out").iterdir())
        for name in names:
            assert client.get(f"/jobs/{job}/artifacts/{name}").content == (workdir / "cli-out" / name).read_bytes()


def test_restart_recovery(workdir):
    store = JobStore(workdir)
    first = store.submit(SIM)
    second = store.submit({**SIM, "seed": 1})
    store._update(first["id"], state="running", started=time.time())
    # a new process sees one interrupted job and one still waiting
    revived = JobStore(workdir)
    assert revived.read(first["id"])["state"] == "failed"
    assert "restart" in revived.read(first["id"])["error"]
    assert revived.queue.qsize() == 1
    revived.start()
    try:
        assert revived.wait(second["id"])["state"] == "done"
    finally:
        revived.stop()
    with TestClient(create_app(workdir)) as client:
        assert client.get(f"/jobs/{second['id']}").json()["state"] == "done"


def test_published_schemas_match_wire(workdir):
    assert published("jobspec.schema.json") == json.loads(json.dumps(SCHEMA))
    records = record_validator()
    errors = jsonschema.Draft202012Validator(published("errors.schema.json"))
    with TestClient(create_app(workdir)) as client:
        assert client.get("/schema").json() == published("jobspec.schema.json")
        job = client.post("/jobs", json=SIM).json()["id"]
        records.validate(client.get(f"/jobs/{job}").json())
        poll(client, job)
        records.validate(client.get(f"/jobs/{job}").json())
        errors.validate(client.post("/jobs", json={"task": "nope"}).json())
        errors.validate(client.post("/jobs", content=b"[", headers={"content-type": "application/json"}).json())
