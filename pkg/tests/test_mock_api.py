import json

import httpx
import pytest

from nirikshak.mock_api import BugFlags, MockServer, main

ROW = {"id": "s1", "name": "Zoe Lee", "age": 19, "branch": "CSE", "address": "1 Oak Road, Pune"}


@pytest.fixture
def client(mock):
    with httpx.Client(base_url=mock.url) as c:
        yield c


def test_crud_semantics(client):
    assert client.get("/student/s1").status_code == 404
    assert client.post("/student", json=ROW).status_code == 201
    assert client.post("/student", json=ROW).status_code == 409
    r = client.get("/student/s1")
    assert r.status_code == 200 and r.json() == ROW
    r = client.patch("/student/s1", json={"name": "Ana"})
    assert r.status_code == 200 and r.json()["name"] == "Ana"
    assert client.put("/student/s1", json=ROW).status_code == 200
    assert client.put("/student/s2", json=dict(ROW, id="s2")).status_code == 201
    assert client.delete("/student/s1").status_code == 204
    assert client.delete("/student/s1").status_code == 404
    assert client.patch("/student/s1", json={"name": "x"}).status_code == 404


def test_malformed_bodies(client):
    assert client.post("/student", content=b"{nope").status_code == 400
    assert client.post("/student", json=dict(ROW, age="old")).status_code == 400
    assert client.post("/student", json={"id": "x"}).status_code == 400
    assert client.put("/student/other", json=ROW).status_code == 400


def test_conditional_put_on_missing(client):
    assert client.put("/student/s1", json=ROW, headers={"If-Match": "*"}).status_code == 412
    client.post("/student", json=ROW)
    assert client.put("/student/s1", json=ROW, headers={"If-Match": "*"}).status_code == 200


def test_admin_endpoints(client):
    client.post("/__admin/seed", json=[ROW])
    assert client.get("/__admin/state").json() == [ROW]
    client.post("/__admin/purge", json=[ROW])
    assert client.get("/__admin/state").json() == []
    client.post("/__admin/seed", json=[ROW])
    client.post("/__admin/reset")
    assert client.get("/student/s1").status_code == 404


@pytest.mark.parametrize(
    "flag, call, status",
    [
        ("getMissingReturns200", lambda c: c.get("/student/zz"), 200),
        ("deleteMissingReturns200", lambda c: c.delete("/student/zz"), 200),
        ("postDuplicateCreates", lambda c: (c.post("/student", json=ROW), c.post("/student", json=ROW))[1], 201),
        ("putWrongStatus", lambda c: c.put("/student/s1", json=ROW), 202),
    ],
)
def test_each_bug_flag(mock, client, flag, call, status):
    mock.store.bugs = BugFlags.only(flag)
    r = call(client)
    assert r.status_code == status
    if flag == "getMissingReturns200":
        assert r.content == b""


def test_patch_drops_field(mock, client):
    mock.store.bugs = BugFlags.only("patchDropsField")
    client.post("/student", json=ROW)
    r = client.patch("/student/s1", json={"branch": "ME"})
    assert r.status_code == 200 and "name" not in r.json()
    assert client.get("/student/s1").json()["name"] == ROW["name"]  # storage untouched


def test_bug_free_by_default():
    assert not any(vars(BugFlags()).values())
    with pytest.raises(ValueError):
        BugFlags.only("nonsense")


def test_port_in_use(mock):
    port = int(mock.url.rsplit(":", 1)[1])
    with pytest.raises(OSError):
        MockServer(port)


def test_hook_commands_talk_to_admin(mock, monkeypatch, capsys):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps([ROW])))
    assert main(["seed", "--base-url", mock.url]) == 0
    assert mock.store.rows == {"s1": ROW}
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps([ROW])))
    assert main(["purge", "--base-url", mock.url]) == 0
    assert mock.store.rows == {}


def test_context_manager_serves_and_stops():
    with MockServer() as server:
        with httpx.Client(base_url=server.url, timeout=5) as c:
            assert c.get("/student/nope").status_code == 404
    MockServer().stop()  # never started: must not block
