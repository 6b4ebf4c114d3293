import pytest
from fastapi.testclient import TestClient

from careloop.config import RuntimeConfig
from careloop.demo import build_demo_backend
from careloop.gateway.base import ModelGateway
from careloop.session.api import create_app
from careloop.session.manager import SessionManager


@pytest.fixture
def manager(fixture_index):
    return SessionManager(
        ModelGateway(build_demo_backend()),
        index=fixture_index,
        config=RuntimeConfig(retrieval_budget_tokens=2000),
    )


@pytest.fixture
def client(manager):
    return TestClient(create_app(manager))


def create_session(client, scenario=None):
    response = client.post("/sessions", json={"scenario": scenario or {}})
    assert response.status_code == 200
    return response.json()["session_id"]


class TestSessions:
    def test_create_and_get_state(self, client):
        sid = create_session(client, {"case": "demo"})
        state = client.get(f"/sessions/{sid}/state").json()
        assert state["scenario"] == {"case": "demo"}
        assert state["visit_number"] == 1
        assert state["status"] == "active_visit"

    def test_list_sessions(self, client):
        sid = create_session(client)
        listing = client.get("/sessions").json()["sessions"]
        assert any(s["session_id"] == sid for s in listing)

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope/state").status_code == 404

    def test_message_round_trip(self, client, manager):
        sid = create_session(client)
        response = client.post(f"/sessions/{sid}/messages", json={"text": "I have chest pain"})
        assert response.status_code == 200
        assert response.json()["reply"]
        manager.drain()
        transcript = client.get(f"/sessions/{sid}/transcript").json()["messages"]
        assert transcript[0]["content"] == "I have chest pain"
        assert transcript[1]["role"] == "doctor"

    def test_message_between_visits_409(self, client, manager):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/messages", json={"text": "hello"})
        manager.drain()
        assert client.post(f"/sessions/{sid}/close").status_code == 200
        response = client.post(f"/sessions/{sid}/messages", json={"text": "more"})
        assert response.status_code == 409

    def test_advance_and_visit_cap(self, client, manager):
        sid = create_session(client)
        for expected in (2, 3):
            response = client.post(
                f"/sessions/{sid}/advance",
                json={"reports": [{"provider": "lab", "intervention": "cbc", "result": "ok"}]},
            )
            assert response.json()["visit_number"] == expected
        response = client.post(f"/sessions/{sid}/advance", json={"reports": []})
        assert response.status_code == 409
        manager.drain()

    def test_plan_endpoint(self, client, manager):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/messages", json={"text": "headache"})
        manager.drain()
        payload = client.get(f"/sessions/{sid}/plan").json()
        assert payload["plan"] is not None
        assert "| Category | Items | References |" in payload["markdown"]

    def test_questionnaire_endpoint(self, client, manager):
        sid = create_session(client)
        client.post(f"/sessions/{sid}/messages", json={"text": "headache"})
        manager.drain()
        payload = client.get(f"/sessions/{sid}/questionnaire").json()
        assert 1 <= len(payload["differential"]) <= 10
        assert set(payload["selected_guidelines"]) == {"NICE", "BMJ"}

    def test_guideline_lookup(self, client):
        payload = client.get("/guidelines/ng002").json()
        assert payload["title"] == "Headaches in over 12s"
        assert payload["corpus"] == "NICE"
        assert client.get("/guidelines/zzz").status_code == 404

    def test_empty_message_rejected(self, client):
        sid = create_session(client)
        assert client.post(f"/sessions/{sid}/messages", json={"text": ""}).status_code == 422


class TestAuth:
    def test_token_enforced_when_configured(self, manager):
        client = TestClient(create_app(manager, token="secret"))
        assert client.get("/sessions").status_code == 401
        ok = client.get("/sessions", headers={"Authorization": "Bearer secret"})
        assert ok.status_code == 200

    def test_no_token_open_access(self, client):
        assert client.get("/sessions").status_code == 200
