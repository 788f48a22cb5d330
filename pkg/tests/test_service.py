import pytest
from fastapi.testclient import TestClient

from bird.bundle import load_bundle
from bird.engine import PreferenceOverride, infer
from bird.errors import ValidationError
from bird.factors import PartialObservation
from bird.llm import FixtureProvider, FixtureStore
from bird.pool import EstimatorKind
from bird.service import create_app
from bird.sessions import SessionStore

WALKING = "You will be walking around the room."
PACING = "You pace around the room and the outlet is far away."
RED_CASE = "The phone case is red."
SEATED = "You will stay seated next to the outlet."


@pytest.fixture()
def bundle(demo_dir):
    return load_bundle(demo_dir / "bundle.json")


@pytest.fixture()
def provider(demo_dir):
    return FixtureProvider(FixtureStore.from_files([demo_dir / "transcript.jsonl"]))


@pytest.fixture()
def client(bundle, provider):
    app = create_app({"demo-cord": bundle}, provider=provider)
    return TestClient(app, raise_server_exceptions=False)


def create_session(client, condition=None):
    body = {"scenario_id": "demo-cord"}
    if condition is not None:
        body["condition_text"] = condition
    response = client.post("/sessions", json=body)
    assert response.status_code == 201, response.text
    return response.json()


class TestBasics:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "scenarios": 1}

    def test_scenarios_listing(self, client):
        response = client.get("/scenarios")
        assert response.status_code == 200
        (summary,) = response.json()
        assert summary["scenario_id"] == "demo-cord"
        assert summary["factor_count"] == 2
        assert summary["trained"] is True
        assert summary["outcome1"] == "Choose the longer cord"

    def test_unknown_scenario_is_404(self, client):
        response = client.post("/sessions", json={"scenario_id": "nope"})
        assert response.status_code == 404
        assert "nope" in response.json()["detail"]

    def test_unknown_session_is_404(self, client):
        assert client.get("/sessions/missing").status_code == 404


class TestConditionInference:
    def test_condition_maps_to_factors_and_estimate(self, client):
        view = create_session(client, WALKING)
        assert view["observation"] == {"f1": "f1v1"}
        assert view["estimate"]["p_outcome1"] == pytest.approx(0.825)
        assert view["estimate"]["p_outcome2"] == pytest.approx(0.175)
        assert view["estimate"]["verdict"] == "outcome1"
        assert view["estimate"]["kind"] == "trained"
        weights = [c["weight"] for c in view["estimate"]["contributions"]]
        assert sum(weights) == pytest.approx(1.0)

    def test_session_without_condition_is_unknown(self, client):
        view = create_session(client)
        assert view["observation"] == {}
        assert view["estimate"]["p_outcome1"] == pytest.approx(0.6)
        assert view["estimate"]["verdict"] == "unknown"

    def test_unmappable_condition_stays_unknown(self, client):
        view = create_session(client, RED_CASE)
        assert view["observation"] == {}
        assert view["estimate"]["verdict"] == "unknown"

    def test_second_condition_merges(self, client):
        view = create_session(client, WALKING)
        response = client.post(
            f"/sessions/{view['session_id']}/condition", json={"text": PACING}
        )
        assert response.status_code == 200
        merged = response.json()
        assert merged["observation"] == {"f1": "f1v1", "f2": "f2v1"}
        assert round(merged["estimate"]["p_outcome1"], 12) == 0.9

    def test_opposite_condition_flips_the_verdict(self, client):
        view = create_session(client, SEATED)
        assert view["estimate"]["p_outcome1"] == pytest.approx(0.375)
        assert view["estimate"]["verdict"] == "outcome2"

    def test_blank_condition_rejected(self, client):
        view = create_session(client)
        response = client.post(
            f"/sessions/{view['session_id']}/condition", json={"text": ""}
        )
        assert response.status_code == 422

    def test_condition_without_provider_is_503(self, bundle):
        app = create_app({"demo-cord": bundle})
        client = TestClient(app, raise_server_exceptions=False)
        response = client.post(
            "/sessions",
            json={"scenario_id": "demo-cord", "condition_text": WALKING},
        )
        assert response.status_code == 503
        # LLM-free paths still work.
        assert client.post(
            "/sessions", json={"scenario_id": "demo-cord"}
        ).status_code == 201


class TestQuestionFlow:
    def test_question_targets_unobserved_factor(self, client):
        view = create_session(client, WALKING)
        response = client.post(f"/sessions/{view['session_id']}/question")
        assert response.status_code == 200
        pending = response.json()["pending_question"]
        assert pending["factor_id"] == "f2"
        assert pending["value_id"] == "f2v1"
        assert pending["question_text"] == (
            "Is the outlet far from where you use the phone?"
        )

    def test_yes_answer_updates_estimate(self, client):
        view = create_session(client, WALKING)
        client.post(f"/sessions/{view['session_id']}/question")
        response = client.post(
            f"/sessions/{view['session_id']}/answer", json={"answer": "yes"}
        )
        assert response.status_code == 200
        after = response.json()
        assert after["pending_question"] is None
        assert after["observation"] == {"f1": "f1v1", "f2": "f2v1"}
        assert round(after["estimate"]["p_outcome1"], 12) == 0.9

    def test_no_answer_observes_the_other_value(self, client):
        view = create_session(client, WALKING)
        client.post(f"/sessions/{view['session_id']}/question")
        response = client.post(
            f"/sessions/{view['session_id']}/answer", json={"answer": "no"}
        )
        after = response.json()
        assert after["observation"] == {"f1": "f1v1", "f2": "f2v2"}
        assert after["estimate"]["p_outcome1"] == pytest.approx(0.75)

    def test_answer_without_question_is_409(self, client):
        view = create_session(client, WALKING)
        response = client.post(
            f"/sessions/{view['session_id']}/answer", json={"answer": "yes"}
        )
        assert response.status_code == 409

    def test_non_yes_no_answer_is_422(self, client):
        view = create_session(client, WALKING)
        client.post(f"/sessions/{view['session_id']}/question")
        response = client.post(
            f"/sessions/{view['session_id']}/answer", json={"answer": "maybe"}
        )
        assert response.status_code == 422

    def test_fully_observed_session_has_nothing_to_ask(self, client):
        view = create_session(client, PACING)
        response = client.post(f"/sessions/{view['session_id']}/question")
        assert response.status_code == 409


class TestOverrides:
    def test_override_moves_the_estimate(self, client, bundle):
        view = create_session(client)
        response = client.post(
            f"/sessions/{view['session_id']}/override",
            json={"factor_id": "f1", "value_id": "f1v1", "p": 0.9},
        )
        assert response.status_code == 200
        after = response.json()

        overrides = PreferenceOverride(values={("f1", "f1v1"): 0.9})
        expected = infer(
            bundle.space,
            bundle.table,
            PartialObservation.empty(),
            EstimatorKind.TRAINED,
            overrides,
        )
        assert after["estimate"]["p_outcome1"] == pytest.approx(
            expected.p_outcome1, abs=1e-12
        )
        assert after["overrides"] == [
            {"factor_id": "f1", "value_id": "f1v1", "p": 0.9}
        ]

    def test_factor_view_reflects_the_override(self, client):
        view = create_session(client)
        after = client.post(
            f"/sessions/{view['session_id']}/override",
            json={"factor_id": "f1", "value_id": "f1v1", "p": 0.9},
        ).json()
        factor = next(f for f in after["factors"] if f["factor_id"] == "f1")
        value = next(v for v in factor["values"] if v["value_id"] == "f1v1")
        assert value["p"] == pytest.approx(0.9)
        assert value["overridden"] is True
        untouched = next(v for v in factor["values"] if v["value_id"] == "f1v2")
        assert untouched["overridden"] is False

    def test_out_of_range_probability_is_422(self, client):
        view = create_session(client)
        response = client.post(
            f"/sessions/{view['session_id']}/override",
            json={"factor_id": "f1", "value_id": "f1v1", "p": 1.5},
        )
        assert response.status_code == 422

    def test_unknown_value_is_422(self, client):
        view = create_session(client)
        response = client.post(
            f"/sessions/{view['session_id']}/override",
            json={"factor_id": "f1", "value_id": "zzz", "p": 0.5},
        )
        assert response.status_code == 422


class TestSessionView:
    def test_factor_views_carry_table_and_observation(self, client):
        view = create_session(client, WALKING)
        assert view["scenario_text"].startswith("You want to charge")
        assert [f["factor_id"] for f in view["factors"]] == ["f1", "f2"]
        f1 = view["factors"][0]
        assert f1["observed_value_id"] == "f1v1"
        probs = {v["value_id"]: v["p"] for v in f1["values"]}
        assert probs == {"f1v1": 0.75, "f1v2": 0.25}
        observed = {v["value_id"]: v["observed"] for v in f1["values"]}
        assert observed == {"f1v1": True, "f1v2": False}
        assert view["loss_trace"] == []

    def test_history_tracks_each_event_with_estimates(self, client):
        view = create_session(client, WALKING)
        session_id = view["session_id"]
        client.post(f"/sessions/{session_id}/question")
        client.post(f"/sessions/{session_id}/answer", json={"answer": "yes"})
        final = client.get(f"/sessions/{session_id}").json()
        events = [item["event"] for item in final["history"]]
        assert events == ["created", "question", "answer"]
        assert final["history"][0]["estimate_after"]["p_outcome1"] == pytest.approx(
            0.825
        )
        assert round(
            final["history"][2]["estimate_after"]["p_outcome1"], 12
        ) == 0.9
        assert final["history"][2]["detail"] == {"answer": True}

    def test_probabilities_are_wire_rounded(self, client):
        view = create_session(client, WALKING)
        estimate = view["estimate"]
        assert estimate["p_outcome1"] == 0.825
        assert estimate["p_outcome2"] == 0.175
        for contribution in estimate["contributions"]:
            assert contribution["weight"] == round(contribution["weight"], 12)
            assert contribution["p_outcome1"] == round(
                contribution["p_outcome1"], 12
            )
        response = client.post(
            f"/sessions/{view['session_id']}/override",
            json={"factor_id": "f1", "value_id": "f1v1", "p": 0.6},
        )
        overridden = response.json()["estimate"]
        assert overridden["p_outcome1"] == round(overridden["p_outcome1"], 12)
        assert overridden["p_outcome2"] == round(overridden["p_outcome2"], 12)


class TestPersistence:
    def test_sessions_survive_a_restart(self, bundle, provider, tmp_path):
        log = tmp_path / "sessions.jsonl"
        first = TestClient(
            create_app(
                {"demo-cord": bundle},
                store=SessionStore({"demo-cord": bundle}, log),
                provider=provider,
            ),
            raise_server_exceptions=False,
        )
        view = create_session(first, WALKING)
        first.post(
            f"/sessions/{view['session_id']}/override",
            json={"factor_id": "f2", "value_id": "f2v2", "p": 0.4},
        )
        before = first.get(f"/sessions/{view['session_id']}").json()

        second = TestClient(
            create_app(
                {"demo-cord": bundle},
                store=SessionStore({"demo-cord": bundle}, log),
                provider=provider,
            ),
            raise_server_exceptions=False,
        )
        after = second.get(f"/sessions/{view['session_id']}")
        assert after.status_code == 200
        assert after.json() == before


class TestErrorMapping:
    def test_validation_error_maps_to_422(self, bundle):
        app = create_app({"demo-cord": bundle})
        client = TestClient(app, raise_server_exceptions=False)
        with pytest.raises(ValidationError):
            bundle.space.factor_by_id("zzz")
        view = create_session(client)
        response = client.post(
            f"/sessions/{view['session_id']}/override",
            json={"factor_id": "zzz", "value_id": "f1v1", "p": 0.5},
        )
        assert response.status_code == 422

    def test_missing_body_fields_are_422(self, client):
        assert client.post("/sessions", json={}).status_code == 422
        view = create_session(client)
        assert (
            client.post(
                f"/sessions/{view['session_id']}/override", json={"p": 0.5}
            ).status_code
            == 422
        )
