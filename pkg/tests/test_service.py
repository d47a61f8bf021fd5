import json

import pytest
from fastapi.testclient import TestClient

from langtraffic.appconfig import AppConfig
from langtraffic.core import scenario_from_document, serialize
from langtraffic.generator import GeneratorConfig, build_model
from langtraffic.interpreter import OfflineEditClient
from langtraffic.pipeline import Runtime, bundled_index
from langtraffic.service import create_app

SERVICE_MODEL = GeneratorConfig(d=32, mcg_blocks=2, transformer_layers=2, heads=4,
                                dropout=0.0, gmm_components=2, motion_modes=3,
                                attribute_mlp_width=32, max_lanes=64, max_agents=32,
                                horizon=50)


@pytest.fixture()
def client(tmp_path):
    config = AppConfig(offline=True, store_dir=str(tmp_path / "store"))
    runtime = Runtime(config=config, model=build_model(SERVICE_MODEL, seed=5).eval(),
                      index=bundled_index(), chat_client=None,
                      edit_client=OfflineEditClient())
    app = create_app(config, runtime=runtime)
    return TestClient(app)


def test_health(client):
    response = client.get("/v1/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["offline"] is True
    assert body["index_size"] > 0


def test_generate_offline_deterministic(client):
    request = {"text": "the scenario is sparse", "seed": 7}
    first = client.post("/v1/generate", json=request)
    assert first.status_code == 200
    second = client.post("/v1/generate", json=request)
    assert first.content == second.content
    body = first.json()
    assert len(body["scenario"]["agents"]) == 6
    assert body["seed"] == 7
    assert body["code"]["map"] == [2, 2, 2, 2, 2, 1]


def test_generate_empty_text_is_400(client):
    response = client.post("/v1/generate", json={"text": "   "})
    assert response.status_code == 400


def test_generate_unrecognized_text_is_400_offline(client):
    response = client.post("/v1/generate", json={"text": "a purple elephant"})
    assert response.status_code == 400
    assert "supported" in response.json()["detail"]


def test_generate_exact_match_k1(client):
    # The offline default map code matches the grid junction region exactly.
    response = client.post("/v1/generate",
                           json={"text": "the scenario is sparse", "seed": 3, "k": 1})
    assert response.status_code == 200
    assert response.json()["region_id"] == "grid:8"


def test_generate_with_map_id(client):
    response = client.post("/v1/generate", json={
        "text": "the scenario is nearly empty", "seed": 1, "map_id": "highway:0"})
    assert response.status_code == 200
    assert response.json()["region_id"] == "highway:0"


def test_persistence_round_trip(client):
    created = client.post("/v1/generate",
                          json={"text": "the scenario is sparse", "seed": 11}).json()
    sid = created["scenario_id"]
    fetched = client.get(f"/v1/scenarios/{sid}")
    assert fetched.status_code == 200
    # The stored document is byte-identical to the canonical serialization
    # of the scenario the response carried.
    scenario = scenario_from_document(created["scenario"])
    assert fetched.content == serialize(scenario)


def test_get_unknown_scenario_404(client):
    assert client.get("/v1/scenarios/deadbeef00000000").status_code == 404


def test_frames_endpoint(client):
    created = client.post("/v1/generate",
                          json={"text": "the scenario is nearly empty", "seed": 2}).json()
    sid = created["scenario_id"]
    frame = client.get(f"/v1/scenarios/{sid}/frames/1")
    assert frame.status_code == 200
    assert frame.headers["content-type"] == "image/png"
    assert frame.content[:8] == b"\x89PNG\r\n\x1a\n"
    assert client.get(f"/v1/scenarios/{sid}/frames/0").status_code == 400
    assert client.get(f"/v1/scenarios/{sid}/frames/51").status_code == 400


def test_edit_remove_vehicle(client):
    created = client.post("/v1/generate",
                          json={"text": "the scenario is nearly empty", "seed": 4}).json()
    assert len(created["scenario"]["agents"]) == 2
    edited = client.post("/v1/edit", json={
        "scenario_id": created["scenario_id"],
        "instruction": "remove vehicle 2",
    })
    assert edited.status_code == 200
    body = edited.json()
    assert len(body["scenario"]["agents"]) == 1
    assert body["region_id"] == created["region_id"]
    assert len(body["code_before"]["agents"]) == 2
    assert len(body["code_after"]["agents"]) == 1


def test_edit_keeps_the_map(client):
    created = client.post("/v1/generate",
                          json={"text": "the scenario is sparse", "seed": 9}).json()
    edited = client.post("/v1/edit", json={
        "scenario_id": created["scenario_id"],
        "instruction": "add a vehicle behind the ego",
    }).json()
    assert edited["scenario"]["map"] == created["scenario"]["map"]
    assert len(edited["scenario"]["agents"]) == 7


def test_edit_identity_instruction(client):
    created = client.post("/v1/generate",
                          json={"text": "the scenario is nearly empty", "seed": 6}).json()
    edited = client.post("/v1/edit", json={
        "scenario_id": created["scenario_id"],
        "instruction": "keep everything the same",
    }).json()
    assert edited["code_after"] == edited["code_before"]


def test_edit_unknown_scenario_404(client):
    response = client.post("/v1/edit", json={
        "scenario_id": "0000000000000000", "instruction": "remove vehicle 2"})
    assert response.status_code == 404


def test_edit_inline_scenario(client):
    created = client.post("/v1/generate",
                          json={"text": "the scenario is nearly empty", "seed": 8}).json()
    response = client.post("/v1/edit", json={
        "scenario": created["scenario"], "instruction": "keep everything the same"})
    assert response.status_code == 200


def test_edit_requires_target(client):
    response = client.post("/v1/edit", json={"instruction": "remove vehicle 2"})
    assert response.status_code == 400
