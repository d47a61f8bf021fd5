import hashlib
import math

import numpy as np
import pytest
import torch

from langtraffic import synth
from langtraffic.core import StructuredScenario, ValidationError
from langtraffic.generator import (
    ContextGate,
    GeneratorConfig,
    ScenarioGenerator,
    SinusoidalCodeEncoder,
    build_model,
    code_array,
    generate_scenario,
    lane_features,
    load_checkpoint,
    masked_max_pool,
    sample_scenario,
    save_checkpoint,
)
from langtraffic.interpreter import fallback_interpret

SMALL = GeneratorConfig(d=32, mcg_blocks=2, transformer_layers=2, heads=4,
                        dropout=0.0, gmm_components=2, motion_modes=3,
                        attribute_mlp_width=32, max_lanes=16, max_agents=4,
                        horizon=50)


@pytest.fixture(scope="module")
def small_model():
    return build_model(SMALL, seed=11)


def _inputs(model, region, code):
    feats, lane_mask = lane_features(region, model.config.max_lanes)
    codes, agent_mask = code_array(code, model.config.max_agents)
    return (torch.as_tensor(feats).unsqueeze(0),
            torch.as_tensor(lane_mask).unsqueeze(0),
            torch.as_tensor(codes).unsqueeze(0),
            torch.as_tensor(agent_mask).unsqueeze(0))


def _small_region():
    lanes = synth.chop((-30.0, 0.0), (30.0, 0.0), 12.0, 1, synth.LaneType.CENTER)
    lanes += synth.chop((30.0, 3.5), (-30.0, 3.5), 12.0, 1 + len(lanes), synth.LaneType.CENTER)
    from langtraffic.core import MapRegion
    return MapRegion(lanes=tuple(lanes), region_id="small", center=(0.0, 0.0))


def _code(n=3):
    base = fallback_interpret("the scenario is with medium density")
    return StructuredScenario(map_abstract=base.map_abstract, agents=base.agents[:n])


class TestContextGate:
    def test_single_row_context_is_the_row(self):
        x = torch.rand(1, 1, 4, dtype=torch.float64)
        mask = torch.ones(1, 1, dtype=torch.bool)
        assert torch.equal(masked_max_pool(x, mask), x[:, 0, :])

    def test_duplicate_rows_give_identical_outputs(self):
        gate = ContextGate(8).double()
        row = torch.rand(1, 1, 8, dtype=torch.float64)
        x = row.repeat(1, 3, 1)
        mask = torch.ones(1, 3, dtype=torch.bool)
        out = gate(x, mask)
        assert torch.allclose(out[0, 0], out[0, 1])
        assert torch.allclose(out[0, 0], out[0, 2])

    def test_identity_mlps_reduce_to_hand_product(self):
        # With both branches forced to the identity, the gate is v_i * max(v).
        gate = ContextGate(2).double()
        with torch.no_grad():
            for mlp in (gate.row_mlp, gate.context_mlp):
                mlp[0].weight.copy_(torch.eye(2))
                mlp[0].bias.zero_()
                mlp[2].weight.copy_(torch.eye(2))
                mlp[2].bias.zero_()
        # GELU is identity-like only asymptotically; use values where
        # gelu(x) ~= x to far better than test tolerance.
        x = torch.tensor([[[8.0, 9.0], [10.0, 7.0]]], dtype=torch.float64)
        mask = torch.ones(1, 2, dtype=torch.bool)
        expected = x[0] * torch.tensor([10.0, 9.0], dtype=torch.float64)
        assert torch.allclose(gate(x, mask), expected.unsqueeze(0), atol=1e-8)

    def test_masked_rows_excluded_from_context(self):
        x = torch.tensor([[[1.0, 1.0], [99.0, 99.0]]])
        mask = torch.tensor([[True, False]])
        assert torch.equal(masked_max_pool(x, mask), torch.tensor([[1.0, 1.0]]))

    def test_all_masked_is_error(self):
        with pytest.raises(ValidationError):
            masked_max_pool(torch.rand(1, 2, 4), torch.zeros(1, 2, dtype=torch.bool))


class TestSinusoidalEncoder:
    def test_zero_vector_matches_analytic_pattern(self):
        encoder = SinusoidalCodeEncoder(32)
        out = encoder(torch.zeros(1, 8, dtype=torch.int64))[0]
        per_field = 32 // 8
        expected_field = [0.0 if i % 2 == 0 else 1.0 for i in range(per_field)]
        assert out.tolist() == pytest.approx(expected_field * 8)

    def test_distinct_codes_distinct_embeddings(self):
        encoder = SinusoidalCodeEncoder(64)
        a = encoder(torch.tensor([[1, 0, 0, 1, 4, 4, 4, 4]]))
        b = encoder(torch.tensor([[2, 0, 0, 1, 4, 4, 4, 4]]))
        assert not torch.allclose(a, b)


class TestEncodeMap:
    def test_lane_permutation_equivariance(self, small_model):
        region = _small_region()
        feats, mask = lane_features(region, SMALL.max_lanes)
        n = len(region.lanes)
        perm = np.concatenate([np.random.RandomState(0).permutation(n),
                               np.arange(n, SMALL.max_lanes)])
        with torch.no_grad():
            base = small_model.encode_map(torch.as_tensor(feats).unsqueeze(0),
                                          torch.as_tensor(mask).unsqueeze(0))
            permuted = small_model.encode_map(
                torch.as_tensor(feats[perm]).unsqueeze(0),
                torch.as_tensor(mask[perm]).unsqueeze(0))
        assert torch.allclose(base[0, perm], permuted[0], atol=1e-5)

    def test_fully_masked_rejected(self, small_model):
        feats = torch.zeros(1, 4, 11)
        with pytest.raises(ValidationError):
            small_model.encode_map(feats, torch.zeros(1, 4, dtype=torch.bool))

    def test_too_many_lanes_rejected(self, small_model):
        feats = torch.zeros(1, SMALL.max_lanes + 1, 11)
        mask = torch.ones(1, SMALL.max_lanes + 1, dtype=torch.bool)
        with pytest.raises(ValidationError):
            small_model.encode_map(feats, mask)

    def test_golden_checksum_stable(self, small_model):
        region = _small_region()
        feats, mask = lane_features(region, SMALL.max_lanes)
        with torch.no_grad():
            out = small_model.encode_map(torch.as_tensor(feats).unsqueeze(0),
                                         torch.as_tensor(mask).unsqueeze(0))
        digest = hashlib.sha256(np.round(out.numpy(), 5).tobytes()).hexdigest()
        with torch.no_grad():
            again = small_model.encode_map(torch.as_tensor(feats).unsqueeze(0),
                                           torch.as_tensor(mask).unsqueeze(0))
        assert hashlib.sha256(np.round(again.numpy(), 5).tobytes()).hexdigest() == digest


class TestQueries:
    def test_identical_codes_differ_by_slot(self, small_model):
        code = _code(2)
        codes = torch.as_tensor(np.stack([code.agents[0].to_ints()] * 2)).unsqueeze(0)
        with torch.no_grad():
            q = small_model.build_queries(codes)
        assert not torch.allclose(q[0, 0], q[0, 1])

    def test_inference_determinism(self, small_model):
        codes = torch.as_tensor(np.stack([a.to_ints() for a in _code(3).agents])).unsqueeze(0)
        with torch.no_grad():
            q1 = small_model.build_queries(codes)
            q2 = small_model.build_queries(codes)
        assert torch.equal(q1, q2)

    def test_agent_cap_enforced(self, small_model):
        codes = torch.zeros(1, SMALL.max_agents + 1, 8, dtype=torch.int64)
        with pytest.raises(ValidationError):
            small_model.build_queries(codes)


class TestDecode:
    def test_probabilities_normalize(self, small_model):
        region, code = _small_region(), _code(3)
        with torch.no_grad():
            output = small_model(*_inputs(small_model, region, code))
        live = output.lane_probs[0, :, :].sum(-1)
        assert torch.allclose(live, torch.ones_like(live), atol=1e-6)
        mode_sums = output.mode_probs[0].sum(-1)
        assert torch.allclose(mode_sums, torch.ones_like(mode_sums), atol=1e-6)
        for gmm in output.attributes.values():
            sums = gmm.weights[0].sum(-1)
            assert torch.allclose(sums, torch.ones_like(sums), atol=1e-6)

    def test_normalization_over_random_inits(self):
        for seed in range(5):
            model = build_model(SMALL, seed=seed)
            with torch.no_grad():
                output = model(*_inputs(model, _small_region(), _code(2)))
            assert torch.allclose(output.lane_probs[0].sum(-1),
                                  torch.ones(SMALL.max_agents), atol=1e-6)

    def test_masked_lanes_probability_exactly_zero(self, small_model):
        region = _small_region()
        with torch.no_grad():
            output = small_model(*_inputs(small_model, region, _code(2)))
        dead = output.lane_probs[0, :, len(region.lanes):]
        assert torch.equal(dead, torch.zeros_like(dead))

    def test_equal_lane_embeddings_give_uniform(self, small_model):
        region, code = _small_region(), _code(2)
        inputs = _inputs(small_model, region, code)
        lanes = small_model.encode_map(inputs[0], inputs[1])
        queries = small_model.build_queries(inputs[2])
        with torch.no_grad():
            output = small_model.decode_agents(queries, torch.zeros_like(lanes),
                                               inputs[1], inputs[3])
        n_live = len(region.lanes)
        live = output.lane_probs[0, 0, :n_live]
        assert torch.allclose(live, torch.full((n_live,), 1.0 / n_live), atol=1e-6)

    def test_variances_strictly_positive(self):
        for seed in (0, 1, 2):
            model = build_model(SMALL, seed=seed)
            with torch.no_grad():
                output = model(*_inputs(model, _small_region(), _code(2)))
            for gmm in output.attributes.values():
                assert float(gmm.variances.min()) >= 1e-4


class TestSampling:
    def test_agent_count_preserved(self, small_model):
        for n in (1, 2, 4):
            scenario, _ = generate_scenario(small_model, _code(n), _small_region())
            assert len(scenario.agents) == n
            assert scenario.ego_index == 0

    def test_dominant_component_mean_selected(self, small_model):
        region, code = _small_region(), _code(1)
        scenario, output = generate_scenario(small_model, code, region)
        gmm = output.attributes["heading"]
        component = int(gmm.log_weights[0, 0].argmax())
        expected = float(gmm.means[0, 0, component, 0])
        from langtraffic.core.geometry import wrap_angle
        assert scenario.agents[0].states[0].heading == pytest.approx(wrap_angle(expected))

    def test_zero_shift_lands_on_lane_midpoint(self, small_model):
        region, code = _small_region(), _code(1)
        _, output = generate_scenario(small_model, code, region)
        with torch.no_grad():
            output.attributes["shift"].means.zero_()
        scenario = sample_scenario(output, code, region)
        lane_idx = int(output.lane_probs[0, 0].argmax())
        lane = region.lanes[lane_idx]
        mid = ((lane.start[0] + lane.end[0]) / 2, (lane.start[1] + lane.end[1]) / 2)
        assert scenario.agents[0].states[0].position == pytest.approx(mid)

    def test_constant_step_mode_gives_constant_speed(self, small_model):
        region, code = _small_region(), _code(1)
        _, output = generate_scenario(small_model, code, region)
        with torch.no_grad():
            mode = int(output.mode_probs[0, 0].argmax())
            steps = torch.arange(1, 50, dtype=output.trajectories.dtype) * 0.5
            output.trajectories[0, 0, mode, :, 0] = steps
            output.trajectories[0, 0, mode, :, 1] = 0.0
            output.trajectories[0, 0, mode, :, 2] = 0.0
            output.attributes["speed"].means[0, 0, :, 0] = 5.0
        scenario = sample_scenario(output, code, region)
        speeds = [s.speed for s in scenario.agents[0].states]
        assert speeds == pytest.approx([5.0] * 50)

    def test_lane_permutation_leaves_sampled_scenario_identical(self, small_model):
        from langtraffic.core import MapRegion
        region, code = _small_region(), _code(3)
        scenario, _ = generate_scenario(small_model, code, region)
        perm = np.random.RandomState(3).permutation(len(region.lanes))
        permuted_region = MapRegion(lanes=tuple(region.lanes[i] for i in perm),
                                    region_id=region.region_id, center=region.center)
        permuted_scenario, _ = generate_scenario(small_model, code, permuted_region)
        for a, b in zip(scenario.agents, permuted_scenario.agents):
            assert a.states[0].x == pytest.approx(b.states[0].x, abs=1e-5)
            assert a.states[0].y == pytest.approx(b.states[0].y, abs=1e-5)


class TestCheckpoint:
    def test_round_trip(self, small_model, tmp_path):
        path = tmp_path / "model.pt"
        save_checkpoint(small_model, path, extra={"epoch": 3})
        restored, extra = load_checkpoint(path)
        assert extra == {"epoch": 3}
        assert restored.config == small_model.config
        for (_, a), (_, b) in zip(small_model.state_dict().items(),
                                  restored.state_dict().items()):
            assert torch.equal(a, b)

    def test_shape_mismatch_refused(self, small_model, tmp_path):
        path = tmp_path / "model.pt"
        save_checkpoint(small_model, path)
        payload = torch.load(path, weights_only=False)
        payload["state_dict"]["lane_proj.weight"] = torch.zeros(3, 3)
        torch.save(payload, path)
        with pytest.raises(ValidationError, match="lane_proj"):
            load_checkpoint(path)

    def test_unknown_config_field_refused(self, small_model, tmp_path):
        path = tmp_path / "model.pt"
        save_checkpoint(small_model, path)
        payload = torch.load(path, weights_only=False)
        payload["config"]["mystery_knob"] = 7
        torch.save(payload, path)
        with pytest.raises(ValidationError, match="mystery_knob"):
            load_checkpoint(path)


def test_config_defaults_match_reference_setup():
    config = GeneratorConfig()
    assert (config.d, config.mcg_blocks, config.transformer_layers) == (256, 5, 2)
    assert (config.heads, config.dropout) == (4, 0.1)
    assert (config.gmm_components, config.motion_modes) == (5, 12)
    assert config.attribute_mlp_width == 512
    assert (config.max_lanes, config.max_agents, config.horizon) == (384, 32, 50)


def test_config_validation():
    with pytest.raises(ValidationError):
        GeneratorConfig(d=30)  # not divisible by heads=4 after the 8-field split
    with pytest.raises(ValidationError):
        GeneratorConfig(dropout=1.5)
    with pytest.raises(ValidationError):
        GeneratorConfig(max_lanes=0)
