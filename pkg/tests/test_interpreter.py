import pytest
from hypothesis import given, settings, strategies as st

from langtraffic.core import (
    Action,
    AgentAbstract,
    MapAbstract,
    Orientation,
    StructuredScenario,
)
from langtraffic.interpreter import (
    BlockParseError,
    GrammarError,
    OfflineEditClient,
    PromptMode,
    ResponseParseError,
    StubChatClient,
    TransportError,
    edit_request_text,
    extract_vectors,
    fallback_interpret,
    interpret,
    interpret_edit,
    load_template,
    parse_structured_block,
    render_structured_block,
)

CANONICAL = (
    "Summary: two vehicles near a crossing.\n"
    "Map: [2, 2, 2, 2, 1, 1]\n"
    "Actor V1: [1, 0, 0, 1, 4, 4, 4, 4]\n"
    "Actor V2: [2, 1, 1, 3, 6, 6, 7, 7]\n"
)


class TestParser:
    def test_canonical_two_actor_block(self):
        code = parse_structured_block(CANONICAL)
        assert code.map_abstract.to_ints() == [2, 2, 2, 2, 1, 1]
        assert len(code.agents) == 2
        assert code.agents[1].to_ints() == [2, 1, 1, 3, 6, 6, 7, 7]

    def test_prose_interleaved_matches_canonical(self):
        noisy = (
            "Let me think about this scene step by step.\n"
            "Summary: two vehicles near a crossing.\n"
            "The map should be a four-way crossing with two lanes everywhere.\n"
            "Map: [2, 2, 2, 2, 1, 1]\n"
            "The ego drives forward at a moderate speed.\n"
            "Actor V1: [1, 0, 0, 1, 4, 4, 4, 4]\n"
            "A second car ahead-left brakes to a stop.\n"
            "Actor V2: [2, 1, 1, 3, 6, 6, 7, 7]\n"
            "That should capture the description.\n"
        )
        assert parse_structured_block(noisy) == parse_structured_block(CANONICAL)

    def test_wrong_map_arity_rejected(self):
        with pytest.raises(BlockParseError, match="6 entries"):
            parse_structured_block("Map: [1, 2]")

    def test_wrong_agent_arity_rejected(self):
        with pytest.raises(BlockParseError, match="8 entries"):
            parse_structured_block("Map: [2,2,2,2,1,1]\nActor V1: [1, 2, 3]")

    def test_non_integer_token_named(self):
        with pytest.raises(BlockParseError, match="fast"):
            parse_structured_block("Map: [2,2,2,2,1,1]\nActor V1: [1,0,0,fast,4,4,4,4]")

    def test_missing_map_vector(self):
        with pytest.raises(BlockParseError, match="map"):
            parse_structured_block("Actor V1: [1,0,0,1,4,4,4,4]")

    def test_bare_bracket_lines_count_as_agents(self):
        code = parse_structured_block("Map: [1,1,0,0,15,1]\n[1,0,0,1,4,4,4,4]")
        assert len(code.agents) == 1

    def test_summary_collected(self):
        _, _, summary = extract_vectors(CANONICAL)
        assert summary == "two vehicles near a crossing."


@st.composite
def structured_codes(draw):
    n = draw(st.integers(1, 6))
    agents = tuple(
        AgentAbstract(
            quadrant=draw(st.integers(1, 4)),
            distance_bin=draw(st.integers(0, 7)),
            orientation=draw(st.sampled_from(list(Orientation))),
            speed_bin=draw(st.integers(0, 7)),
            actions=tuple(draw(st.sampled_from(list(Action))) for _ in range(4)),
        )
        for _ in range(n)
    )
    map_abstract = MapAbstract(
        lanes_by_direction=tuple(draw(st.integers(0, 6)) for _ in range(4)),
        intersection_distance_bin=draw(st.integers(0, 15)),
        ego_lane_id=draw(st.integers(1, 6)),
    )
    return StructuredScenario(map_abstract=map_abstract, agents=agents)


@settings(max_examples=50, deadline=None)
@given(structured_codes())
def test_parse_render_round_trip(code):
    assert parse_structured_block(render_structured_block(code)) == code


class TestTemplates:
    def test_generation_template_uses_20m_bins(self):
        template = load_template(PromptMode.GENERATION)
        assert "20-meter" in template.representation_spec
        assert template.few_shot_examples

    def test_editing_template_uses_5m_bins(self):
        template = load_template(PromptMode.EDITING)
        assert "5-meter" in template.representation_spec

    def test_messages_layout(self):
        template = load_template(PromptMode.GENERATION)
        messages = template.messages("two cars on a highway")
        assert messages[0]["role"] == "system"
        assert messages[-1] == {"role": "user", "content": "two cars on a highway"}
        assert len(messages) == 2 + 2 * len(template.few_shot_examples)


class TestInterpret:
    def test_stub_identity(self):
        stub = StubChatClient.fixed(CANONICAL)
        output = interpret("two vehicles near a crossing", stub)
        assert output.structured == parse_structured_block(CANONICAL)
        assert output.summary == "two vehicles near a crossing."
        assert output.raw_response == CANONICAL

    def test_crash_report_style_fixture(self):
        response = (
            "Summary: the ego waits at a crossing while V2 runs the light.\n"
            "Map: [2, 2, 2, 2, 1, 1]\n"
            "Actor V1: [1, 0, 0, 0, 7, 7, 7, 7]\n"
            "Actor V2: [2, 2, 3, 4, 4, 4, 4, 4]\n"
        )
        output = interpret("crash report text", StubChatClient.fixed(response))
        assert output.structured.map_abstract.to_ints() == [2, 2, 2, 2, 1, 1]
        assert len(output.structured.agents) == 2

    def test_out_of_range_quadrant_clamped_with_warning(self):
        response = "Map: [2,2,2,2,1,1]\nActor V1: [7, 0, 0, 1, 4, 4, 4, 4]"
        output = interpret("text", StubChatClient.fixed(response))
        assert output.structured.agents[0].quadrant == 4
        assert any("quadrant" in w for w in output.warnings)

    def test_temperature_defaults_to_0_2(self):
        captured = {}

        class SpyClient:
            def send(self, messages, temperature):
                captured["temperature"] = temperature
                return CANONICAL

        interpret("text", SpyClient())
        assert captured["temperature"] == 0.2

    def test_retry_then_success(self):
        stub = StubChatClient(["no vectors here at all", CANONICAL])
        output = interpret("text", stub)
        assert output.structured == parse_structured_block(CANONICAL)
        assert len(stub.calls) == 2
        assert "could not be parsed" in stub.calls[1][-1]["content"]

    def test_parse_error_after_retries_carries_raw(self):
        stub = StubChatClient.fixed("still narrative, no code")
        with pytest.raises(ResponseParseError) as err:
            interpret("text", stub)
        assert err.value.raw_response == "still narrative, no code"
        assert len(stub.calls) == 3  # initial + 2 retries

    def test_transport_error_propagates(self):
        class DownClient:
            def send(self, messages, temperature):
                raise TransportError("backend down")

        with pytest.raises(TransportError):
            interpret("text", DownClient())

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            interpret("   ", StubChatClient.fixed(CANONICAL))

    def test_agent_count_clamped_to_32(self):
        lines = ["Map: [2,2,2,2,1,1]"]
        lines += [f"Actor V{i}: [1, 0, 0, 1, 4, 4, 4, 4]" for i in range(1, 40)]
        output = interpret("text", StubChatClient.fixed("\n".join(lines)))
        assert len(output.structured.agents) == 32
        assert any("agent count" in w for w in output.warnings)


def _four_agent_code() -> StructuredScenario:
    return StructuredScenario(
        map_abstract=MapAbstract((2, 2, 0, 0), 15, 1),
        agents=tuple(
            AgentAbstract(quadrant=q, distance_bin=d, orientation=Orientation.NORTH,
                          speed_bin=1, actions=(Action.FORWARD,) * 4)
            for q, d in ((1, 0), (1, 4), (2, 9), (3, 2))
        ),
    )


class TestInterpretEdit:
    def test_remove_vehicle(self):
        code = _four_agent_code()
        output = interpret_edit(code, "remove vehicle 3", OfflineEditClient())
        assert len(output.structured.agents) == 3
        remaining = [a.to_ints() for a in output.structured.agents]
        original = [a.to_ints() for a in code.agents]
        assert remaining == [original[0], original[1], original[3]]
        assert not output.warnings

    def test_add_vehicle_behind(self):
        code = _four_agent_code()
        output = interpret_edit(code, "add a vehicle behind the ego", OfflineEditClient())
        assert len(output.structured.agents) == 5
        assert output.structured.agents[-1].quadrant in (3, 4)

    def test_identity_instruction(self):
        code = _four_agent_code()
        output = interpret_edit(code, "keep everything the same", OfflineEditClient())
        assert output.structured == code
        assert not output.warnings

    def test_unmentioned_change_warns(self):
        code = _four_agent_code()
        tampered = render_structured_block(StructuredScenario(
            map_abstract=code.map_abstract,
            agents=code.agents[:3] + (AgentAbstract(
                quadrant=4, distance_bin=9, orientation=Orientation.SOUTH,
                speed_bin=7, actions=(Action.STOP,) * 4),),
        ))
        output = interpret_edit(code, "make vehicle 2 stop",
                                StubChatClient.fixed(tampered))
        assert any("agent 4" in w for w in output.warnings)

    def test_edit_mode_allows_fine_distance_bins(self):
        block = "Map: [2,2,0,0,15,1]\nActor V1: [1, 25, 0, 1, 4, 4, 4, 4]"
        output = interpret_edit(_four_agent_code(), "move vehicle 1 far away",
                                StubChatClient.fixed(block))
        assert output.structured.agents[0].distance_bin == 25

    def test_edit_request_contains_code_and_instruction(self):
        code = _four_agent_code()
        text = edit_request_text(code, "remove vehicle 2")
        assert render_structured_block(code) in text
        assert text.endswith("Instruction: remove vehicle 2")


class TestFallback:
    def test_sparse_is_six_agents(self):
        code = fallback_interpret("the scenario is sparse")
        assert len(code.agents) == 6

    @pytest.mark.parametrize("text,count", [
        ("the scenario is nearly empty", 2),
        ("the scenario is with medium density", 12),
        ("the scenario is very dense", 24),
    ])
    def test_sparsity_table(self, text, count):
        assert len(fallback_interpret(text).agents) == count

    def test_stopping_clause(self):
        code = fallback_interpret("most cars are stopping")
        assert all(a.speed_bin == 0 for a in code.agents)
        assert all(a.actions == (Action.STOP,) * 4 for a in code.agents)

    def test_ego_turns_left(self):
        code = fallback_interpret("the center car turns left")
        assert code.agents[0].actions[0] is Action.TURN_LEFT

    def test_position_left_side(self):
        code = fallback_interpret("there are only vehicles on the left side of the center car")
        assert {a.quadrant for a in code.agents[1:]} <= {2, 3}

    def test_compound_front_right(self):
        code = fallback_interpret("there are only vehicles on the front right side of the center car")
        assert {a.quadrant for a in code.agents[1:]} == {1}

    def test_speed_fast(self):
        code = fallback_interpret("most cars are moving in fast speed")
        assert all(a.speed_bin == 4 for a in code.agents[1:])

    def test_deterministic(self):
        text = "the scenario is very dense; most cars are moving in slow speed"
        assert fallback_interpret(text) == fallback_interpret(text)

    def test_grammar_error_lists_clauses(self):
        with pytest.raises(GrammarError, match="supported"):
            fallback_interpret("a purple elephant crossing")

    def test_all_bundled_texts_parse(self):
        from importlib import resources
        lines = resources.files("langtraffic").joinpath(
            "assets", "attribute_texts.txt").read_text().splitlines()
        lines = [ln for ln in lines if ln.strip()]
        assert len(lines) == 10
        for line in lines:
            code = fallback_interpret(line)
            assert 1 <= len(code.agents) <= 32
