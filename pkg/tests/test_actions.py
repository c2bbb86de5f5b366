from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from escaperoom.actions import ActionParseError, AgentAction, parse_action


class TestParseAction:
    def test_minimal_movement_message(self):
        a = parse_action('{"move_forward": 2.0, "rationale": "explore"}')
        assert a.move_forward == 2.0
        assert a.rationale == "explore"
        assert not a.grab and a.look_at is None and a.read is None

    def test_grab_with_item_and_empty_input(self):
        a = parse_action('{"grab": true, "interactions": {"use_item_id": "key_1", "input": ""}}')
        assert a.grab and a.use_item_id == "key_1"
        assert a.input_text is None  # empty string means not provided

    def test_move_range_error_cites_bounds(self):
        with pytest.raises(ActionParseError, match=r"\[-10, 10\]"):
            parse_action('{"move_forward": 99}')

    def test_rotate_ranges(self):
        with pytest.raises(ActionParseError, match=r"\[-180, 180\]"):
            parse_action('{"rotate_right": 181}')
        with pytest.raises(ActionParseError, match=r"\[-90, 90\]"):
            parse_action('{"rotate_down": -91}')

    def test_unknown_keys_rejected(self):
        with pytest.raises(ActionParseError, match="teleport"):
            parse_action('{"teleport": true}')
        with pytest.raises(ActionParseError, match="interactions"):
            parse_action('{"interactions": {"cast": "spell"}}')

    def test_null_means_not_performed(self):
        a = parse_action('{"move_forward": null, "grab": null, "look_at": null}')
        assert a == AgentAction()

    def test_wrong_types(self):
        with pytest.raises(ActionParseError, match="must be a number"):
            parse_action('{"move_forward": "fast"}')
        with pytest.raises(ActionParseError, match="must be a number"):
            parse_action('{"move_forward": true}')
        with pytest.raises(ActionParseError, match="must be a boolean"):
            parse_action('{"grab": 1}')
        with pytest.raises(ActionParseError, match="must be a string"):
            parse_action('{"read": 7}')

    def test_look_at_shape_and_range(self):
        assert parse_action('{"look_at": [0.25, 0.75]}').look_at == (0.25, 0.75)
        with pytest.raises(ActionParseError, match="look_at"):
            parse_action('{"look_at": [0.5]}')
        with pytest.raises(ActionParseError, match=r"\[0, 1\]"):
            parse_action('{"look_at": [0.5, 1.5]}')

    def test_not_an_object(self):
        with pytest.raises(ActionParseError, match="JSON object"):
            parse_action('[1, 2]')

    def test_malformed_document(self):
        with pytest.raises(ActionParseError, match="not valid JSON"):
            parse_action("definitely not json")

    def test_markdown_fence_tolerated(self):
        a = parse_action('```json\n{"move_forward": 1.5}\n```')
        assert a.move_forward == 1.5

    def test_nan_and_inf_rejected(self):
        with pytest.raises(ActionParseError, match="finite"):
            parse_action('{"move_forward": NaN}')

    def test_empty_object_is_inert(self):
        assert parse_action("{}") == AgentAction()


finite_move = st.floats(min_value=-10, max_value=10, allow_nan=False).map(lambda v: round(v, 4))
finite_rot = st.floats(min_value=-180, max_value=180, allow_nan=False).map(lambda v: round(v, 4))
finite_pitch = st.floats(min_value=-90, max_value=90, allow_nan=False).map(lambda v: round(v, 4))
unit = st.floats(min_value=0, max_value=1, allow_nan=False).map(lambda v: round(v, 6))
ids = st.text(alphabet="abcdefg_123", min_size=1, max_size=8)


@given(
    move=st.none() | finite_move,
    rot=st.none() | finite_rot,
    pitch=st.none() | finite_pitch,
    jump=st.booleans(),
    look=st.none() | st.tuples(unit, unit),
    grab=st.booleans(),
    item=st.none() | ids,
    text=st.none() | ids,
    read=st.none() | ids,
    why=st.text(max_size=40),
)
def test_roundtrip_protocol_shape(move, rot, pitch, jump, look, grab, item, text, read, why):
    action = AgentAction(
        move_forward=move,
        rotate_right=rot,
        rotate_down=pitch,
        jump=jump,
        look_at=look,
        grab=grab,
        use_item_id=item,
        input_text=text,
        read=read,
        rationale=why,
    )
    assert parse_action(action.to_json()) == action


def test_to_dict_omits_absent_fields():
    assert AgentAction().to_dict() == {}
    d = AgentAction(grab=True, use_item_id="key_1").to_dict()
    assert d == {"grab": True, "interactions": {"use_item_id": "key_1"}}
    assert json.loads(AgentAction(move_forward=1).to_json()) == {"move_forward": 1}
