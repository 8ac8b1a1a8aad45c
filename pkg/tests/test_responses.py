import pytest

from confval.errors import ResponseFormatError
from confval.responses import (
    RULE_EMPTY_WHEN_VALID,
    RULE_NO_DUPLICATES,
    RULE_NONEMPTY_WHEN_ERROR,
    RULE_SAME_ARRAY_SIZE,
    ValidationResponse,
    parse_response,
    validate_response,
)

CLEAN = '{"hasError": false, "errParameter": [], "reason": []}'


class TestParse:
    def test_plain_object(self):
        r = parse_response(CLEAN)
        assert r == ValidationResponse(False, (), ())

    def test_flagging_object(self):
        text = '{"hasError": true, "errParameter": ["p"], "reason": ["too large"]}'
        r = parse_response(text)
        assert r.hasError and r.errParameter == ("p",)

    def test_prose_then_fenced_json(self):
        text = (
            "Sure! Here is my analysis of the file.\n\n"
            "```json\n"
            '{"hasError": true, "errParameter": ["x"], "reason": ["bad"]}\n'
            "```\n"
            "Let me know if you need more."
        )
        r = parse_response(text)
        assert r.errParameter == ("x",)

    def test_bare_fence_without_language(self):
        text = "```\n" + CLEAN + "\n```"
        assert parse_response(text).hasError is False

    def test_prose_then_bare_object(self):
        text = "The configuration looks fine overall. " + CLEAN
        assert parse_response(text).hasError is False

    def test_stringly_typed_flag_rejected(self):
        with pytest.raises(ResponseFormatError, match="hasError"):
            parse_response('{"hasError": "yes"}')

    def test_missing_field_rejected(self):
        with pytest.raises(ResponseFormatError, match="errParameter"):
            parse_response('{"hasError": false, "reason": []}')

    def test_non_string_elements_rejected(self):
        with pytest.raises(ResponseFormatError, match="array of strings"):
            parse_response('{"hasError": true, "errParameter": [1], "reason": ["x"]}')

    def test_multiple_objects_rejected(self):
        with pytest.raises(ResponseFormatError, match="one JSON object"):
            parse_response(CLEAN + "\n" + CLEAN)

    def test_no_json_rejected(self):
        with pytest.raises(ResponseFormatError, match="no JSON object"):
            parse_response("I could not produce the requested structure, sorry.")

    def test_extra_fields_ignored(self):
        text = '{"hasError": false, "errParameter": [], "reason": [], "confidence": 0.9}'
        assert parse_response(text) == ValidationResponse(False, (), ())

    def test_nested_objects_are_not_top_level(self):
        text = '{"hasError": true, "errParameter": ["a"], "reason": ["r"], "meta": {"x": 1}}'
        assert parse_response(text).errParameter == ("a",)


class TestFilterRules:
    def test_clean_valid_accepted(self):
        assert validate_response(ValidationResponse(False, (), ())) is None

    def test_clean_error_accepted(self):
        assert validate_response(ValidationResponse(True, ("p",), ("r",))) is None

    def test_valid_with_parameters_rejected(self):
        r = ValidationResponse(False, ("x",), ())
        assert validate_response(r) == RULE_EMPTY_WHEN_VALID

    def test_valid_with_reasons_rejected(self):
        r = ValidationResponse(False, (), ("why",))
        assert validate_response(r) == RULE_EMPTY_WHEN_VALID

    def test_error_with_empty_arrays_rejected(self):
        assert validate_response(ValidationResponse(True, (), ())) == RULE_NONEMPTY_WHEN_ERROR

    def test_mismatched_sizes_rejected(self):
        r = ValidationResponse(True, ("a", "b"), ("only one",))
        assert validate_response(r) == RULE_SAME_ARRAY_SIZE

    def test_duplicates_rejected(self):
        r = ValidationResponse(True, ("x", "x"), ("a", "b"))
        assert validate_response(r) == RULE_NO_DUPLICATES
