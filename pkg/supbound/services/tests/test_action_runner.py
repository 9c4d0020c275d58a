from supbound.actions.core import EXIT_OK, EXIT_USAGE
from supbound.services.action_runner import execute_action
from supbound.services.errors import TrsSyntaxError


def test_execute_action(mocker, mock_action_handlers, mock_action_result, mock_publish_event):
    mocker.patch("supbound.services.action_runner.action_handlers", mock_action_handlers)
    mocker.patch("supbound.services.activity_logger.publish_event", mock_publish_event)

    result = execute_action("check", {"trs_path": "qiex.trs"})

    assert result == mock_action_result
    mock_action_handler, mock_config = mock_action_handlers["check"]
    assert mock_action_handler.called
    config = mock_action_handler.call_args.kwargs["action_config"]
    assert isinstance(config, mock_config)
    assert config.trs_path == "qiex.trs"


def test_execute_unknown_action(mocker, mock_action_handlers):
    mocker.patch("supbound.services.action_runner.action_handlers", mock_action_handlers)

    result = execute_action("prove", {})

    assert result.exit_code == EXIT_USAGE
    details = result.result["error_details"]
    assert details["error_type"] == "ActionNotFound"
    assert details["action_id"] == "prove"
    assert result.diagnostic == "supbound prove: Action 'prove' is not supported"


def test_execute_action_with_invalid_config(mocker, mock_action_handlers):
    mocker.patch("supbound.services.action_runner.action_handlers", mock_action_handlers)

    result = execute_action("check", {"trs_path": "qiex.trs", "max_size": 3})

    assert result.exit_code == EXIT_USAGE
    mock_action_handler, _ = mock_action_handlers["check"]
    assert not mock_action_handler.called
    details = result.result["error_details"]
    assert details["error_type"] == "ValidationError"
    assert details["error"].startswith("invalid options: max-size")
    assert details["config_data"] == {"trs_path": "qiex.trs", "max_size": 3}


def test_execute_action_reports_parse_location(mocker, mock_action_handlers):
    mock_action_handler, _ = mock_action_handlers["check"]
    mock_action_handler.side_effect = TrsSyntaxError("expected '->'", 2, 7)
    mocker.patch("supbound.services.action_runner.action_handlers", mock_action_handlers)

    result = execute_action("check", {"trs_path": "broken.trs"})

    assert result.exit_code == EXIT_USAGE
    details = result.result["error_details"]
    assert details["line"] == 2
    assert details["column"] == 7
    assert "error_traceback" not in details


def test_execute_action_reports_missing_file(mocker, mock_action_handlers):
    mock_action_handler, _ = mock_action_handlers["check"]
    mock_action_handler.side_effect = FileNotFoundError(2, "No such file or directory", "missing.trs")
    mocker.patch("supbound.services.action_runner.action_handlers", mock_action_handlers)

    result = execute_action("check", {"trs_path": "missing.trs"})

    assert result.exit_code == EXIT_USAGE
    assert result.result["error_details"]["filename"] == "missing.trs"


def test_execute_action_keeps_traceback_of_unexpected_errors(mocker, mock_action_handlers):
    mock_action_handler, _ = mock_action_handlers["check"]
    mock_action_handler.side_effect = RuntimeError("boom")
    mocker.patch("supbound.services.action_runner.action_handlers", mock_action_handlers)

    result = execute_action("check", {"trs_path": "qiex.trs"})

    assert result.exit_code == EXIT_USAGE
    details = result.result["error_details"]
    assert details["error"] == "boom"
    assert "RuntimeError" in details["error_traceback"]


def test_execute_real_check_action(fixtures_dir):
    result = execute_action("check", {"trs_path": str(fixtures_dir / "qiex.trs")})

    assert result.exit_code == EXIT_OK
    assert result.result["orthogonal"]
    assert result.result["trs_size"] == 17
