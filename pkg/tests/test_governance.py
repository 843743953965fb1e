"""Testes do logging estruturado e do rastreamento de execuções."""

import logging

from app.governance.logging import LOGGER_NAME, RunContext, setup_logging


def test_setup_logging_is_idempotent():
    first = setup_logging("DEBUG")
    second = setup_logging("DEBUG")
    assert first is second is logging.getLogger(LOGGER_NAME)
    assert len(first.handlers) == 1


def test_module_loggers_are_children_of_app():
    child = logging.getLogger("app.schemes.induction")
    assert child.parent is logging.getLogger(LOGGER_NAME) or child.parent.name.startswith(LOGGER_NAME)


def test_run_context_records_events():
    context = RunContext("price")
    context.log_config("toy", {"theta": 0.5})
    context.log_step(1, "IE")
    context.log_step(2, "HV")
    context.log_warning("theta baixo")
    context.log_result("ok", {"price": 1.0})
    context.log_error("falhou", {"step": 3})

    summary = context.get_events_summary()
    assert summary["run_id"] == context.run_id
    assert summary["label"] == "price"
    assert summary["total_events"] == 6
    assert summary["event_counts"] == {"config": 1, "step": 2, "warning": 1, "result": 1, "error": 1}
    assert all(event["run_id"] == context.run_id for event in context.events)
    assert context.events[1]["metadata"] == {"step": 1, "kind": "IE"}


def test_run_ids_are_unique():
    assert RunContext().run_id != RunContext().run_id
