import pytest

from microgrid.core.exceptions import ParseException
from microgrid.oracle.suite import (
    KINDS,
    check_instance,
    generate_suite,
    read_suite,
    run_suite,
    write_suite,
)
from microgrid.usecases.catalog import load_problem


def test_oracle_generate_suite_should_be_deterministic():
    first = generate_suite(seed=7)
    second = generate_suite(seed=7)

    assert len(first) == 24
    assert [p.fingerprint() for p in first] == [p.fingerprint() for p in second]
    assert {p.name.rsplit("-", 1)[-1] for p in first} >= {"bau", "battery"}


def test_oracle_generate_suite_should_cycle_kinds():
    problems = generate_suite(seed=1, size=len(KINDS))

    assert [p.name.split("-", 3)[-1] for p in problems] == list(KINDS)


def test_oracle_write_suite_should_reload_instances(tmp_path):
    problems = generate_suite(seed=3, size=2)

    paths = write_suite(problems, tmp_path)

    for problem, path in zip(problems, paths):
        reloaded = load_problem(path, problem.scenario.id)
        assert reloaded.fingerprint() == problem.fingerprint()


def test_oracle_check_instance_should_pass_bau(one_generator):
    verdict = check_instance(one_generator)

    assert verdict.passed, verdict.message
    assert verdict.relative_error <= 1e-6
    assert "Eq4" in verdict.tags


def test_oracle_run_suite_should_pass_every_instance():
    """
    Este teste executa o conjunto completo de equivalência: resolvedor,
    enumeração e despacho guloso concordam em todas as instâncias, e todas
    as etiquetas de equação aparecem em algum modelo.
    """
    report = run_suite()

    assert report.missing_tags == []
    assert [v.name for v in report.verdicts if not v.passed] == []


def test_oracle_read_suite_should_replay_written_instances(tmp_path):
    problems = generate_suite(seed=5, size=3)
    write_suite(problems, tmp_path)

    replayed = read_suite(tmp_path)

    assert sorted(p.fingerprint() for p in replayed) == \
        sorted(p.fingerprint() for p in problems)
    assert sorted(p.scenario.id for p in replayed) == \
        sorted(p.scenario.id for p in problems)


def test_oracle_read_suite_should_reject_empty_directory(tmp_path):
    with pytest.raises(ParseException):
        read_suite(tmp_path)
