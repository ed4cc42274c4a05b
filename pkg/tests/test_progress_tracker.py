from concurrent.futures import ThreadPoolExecutor

from app.core.progress_tracker import progress_tracker


def _by_scheme(experiment):
    return {s["scheme"]: s for s in progress_tracker.snapshot(experiment)["schemes"]}


def test_schemes_advance_per_run():
    progress_tracker.start("exp-a", ["overall", "sex_dis"], runs=4)
    progress_tracker.record_run("exp-a", "overall")
    progress_tracker.record_run("exp-a", "sex_dis", failed=True)
    progress_tracker.record_run("exp-a", "sex_dis")

    schemes = _by_scheme("exp-a")
    assert set(schemes) == {"overall", "sex_dis"}
    assert schemes["overall"]["progress"] == 25
    assert schemes["sex_dis"]["progress"] == 50
    assert schemes["sex_dis"]["failed_runs"] == 1
    assert schemes["sex_dis"]["runs_done"] == 2
    assert progress_tracker.snapshot("exp-a")["overall_progress"] == 37
    progress_tracker.clear("exp-a")


def test_scheme_fails_only_when_every_run_failed():
    progress_tracker.start("exp-b", ["g_dis", "g_priv"], runs=2)
    for _ in range(2):
        progress_tracker.record_run("exp-b", "g_dis", failed=True)
    progress_tracker.record_run("exp-b", "g_priv", failed=True)
    progress_tracker.record_run("exp-b", "g_priv")

    statuses = {name: s["status"] for name, s in _by_scheme("exp-b").items()}
    assert statuses == {"g_dis": "failed", "g_priv": "done"}
    assert progress_tracker.snapshot("exp-b")["overall_progress"] == 100
    progress_tracker.clear("exp-b")


def test_extra_records_do_not_overshoot():
    progress_tracker.start("exp-e", ["overall"], runs=1)
    for _ in range(3):
        progress_tracker.record_run("exp-e", "overall")
    assert _by_scheme("exp-e")["overall"]["runs_done"] == 1
    progress_tracker.clear("exp-e")


def test_concurrent_updates_are_all_counted():
    progress_tracker.start("exp-c", ["overall"], runs=200)
    with ThreadPoolExecutor(max_workers=8) as pool:
        for _ in range(200):
            pool.submit(progress_tracker.record_run, "exp-c", "overall")
    schemes = _by_scheme("exp-c")
    assert schemes["overall"]["runs_done"] == 200
    assert schemes["overall"]["status"] == "done"
    progress_tracker.clear("exp-c")


def test_unknown_experiment_is_empty_and_updates_are_ignored():
    progress_tracker.record_run("missing", "overall")
    progress_tracker.finish("missing")
    assert progress_tracker.snapshot("missing") == {"overall_progress": 0, "schemes": []}


def test_unknown_scheme_is_ignored():
    progress_tracker.start("exp-f", ["overall"], runs=2)
    progress_tracker.record_run("exp-f", "not_in_roster")
    assert set(_by_scheme("exp-f")) == {"overall"}
    assert progress_tracker.snapshot("exp-f")["overall_progress"] == 0
    progress_tracker.clear("exp-f")


def test_finish_marks_running_schemes_done():
    progress_tracker.start("exp-d", ["overall"], runs=3)
    progress_tracker.finish("exp-d")
    snapshot = progress_tracker.snapshot("exp-d")
    assert snapshot["overall_progress"] == 100
    assert snapshot["schemes"][0]["status"] == "done"
    assert snapshot["schemes"][0]["progress"] == 100
    progress_tracker.clear("exp-d")
