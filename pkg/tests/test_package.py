"""Public API surface."""

import setdecode


def test_version_is_concrete():
    assert setdecode.__version__ not in ("", "0.0.0")


def test_all_names_resolve():
    for name in setdecode.__all__:
        assert getattr(setdecode, name) is not None


def test_core_entry_points_exported():
    for name in ("build_system", "ModelParams", "solve_map",
                 "solve_map_sequential", "run_chain", "enumerate_posterior",
                 "expected_violations", "fisher_test", "run_benchmark",
                 "parse_gmt", "parse_gene_list"):
        assert name in setdecode.__all__
