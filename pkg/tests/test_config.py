import numpy as np
import pytest

from mcfi.config import RunConfig, canned_names, resolve_config_path
from mcfi.errors import ConfigError
from mcfi.io import parse_config_text, write_columns

BASE = "scenario = burgers1d\ngrid.n = 41\nsolver.t_end = 0.4\n"


def test_parse_comments_and_errors():
    assert parse_config_text("a = 1 # c\n# x\n\nb.c= 2,3") == {"a": "1", "b.c": "2,3"}
    with pytest.raises(ValueError):
        parse_config_text("novalue")


def test_canned_configs_all_load():
    names = canned_names()
    assert {"forward1d", "table1d", "table2d", "invert1d-f1", "invert2d-f2"} <= set(names)
    for n in names:
        cfg = RunConfig.from_file(n)
        assert cfg.design.n_vars in (4, 100)


def test_unknown_key_and_bad_scenario():
    with pytest.raises(ConfigError, match="unknown"):
        RunConfig.from_text(BASE + "solver.cfll = 0.3\n")
    with pytest.raises(ConfigError, match="scenario"):
        RunConfig.from_text("scenario = burgers3d\n")
    with pytest.raises(ConfigError):
        resolve_config_path("no-such-config")


def test_solver_overrides_and_seed():
    cfg = RunConfig.from_text(BASE + "solver.nu = 1e-3\nseed = 4\n")
    assert cfg.solver.nu == 1e-3 and cfg.grid.n_nodes == 41 and cfg.seed == 4
    assert RunConfig.from_text(BASE, seed=9).seed == 9
    assert RunConfig.from_text(BASE).hash != RunConfig.from_text(BASE, seed=1).hash
    with pytest.raises(ConfigError):
        RunConfig.from_text(BASE + "solver.nu = fast\n")


def test_design_vector_forms(tmp_path):
    write_columns(tmp_path / "x.csv", {"x": np.array([1.0, 2.0, 3.0, 4.0])})
    cfg = RunConfig.from_text(BASE + "design.initial = file:x.csv\n", base_dir=str(tmp_path))
    np.testing.assert_array_equal(cfg.design_vector("design.initial"), [1, 2, 3, 4])
    cfg = RunConfig.from_text(BASE + "design.initial = 1, 2, 3\n")
    with pytest.raises(ConfigError, match="expected 4"):
        cfg.design_vector("design.initial")
    cfg = RunConfig.from_text(BASE + "design.initial = profile:ramp\n")
    with pytest.raises(ConfigError, match="2-D"):
        cfg.design_vector("design.initial")
    np.testing.assert_array_equal(RunConfig.from_text(BASE).design_vector("design.initial"), 0.0)


def test_components_are_one_based():
    cfg = RunConfig.from_text(BASE + "gradcheck.components = 1, 4\n")
    assert cfg.components() == [0, 3]
    assert RunConfig.from_text(BASE).components() is None
    with pytest.raises(ConfigError, match="out of range"):
        RunConfig.from_text(BASE + "gradcheck.components = 5\n").components()


def test_optimize_options_validated():
    cfg = RunConfig.from_text(BASE + "optimize.backtrack = 2\n")
    with pytest.raises(ConfigError):
        cfg.optimize_options()
    assert RunConfig.from_text(BASE + "optimize.memory = 3\n").optimize_options().memory == 3
