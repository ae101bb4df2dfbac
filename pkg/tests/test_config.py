import pytest

from frontlab import catalog
from frontlab.config import ExperimentConfig, parse_text, require_valid, validate
from frontlab.defects import Gaussian, Tanh
from frontlab.errors import ConfigError

BASE = """
name = demo
mode = pde
defect.kind = gaussian
defect.s0 = 0.3
defect.s1 = 0.6
defect.d = 30
solver.t_max = 10
"""


def cfg(extra=""):
    return ExperimentConfig.from_text(BASE + extra)


def test_parse_comments_and_spacing():
    vals = parse_text("# head\n a=1 \n\nb = x # trailing\n")
    assert vals == {"a": "1", "b": "x"}


@pytest.mark.parametrize("text", ["novalue\n", "= 3\n", "a = 1\na = 2\n"])
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_text(text)


def test_valid_config_and_defect():
    c = cfg()
    assert validate(c) == []
    assert c.defect() == Gaussian(0.3, 0.6, 30.0)
    assert c.num("grid.n") == 4000  # default


def test_grid_too_small():
    assert "grid too small" in validate(cfg("grid.n = 2\n"))


def test_general_rejects_dirac():
    c = ExperimentConfig.from_text(
        "name = x\nmode = cv\ncv.kind = general\ndefect.kind = dirac\ndefect.alpha = 0.3\n"
        "defect.beta = 5\nsolver.t_max = 10\n"
    )
    assert "General model rejects Dirac" in validate(c)


@pytest.mark.parametrize(
    "extra,needle",
    [
        ("a = 1.5\n", "a must lie in (0, 1)"),
        ("solver.rtol = -1\n", "solver.rtol must be positive"),
        ("solver.dt_out = 20\n", "dt_out must not exceed"),
        ("init.x0 = 500\n", "init.x0 must lie inside the grid"),
        ("defect.colour = red\n", "unknown key"),
        ("init.w = -2\n", "init.w must be positive"),
    ],
)
def test_violations(extra, needle):
    assert any(needle in v for v in validate(cfg(extra)))


def test_missing_mode_keys():
    c = ExperimentConfig.from_text("name = t\nmode = pinning-threshold\ndefect.kind = constant\ndefect.s = 0.3\n")
    v = validate(c)
    assert "missing required key threshold.param" in v
    assert "missing required key solver.t_max" in v


def test_require_valid_raises_with_all_violations():
    with pytest.raises(ConfigError) as info:
        require_valid(cfg("grid.n = 2\na = 3\n"))
    assert len(info.value.violations) >= 2


def test_panels_override_and_replace_defect():
    c = cfg("panel.p1.defect.s1 = 5\npanel.p2.defect.kind = tanh\npanel.p2.defect.s_l = 0.3\n"
            "panel.p2.defect.s_r = 1\npanel.p2.defect.d = 10\n")
    panels = dict(c.panels())
    assert panels["p1"].defect() == Gaussian(0.3, 5.0, 30.0)
    assert panels["p2"].defect() == Tanh(0.3, 1.0, 10.0)
    assert validate(c) == []


def test_text_round_trip():
    c = cfg()
    assert ExperimentConfig.from_text(c.to_text()) == c


def test_catalog_complete_and_valid():
    names = catalog.names()
    assert names[:12] == [f"fig{i}" for i in range(1, 13)]
    assert set(names[12:]) == {"inverse", "threshold-gaussian", "threshold-dirac"}
    for n in names:
        c = catalog.load(n)
        assert c.name == n
        assert validate(c) == [], n
        assert catalog.description(n)
    for i in range(8, 13):
        assert catalog.load(f"fig{i}").mode == "compare"


@pytest.mark.parametrize(
    "name,expected",
    [
        ("fig1", Gaussian(0.3, 0.6, 30.0)),
        ("fig2", Gaussian(0.3, 0.6, 0.3)),
        ("fig3", Gaussian(0.3, 7.0, 0.3)),
        ("fig4", Tanh(0.3, 1.0, 10.0)),
        ("fig5", Tanh(0.3, 1.0, 0.1)),
        ("fig9", Tanh(0.3, 1.0, 10.0)),
        ("fig11", Tanh(0.3, 1.0, 0.1)),
        ("fig12", Tanh(0.3, 8.0, 0.1)),
        ("inverse", Gaussian(0.6, 0.3, 10.0)),
    ],
)
def test_catalog_parameters_match_captions(name, expected):
    assert catalog.load(name).defect() == expected


def test_catalog_panels():
    p8 = dict(catalog.load("fig8").panels())
    assert p8["gaussian"].defect() == Gaussian(0.3, 0.6, 30.0)
    assert p8["tanh"].defect() == Tanh(0.3, 1.0, 10.0)
    p10 = dict(catalog.load("fig10").panels())
    assert p10["small"].defect().s1 == 0.6 and p10["large"].defect().s1 == 5.0


def test_catalog_initial_fronts_well_separated():
    # at least 7 equilibrium widths between the start and the defect centre
    for n in catalog.names():
        for _, c in catalog.load(n).panels():
            if c.mode in ("sources",):
                continue
            d = c.defect()
            s_left = getattr(d, "s0", None) or getattr(d, "s_l", None) or d.alpha
            assert -c.num("init.x0") >= 7 * (2 / s_left) ** 0.5, n


def test_unknown_catalog_entry():
    with pytest.raises(KeyError):
        catalog.load("fig99")
