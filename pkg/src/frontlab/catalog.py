"""Named, version-controlled experiment configs shipped with the package."""

from __future__ import annotations

from importlib import resources

from .config import ExperimentConfig

_PACKAGE = "frontlab.configs"


def _key(name):
    # fig1, fig2, ..., fig12 in numeric order, then the rest alphabetically
    if name.startswith("fig") and name[3:].isdigit():
        return (0, int(name[3:]), "")
    return (1, 0, name)


def names():
    files = resources.files(_PACKAGE).iterdir()
    return sorted((f.name[:-4] for f in files if f.name.endswith(".cfg")), key=_key)


def text(name):
    path = resources.files(_PACKAGE) / f"{name}.cfg"
    if not path.is_file():
        raise KeyError(f"no catalog entry named {name!r}; see `frontlab catalog list`")
    return path.read_text(encoding="utf-8")


def load(name):
    return ExperimentConfig.from_text(text(name))


def description(name):
    """Leading comment block of the entry, joined into one line."""
    parts = []
    for line in text(name).splitlines():
        if not line.startswith("#"):
            break
        parts.append(line.lstrip("# ").strip())
    return " ".join(parts)
