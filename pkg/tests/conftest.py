import pathlib

import pytest

from kinesphere import build_vsam, laban26, parse_eurdf
from kinesphere.ecl import export_store
from kinesphere.kinematics import auto_install

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "src" / "kinesphere" / "fixtures"
DATA = pathlib.Path(__file__).resolve().parent / "data"

PLATFORM_NAMES = ["fig3_example", "baxter", "nao", "youbot", "khepera"]


def load_platform(name):
    return parse_eurdf((FIXTURES / f"{name}.eurdf").read_text())


def default_spec(platform, s_max=3):
    origins = sorted(platform.labels.distals)
    if platform.mobile:
        origins += sorted(platform.labels.core)
    return build_vsam(origins, laban26(), s_max, platform=platform)


@pytest.fixture(scope="session")
def platforms():
    return {name: load_platform(name) for name in PLATFORM_NAMES}


@pytest.fixture(scope="session")
def installed(platforms):
    """Default auto-install of every shipped fixture, built once."""
    return {
        name: auto_install(platform, default_spec(platform))
        for name, platform in platforms.items()
    }


@pytest.fixture(scope="session")
def ecl_files(installed, tmp_path_factory):
    """The session stores written out as databank files."""
    root = tmp_path_factory.mktemp("ecl")
    out = {}
    for name, store in installed.items():
        path = root / f"{name}.ecl"
        path.write_bytes(export_store(store))
        out[name] = path
    return out


@pytest.fixture(scope="session")
def eurdf_paths():
    return {name: FIXTURES / f"{name}.eurdf" for name in PLATFORM_NAMES}
