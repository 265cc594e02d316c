from __future__ import annotations

import subprocess
import sys
from pathlib import Path

import pytest
from PIL import Image

from fatoucon.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, EXIT_REGIME, main
from fatoucon.report import loads

CONFIGS = Path(__file__).parent.parent / "configs"


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_version_via_module():
    out = subprocess.run([sys.executable, "-m", "fatoucon.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()


def test_config_error_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, "n = 2\nd = 3\na_re = 1\nwat = 4\n")
    assert main(["roots", "--config", cfg, "--out", str(tmp_path), "-q"]) == EXIT_CONFIG


def test_bad_override_is_config_error(tmp_path):
    cfg = write_cfg(tmp_path, "n = 2\nd = 3\na_re = 1\nlambda_re = 1e-8\n")
    assert main(["verify", "--config", cfg, "--window", "1,2", "--out", str(tmp_path), "-q"]) == EXIT_CONFIG


def test_regime_violation_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, "n = 2\nd = 3\na_re = 1\nlambda_re = 0.5\n")
    assert main(["verify", "--config", cfg, "--out", str(tmp_path), "-q"]) == EXIT_REGIME


def test_unrealizable_search_request(tmp_path):
    cfg = write_cfg(tmp_path, "n = 2\nd = 3\na_re = 0.5\n")
    assert main(["search", "--config", cfg, "--i", "0", "--j", "0", "--l", "2",
                 "--out", str(tmp_path), "-q"]) == EXIT_CONFIG


def test_render_unperturbed(tmp_path):
    cfg = str(CONFIGS / "milnor_unperturbed.cfg")
    assert main(["render", "--config", cfg, "--resolution", "128", "--out", str(tmp_path), "-q"]) == EXIT_OK
    rep = loads((tmp_path / "milnor_unperturbed_render.json").read_text())
    assert rep["command"] == "render" and rep["schema_version"] == 1
    im = Image.open(tmp_path / "milnor_unperturbed_global.png")
    assert im.mode == "RGB" and im.size == (128, 128)


def test_roots(tmp_path):
    cfg = write_cfg(tmp_path, "name = r\nn = 2\nd = 3\na_re = 1\nlambda_re = 1e-10\n")
    assert main(["roots", "--config", cfg, "--out", str(tmp_path), "-q"]) == EXIT_OK
    rep = loads((tmp_path / "r_roots.json").read_text())
    assert len(rep["critical_points"]) == 6
    assert len(rep["critical"]["free_ring"]) == 5
    assert rep["critical"]["pairing_residual_critical"] < 1e-2


def test_enumerate_with_given_k(tmp_path):
    cfg = write_cfg(tmp_path, "name = e\nn = 3\nd = 2\na_re = 0.5\nq_re = 1, -0.5\nlambda_re = 1e-8\n")
    assert main(["enumerate", "--config", cfg, "--k", "2", "--i-max", "0", "--j-max", "1", "--l-max", "3",
                 "--out", str(tmp_path), "-q"]) == EXIT_OK
    rep = loads((tmp_path / "e_enumerate.json").read_text())
    got = {(w["i"], w["j"], w["l"]): (w["kappa"], w["status"]) for w in rep["witnesses"]}
    assert got[0, 1, 2] == (20, "POSSIBLE")
    assert got[0, 1, 3] == (56, "EXCLUDED")


def test_verify_low_resolution(tmp_path):
    cfg = str(CONFIGS / "milnor_cubic.cfg")
    code = main(["verify", "--config", cfg, "--resolution", "512", "--out", str(tmp_path), "-q"])
    assert code in (EXIT_OK, EXIT_CHECK)
    rep = loads((tmp_path / "milnor_cubic_verify.json").read_text())
    assert rep["passed"] == (code == EXIT_OK)
    names = {c["name"] for c in rep["checks"]}
    assert {"riemann_hurwitz", "form_compliance", "pairing"} <= names
    assert rep["k"] == 2
    for img in rep["images"]:
        assert (tmp_path / img).exists()


def test_itinerary(tmp_path):
    cfg = str(CONFIGS / "milnor_cubic.cfg")
    assert main(["itinerary", "--config", cfg, "--resolution", "512", "--out", str(tmp_path), "-q"]) == EXIT_OK
    rep = loads((tmp_path / "milnor_cubic_itinerary.json").read_text())
    assert rep["itinerary"]["k"] == 2


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
