import json
import subprocess
import sys

import pytest

from gaussmaps import cli
from gaussmaps.analysis import omitted_values
from gaussmaps.catalog import CATALOG, ENTRIES, entry_from_config, get_entry
from gaussmaps.errors import UnknownEntry
from gaussmaps.mesh import build_mesh
from gaussmaps.metric import is_complete
from gaussmaps.surfaces import build_surface


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCatalog:
    def test_size_and_classes(self):
        assert len(ENTRIES) >= 8
        assert {e.cls for e in ENTRIES} == {"minimal", "cmc1", "maxface", "improper-affine", "flat-front"}

    def test_unknown(self):
        with pytest.raises(UnknownEntry):
            get_entry("no-such")

    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_config_round_trip(self, name):
        e = CATALOG[name]
        back = entry_from_config(json.loads(json.dumps(e.to_config())))
        assert back == e

    @pytest.mark.parametrize("name", sorted(CATALOG))
    def test_entry_builds(self, name):
        e = CATALOG[name]
        model = build_surface(e.wdata(), build_mesh(e.domain_spec(0.1)))
        assert model.positions.shape == (model.mesh.n_vertices, 3)

    def test_complete_entries_respect_omitted_bound(self):
        for e in ENTRIES:
            spec = e.metric()
            if spec.g.is_constant or not is_complete(spec):
                continue
            assert omitted_values(spec.g, e.punctures_list(), e.m).within_bound, e.name


class TestCLI:
    def test_catalog_listing(self, capsys):
        code, out, _ = run(["catalog", "--json"], capsys)
        assert code == 0 and json.loads(out)["count"] == len(ENTRIES)

    def test_build_is_deterministic(self, tmp_path, capsys):
        outs = []
        for sub in ("a", "b"):
            code, out, _ = run(["build", "--catalog", "enneper", "--out", str(tmp_path / sub), "--json"], capsys)
            assert code == 0
            outs.append((tmp_path / sub / "enneper.obj").read_bytes())
        assert outs[0] == outs[1]

    def test_build_report(self, tmp_path, capsys):
        code, out, _ = run(["build", "--catalog", "catenoid", "--out", str(tmp_path), "--json"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["complete"] is True and rep["class"] == "minimal"
        assert json.loads((tmp_path / "catenoid.json").read_text())["vertices"] == rep["vertices"]
        assert "np." not in (tmp_path / "catenoid.csv").read_text()

    def test_config_round_trip(self, tmp_path, capsys):
        code, _, _ = run(["catalog", "horosphere-front", "--out", str(tmp_path)], capsys)
        assert code == 0
        cfg = tmp_path / "horosphere-front.json"
        code, out, _ = run(["build", "--config", str(cfg), "--out", str(tmp_path), "--json"], capsys)
        assert code == 0
        assert json.loads(out)["flags"]["rigidity"] == "horosphere or hyperbolic cylinder"

    def test_inline_data(self, tmp_path, capsys):
        code, out, _ = run(
            ["build", "--class", "improper-affine", "--F", "0", "--G", "z", "--domain", "disk:1",
             "--out", str(tmp_path), "--name", "para", "--json"],
            capsys,
        )
        assert code == 0 and json.loads(out)["flags"]["rigidity"] == "elliptic paraboloid"

    def test_export_formats(self, tmp_path, capsys):
        for fmt in ("obj", "csv", "mesh-json"):
            code, out, _ = run(["export", "--catalog", "horosphere", "--format", fmt,
                                "--out", str(tmp_path), "--json"], capsys)
            assert code == 0
        assert (tmp_path / "horosphere.mesh.json").exists()

    def test_global_flags_after_subcommand(self, capsys):
        code, out, _ = run(["analyze", "omitted", "--g", "z", "--punctures", "0,inf", "--json"], capsys)
        assert code == 0 and json.loads(out)["count"] == 2

    def test_table_output(self, capsys):
        code, out, _ = run(["analyze", "omitted", "--g", "z", "--punctures", "inf"], capsys)
        assert code == 0 and "count" in out and not out.lstrip().startswith("{")

    def test_islands(self, capsys):
        code, out, _ = run(["--json", "analyze", "islands", "--g", "z^2", "--alpha", "0", "--eps", "0.25"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["island_count"] == 1 and rep["simple_islands"] == 0

    def test_unicity(self, capsys):
        code, out, _ = run(["analyze", "unicity", "--alphas", "2", "--m", "2", "--json"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["shared_count"] == 6 and rep["identical"] is False

    def test_curvature(self, capsys):
        code, out, _ = run(["analyze", "curvature", "--g", "z", "--omega", "1", "--points", "0,1", "--json"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["samples"][0]["curvature"] == pytest.approx(-4.0)

    @pytest.mark.parametrize(
        "argv, code",
        [
            (["build", "--class", "minimal", "--omega", "1"], 2),
            (["catalog", "no-such"], 2),
            (["frobnicate"], 2),
            (["analyze", "omitted", "--g", "3", "--punctures", "inf"], 3),
            (["analyze", "unicity", "--alphas", "1"], 3),
            (["analyze", "islands", "--g", "z", "--alpha", "0", "--eps", "2"], 3),
        ],
    )
    def test_exit_codes(self, argv, code, capsys):
        assert run(argv, capsys)[0] == code

    def test_io_error(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = run(["build", "--catalog", "enneper", "--out", str(blocker / "sub")], capsys)
        assert code == 4 and "I/O" in err

    def test_module_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "gaussmaps", "catalog", "--json"],
                             capture_output=True, text=True, check=False)
        assert res.returncode == 0 and json.loads(res.stdout)["count"] == len(ENTRIES)
