"""Command-line interface: subcommands, reports, exit codes, determinism."""

import csv
import json
import os

from gaugekit.cli import main


def run(tmp_path, *argv):
    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        return main(list(argv))
    finally:
        os.chdir(cwd)


def load(tmp_path, name):
    with open(tmp_path / name) as fh:
        return json.load(fh)


class TestIntegrate:
    def test_constant(self, tmp_path):
        code = run(
            tmp_path, "integrate", "--fn", "one", "--domain", "0", "2", "--seed", "1"
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-integrate.json")
        assert doc["schema"] == "gaugekit/1"
        for row in doc["rows"]:
            assert all(s["value"] == "2/1" for s in row["sums"])

    def test_cantor_deriv_all_zero(self, tmp_path):
        code = run(
            tmp_path, "integrate", "--fn", "cantor_deriv",
            "--domain", "0", "1", "--seed", "2",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-integrate.json")
        assert all(
            s["value"] == "0/1" for row in doc["rows"] for s in row["sums"]
        )

    def test_linear_close_to_half(self, tmp_path):
        code = run(
            tmp_path, "integrate", "--fn", "linear", "--domain", "0", "1",
            "--eps", "1e-3", "--seed", "3",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-integrate.json")
        for s in doc["rows"][-1]["sums"]:
            num, den = s["value"].split("/")
            assert abs(int(num) / int(den) - 0.5) < 1e-3

    def test_unknown_function_exit_2(self, tmp_path):
        assert run(
            tmp_path, "integrate", "--fn", "nope", "--domain", "0", "1", "--seed", "1"
        ) == 2

    def test_byte_identical_reports(self, tmp_path):
        args = (
            "integrate", "--fn", "square", "--domain", "-1", "1",
            "--eps", "0.25", "0.125", "--seed", "42",
        )
        run(tmp_path, *args, "--out", "a.json")
        run(tmp_path, *args, "--out", "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


class TestPartition:
    def test_dump_format(self, tmp_path):
        code = run(
            tmp_path, "partition", "--domain", "-1", "1", "--gauge", "dist:D",
            "--fn", "cantor_abs", "--out", "part.csv",
        )
        assert code == 0
        with open(tmp_path / "part.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["tag", "cell_lo", "cell_hi", "radius_at_tag", "f_at_tag"]
        assert len(rows) > 1
        for row in rows[1:]:
            assert all("/" in cell for cell in row)

    def test_depth_cap_failure_exit_3(self, tmp_path):
        os.environ["GAUGEKIT_DEPTH_CAP"] = "3"
        try:
            code = run(
                tmp_path, "partition", "--domain", "0", "1", "--gauge", "const:1/100"
            )
        finally:
            del os.environ["GAUGEKIT_DEPTH_CAP"]
            from gaugekit.core import set_default_max_depth
            from gaugekit.sets import set_depth_cap

            set_default_max_depth(64)
            set_depth_cap(200)
        assert code == 3


class TestVariation:
    def test_ncv_evidence(self, tmp_path):
        code = run(
            tmp_path, "variation", "--fn", "cantor_abs", "--set", "D",
            "--domain", "-1", "1", "--mode", "ncv", "--seed", "5",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-variation.json")
        assert doc["verdict"] == "NCV-only-evidence"
        assert all(r["max_signed_sum"]["value"] == "0/1" for r in doc["rows"])

    def test_adversary_split(self, tmp_path):
        code = run(
            tmp_path, "variation", "--fn", "cantor_abs", "--set", "D",
            "--domain", "-1", "1", "--mode", "nv", "--adversary", "split:0",
            "--seed", "6", "--out", "adv.json",
        )
        assert code == 0
        doc = load(tmp_path, "adv.json")
        assert doc["best_abs_sum"]["value"] == "2/1"
        assert (tmp_path / "adv-witness.csv").exists()

    def test_empty_set(self, tmp_path):
        code = run(
            tmp_path, "variation", "--fn", "identity", "--set", "empty",
            "--domain", "0", "1", "--seed", "7",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-variation.json")
        assert doc["verdict"] == "NV-evidence"


class TestCovFtcScan:
    def test_cov_expected_fails_matches(self, tmp_path):
        code = run(
            tmp_path, "cov", "--instance", "cantorabs-unit",
            "--interval", "0", "1", "--seed", "8", "--samples", "3",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-cov.json")
        assert doc["verdict"] == "refuted"
        assert doc["channels_consistent"] is True
        assert (tmp_path / doc["witness_file"]).exists()

    def test_cov_unknown_instance(self, tmp_path):
        assert run(
            tmp_path, "cov", "--instance", "missing", "--seed", "1"
        ) == 2

    def test_ftc_expectation_mismatch_exit_1(self, tmp_path):
        code = run(
            tmp_path, "ftc", "--fn", "cantor", "--domain", "0", "1",
            "--seed", "9", "--samples", "3", "--expect", "holds",
        )
        assert code == 1

    def test_ftc_expectation_match(self, tmp_path):
        code = run(
            tmp_path, "ftc", "--fn", "cantor", "--domain", "0", "1",
            "--seed", "9", "--samples", "3", "--expect", "fails",
        )
        assert code == 0

    def test_scan_grid(self, tmp_path):
        code = run(
            tmp_path, "scan", "--instance", "cantorabs-unit",
            "--grid", "-1", "0", "0", "1", "-1", "1",
            "--seed", "10", "--samples", "2",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-scan.json")
        assert doc["nv_refuted"] is True
        verdicts = {tuple(c["interval"]): c["verdict"] for c in doc["cells"]}
        assert verdicts[("0/1", "1/1")] == "refuted"
        assert verdicts[("-1/1", "1/1")] == "holds-evidence"


class TestDeterminism:
    def test_cov_reports_byte_identical(self, tmp_path):
        args = (
            "cov", "--instance", "cantorabs-unit", "--interval", "0", "1",
            "--seed", "21", "--samples", "3",
        )
        run(tmp_path, *args, "--out", "c1.json")
        run(tmp_path, *args, "--out", "c2.json")
        a = (tmp_path / "c1.json").read_text()
        b = (tmp_path / "c2.json").read_text()
        # the embedded witness filename tracks --out; mask it before comparing
        assert a.replace("c1-witness", "W") == b.replace("c2-witness", "W")

    def test_variation_reports_byte_identical(self, tmp_path):
        args = (
            "variation", "--fn", "cantor_abs", "--set", "D", "--domain",
            "-1", "1", "--seed", "22",
        )
        run(tmp_path, *args, "--out", "v1.json")
        run(tmp_path, *args, "--out", "v2.json")
        assert (tmp_path / "v1.json").read_bytes() == (tmp_path / "v2.json").read_bytes()


class TestCounterexample:
    def test_single_point(self, tmp_path):
        code = run(tmp_path, "counterexample", "--svc", "-n", "10", "--x-index", "0")
        assert code == 0
        doc = load(tmp_path, "gaugekit-counterexample.json")
        assert doc["all_ok"] is True
        q = doc["checks"][0]["quotient"]["value"]
        num, den = map(int, q.split("/"))
        assert num / den > 18.3

    def test_sampled_points(self, tmp_path):
        code = run(
            tmp_path, "counterexample", "--svc", "-n", "4", "--points", "8",
            "--seed", "11",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-counterexample.json")
        assert doc["points"] == 8 and doc["all_ok"] is True


class TestParsingVariants:
    def test_min_gauge_spec(self, tmp_path):
        code = run(
            tmp_path, "partition", "--domain", "-1", "1",
            "--gauge", "min:dist:D+const:1/3", "--out", "m.csv",
        )
        assert code == 0

    def test_points_set_and_const_gauge(self, tmp_path):
        code = run(
            tmp_path, "variation", "--fn", "square", "--set", "points:0",
            "--domain", "-1", "1", "--gauge", "const:1/100", "--seed", "12",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-variation.json")
        assert doc["set"] == "points:0"

    def test_integrate_tol(self, tmp_path):
        code = run(
            tmp_path, "integrate", "--fn", "one", "--domain", "0", "1",
            "--seed", "13", "--tol", "1e-6",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-integrate.json")
        assert doc["converged"] is True

    def test_scan_default_grid(self, tmp_path):
        code = run(
            tmp_path, "scan", "--instance", "square-sub", "--seed", "14",
            "--samples", "2",
        )
        assert code == 0
        doc = load(tmp_path, "gaugekit-scan.json")
        assert doc["nv_refuted"] is False
        assert len(doc["cells"]) == 5  # 4 dyadic cells plus the full domain

    def test_bad_set_spec(self, tmp_path):
        code = run(
            tmp_path, "variation", "--fn", "identity", "--set", "whatever",
            "--domain", "0", "1", "--seed", "19",
        )
        assert code == 1

    def test_scan_odd_grid_rejected(self, tmp_path):
        code = run(
            tmp_path, "scan", "--instance", "square-sub", "--seed", "15",
            "--grid", "0", "1", "0",
        )
        assert code == 1

    def test_partition_seeded(self, tmp_path):
        code = run(
            tmp_path, "partition", "--domain", "0", "1",
            "--gauge", "const:1/5", "--seed", "16", "--out", "s.csv",
        )
        assert code == 0


class TestCatalog:
    def test_listing_and_descriptors(self, tmp_path, capsys):
        code = run(tmp_path, "catalog", "--out", "cat.json")
        assert code == 0
        out = capsys.readouterr().out
        assert "cantor_abs" in out
        doc = load(tmp_path, "cat.json")
        names = {d["name"] for d in doc["functions"]}
        assert "quartic_svc_dist" in names
