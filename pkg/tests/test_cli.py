import contextlib
import io
import json
import os

import jsonschema
import numpy as np
import pytest
from jsonschema import Draft7Validator

from volkit.cli import main

FIXTURE = os.path.join(os.path.dirname(__file__), "data", "gaussian_prices.csv")
SCHEMA_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "volkit", "schemas")

PARAMS_DOC = {
    "family": "garch", "omega": 0.1, "alpha": [0.1], "beta": [0.8],
    "gamma": 0.0, "rho": 0.0, "aug": None, "mean": 0.0, "sigma1_sq": 1.0,
    "innovation": {"name": "gaussian", "mu": 0.0},
}


def load_schema(name):
    with open(os.path.join(SCHEMA_DIR, name)) as fh:
        return json.load(fh)


def validate(doc, schema_name):
    from referencing import Registry, Resource
    from referencing.jsonschema import DRAFT7

    schema = load_schema(schema_name)
    resources = [
        (s["$id"], Resource.from_contents(s, default_specification=DRAFT7))
        for s in (load_schema(n) for n in os.listdir(SCHEMA_DIR)
                  if n.endswith(".json"))
    ]
    registry = Registry().with_resources(resources)
    Draft7Validator(schema, registry=registry).validate(doc)


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = main(argv)
        except SystemExit as exc:  # argparse paths
            code = exc.code
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def params_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "params.json"
    path.write_text(json.dumps(PARAMS_DOC))
    return str(path)


@pytest.fixture(scope="module")
def fit_doc():
    code, out, err = run_cli(["fit", "--csv", FIXTURE, "--price-column", "PriceUSD",
                              "--family", "garch", "--p", "1", "--q", "1",
                              "--innovation", "gaussian"])
    assert code == 0
    return json.loads(out)


class TestFit:
    def test_contract_and_schema(self, fit_doc):
        validate(fit_doc, "fit_result.schema.json")
        validate(fit_doc["params"], "params.schema.json")
        assert fit_doc["converged"] is True
        assert fit_doc["nu_hat"] is None

    def test_ged_adds_nu_hat(self):
        code, out, _ = run_cli(["fit", "--csv", FIXTURE, "--price-column",
                                "PriceUSD", "--innovation", "ged"])
        assert code == 0
        doc = json.loads(out)
        validate(doc, "fit_result.schema.json")
        assert doc["nu_hat"] is not None and doc["nu_hat"] > 0
        assert doc["params"]["innovation"]["name"] == "ged"

    def test_unknown_family_exits_1_naming_flag(self):
        code, out, err = run_cli(["fit", "--csv", FIXTURE, "--family", "tgarch"])
        assert code == 1
        assert "--family" in err

    def test_missing_csv_exits_1(self):
        code, _, err = run_cli(["fit", "--csv", "/nonexistent.csv"])
        assert code == 1
        assert "error" in err.lower()


class TestGof:
    def test_gaussian_fixture_fail_to_reject(self, tmp_path):
        wpath = str(tmp_path / "w.csv")
        code, out, err = run_cli(["gof", "--csv", FIXTURE, "--price-column",
                                  "PriceUSD", "--null", "gaussian",
                                  "--emit-process", wpath])
        assert code == 0
        doc = json.loads(out)
        validate(doc, "gof_report.schema.json")
        assert doc["ks"] < 2.241  # checked-in Gaussian fixture: no rejection
        assert doc["method"] == "khmaladze-asymptotic"
        rows = open(wpath).read().strip().splitlines()
        assert rows[0] == "v,w"
        assert len(rows) > 1000

    def test_ged_bootstrap_deterministic(self):
        args = ["gof", "--csv", FIXTURE, "--price-column", "PriceUSD",
                "--null", "ged", "--bootstrap", "120", "--seed", "7",
                "--no-refit"]
        code1, out1, _ = run_cli(args)
        code2, out2, _ = run_cli(args)
        assert code1 == code2 == 0
        assert out1 == out2
        doc = json.loads(out1)
        validate(doc, "gof_report.schema.json")
        assert doc["ks_pvalue"] is not None
        assert doc["cvm_pvalue"] is not None
        assert doc["method"] == "edf-bootstrap"
        assert doc["bootstrap"]["replicates"] == 120

    def test_bootstrap_without_seed_exits_1(self):
        code, _, err = run_cli(["gof", "--csv", FIXTURE, "--price-column",
                                "PriceUSD", "--null", "ged", "--bootstrap", "100"])
        assert code == 1
        assert "--seed" in err


class TestRisk:
    def test_gaussian_composition(self, fit_doc, tmp_path):
        fit_path = tmp_path / "fit.json"
        fit_path.write_text(json.dumps(fit_doc))
        code, out, _ = run_cli(["risk", "--csv", FIXTURE, "--price-column",
                                "PriceUSD", "--fit", str(fit_path),
                                "--p-levels", "0.05"])
        assert code == 0
        doc = json.loads(out)
        validate(doc, "risk.schema.json")
        from scipy.special import ndtri

        sigma = np.sqrt(doc["sigma_next_sq"])
        expected = doc["mean"] + sigma * ndtri(0.05)
        assert doc["levels"][0]["var"] == pytest.approx(expected, rel=1e-10)

    def test_bad_tail_level_exits_1(self):
        code, _, err = run_cli(["risk", "--csv", FIXTURE, "--price-column",
                                "PriceUSD", "--p-levels", "1.5"])
        assert code == 1

    def test_ged_var_vs_monte_carlo(self, tmp_path):
        # simulation oracle for the one-step-ahead return quantile
        code, out, _ = run_cli(["fit", "--csv", FIXTURE, "--price-column",
                                "PriceUSD", "--innovation", "ged"])
        assert code == 0
        fit_doc = json.loads(out)
        fit_path = tmp_path / "fitg.json"
        fit_path.write_text(json.dumps(fit_doc))
        code, out, _ = run_cli(["risk", "--csv", FIXTURE, "--price-column",
                                "PriceUSD", "--fit", str(fit_path),
                                "--p-levels", "0.05"])
        assert code == 0
        doc = json.loads(out)
        from volkit.distributions import Ged
        from volkit.numerics import rng_stream

        n = 1_000_000
        g = Ged(fit_doc["nu_hat"])
        draws = doc["mean"] + np.sqrt(doc["sigma_next_sq"]) * g.sample(
            rng_stream(123, 0), n)
        emp = float(np.quantile(draws, 0.05))
        dens = float(g.pdf((emp - doc["mean"]) / np.sqrt(doc["sigma_next_sq"])))
        se = np.sqrt(0.05 * 0.95 / n) / (dens / np.sqrt(doc["sigma_next_sq"]))
        assert abs(doc["levels"][0]["var"] - emp) < 4 * se


class TestSimulate:
    def test_deterministic_files(self, params_file, tmp_path):
        p1, p2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        code1, _, _ = run_cli(["simulate", "--params", params_file, "--n", "1000",
                               "--seed", "3", "--out", p1])
        code2, _, _ = run_cli(["simulate", "--params", params_file, "--n", "1000",
                               "--seed", "3", "--out", p2])
        assert code1 == code2 == 0
        assert open(p1).read() == open(p2).read()

    def test_seed_required(self, params_file, tmp_path):
        code, _, err = run_cli(["simulate", "--params", params_file, "--n", "10",
                                "--out", str(tmp_path / "x.csv")])
        assert code == 1
        assert "--seed" in err

    def test_simulate_then_fit_recovers(self, params_file, tmp_path):
        out_csv = str(tmp_path / "sim.csv")
        run_cli(["simulate", "--params", params_file, "--n", "4000",
                 "--seed", "5", "--out", out_csv])
        code, out, _ = run_cli(["fit", "--csv", out_csv, "--date-column", "t",
                                "--returns-column", "return"])
        # the t column is an integer index, not a date: use returns directly
        assert code == 1  # date parse fails -> documented input error
        # load via numpy instead and fit through the library
        rows = np.genfromtxt(out_csv, delimiter=",", names=True)
        from volkit.estimation import fit as fit_fn
        from volkit.garch import GarchSpec

        res = fit_fn(GarchSpec(), rows["return_"])  # genfromtxt renames the keyword column
        assert abs(res.params.alpha[0] - 0.1) < 0.1
        assert abs(res.params.beta[0] - 0.8) < 0.1


class TestDiagnosticsCmd:
    def test_csv_shape(self, tmp_path):
        out_csv = str(tmp_path / "diag.csv")
        code, out, _ = run_cli(["diagnostics", "--csv", FIXTURE, "--price-column",
                                "PriceUSD", "--max-lag", "15", "--out", out_csv])
        assert code == 0
        rows = open(out_csv).read().strip().splitlines()
        assert len(rows) == 1 + 16  # header + lags 0..15
        doc = json.loads(out)
        assert doc["n"] == 1500
        assert doc["kurtosis"] > 0


class TestManifest:
    def test_rerun_reproduces_stdout(self, params_file, tmp_path):
        man = str(tmp_path / "m.json")
        out_csv = str(tmp_path / "sim.csv")
        code, out1, _ = run_cli(["simulate", "--params", params_file, "--n", "200",
                                 "--seed", "9", "--out", out_csv, "--manifest", man])
        assert code == 0
        doc = json.load(open(man))
        validate(doc, "manifest.schema.json")
        code, out2, _ = run_cli(["rerun", "--manifest", man])
        assert code == 0
        assert out1 == out2

    def test_manifest_on_stderr_by_default(self, params_file, tmp_path):
        code, _, err = run_cli(["simulate", "--params", params_file, "--n", "50",
                                "--seed", "1", "--out", str(tmp_path / "s.csv")])
        assert code == 0
        doc = json.loads(err)
        assert doc["command"] == "simulate"
        assert doc["seed"] == 1
