import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from cohortmix import CurveObjective, cox_criterion, optimize_curve
from cohortmix.config import parse_design
from cohortmix.service import create_app
from test_config_cli import table1_theta5_config, waitlist_config


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


class TestHealth:
    def test_health(self, client):
        r = client.get("/v1/health")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok"
        assert body["schema_version"] == "1"
        assert "version" in body


class TestPreview:
    def test_exponential_survival_median(self, client):
        r = client.post("/v1/preview", json=table1_theta5_config())
        assert r.status_code == 200
        body = r.json()
        grid = np.array(body["grid"])
        surv = np.array(body["survival"], dtype=float)
        median = 10 * math.log(2)
        assert np.interp(median, grid, surv) == pytest.approx(0.5, abs=1e-3)
        assert body["schema_version"] == "1"
        assert body["echo"]["design"]["theta"] == 5.0

    def test_uniform_weight_constant(self, client):
        r = client.post("/v1/preview", json=table1_theta5_config())
        w = np.array(r.json()["weight"], dtype=float)
        np.testing.assert_allclose(w, 0.1, rtol=1e-12)

    def test_weibull_curves_monotone(self, client):
        r = client.post("/v1/preview", json=waitlist_config() | {"effect": None})
        # effect is not a preview key
        assert r.status_code == 400
        payload = {"design": waitlist_config()["design"]}
        r = client.post("/v1/preview", json=payload)
        assert r.status_code == 200
        surv = np.array(r.json()["survival"], dtype=float)
        arr = np.array(r.json()["arrival_cdf"], dtype=float)
        assert np.all(np.diff(surv) <= 1e-12)
        assert np.all(np.diff(arr) >= -1e-12)
        assert np.all(np.isfinite(surv))

    def test_validation_error_400(self, client):
        doc = table1_theta5_config()
        doc["design"]["survival"] = {"family": "exponential", "mean": -2}
        r = client.post("/v1/preview", json=doc)
        assert r.status_code == 400
        assert "mean" in r.json()["error"]


class TestOptimizeEstimation:
    def test_table1_theta10(self, client):
        doc = table1_theta5_config()
        doc["design"]["theta"] = 10.0
        r = client.post("/v1/optimize/estimation", json=doc)
        assert r.status_code == 200
        body = r.json()
        assert body["result"]["pi_opt"] == pytest.approx(0.68, abs=0.02)
        assert len(body["curves"]["optimal"]) == len(body["curves"]["grid"])

    def test_early_weight(self, client):
        doc = table1_theta5_config()
        doc["design"]["weight"] = {"family": "beta4", "shape1": 1.0, "shape2": 4.0,
                                   "lower": 0.0, "upper": 10.0}
        r = client.post("/v1/optimize/estimation", json=doc)
        assert r.json()["result"]["pi_opt"] == pytest.approx(0.75, abs=0.02)

    def test_matches_direct_library_call(self, client):
        doc = table1_theta5_config()
        r = client.post("/v1/optimize/estimation", json=doc)
        body = r.json()
        design = parse_design(doc["design"])
        ev = CurveObjective(design)
        direct = optimize_curve(design, evaluator=ev)
        assert body["result"]["pi_opt"] == pytest.approx(direct.pi_opt, abs=1e-12)
        assert body["result"]["objective_value"] == pytest.approx(
            direct.objective_value, rel=1e-12)
        grid = np.array(body["curves"]["grid"])
        np.testing.assert_allclose(
            np.array(body["curves"]["even_mix"], dtype=float),
            ev.variance_curve(grid, 0.5).values, rtol=1e-12)

    def test_infeasible_422(self, client):
        doc = table1_theta5_config()
        doc["design"]["theta"] = 2.0
        doc["design"]["arrival"] = {"family": "point_mass", "value": 1.0}
        doc["design"]["incident_entry"] = {"family": "point_mass", "value": 0.0}
        r = client.post("/v1/optimize/estimation", json=doc)
        assert r.status_code == 422
        assert "narrow" in r.json()["error"]

    def test_stateless_repeats(self, client):
        doc = table1_theta5_config()
        first = client.post("/v1/optimize/estimation", json=doc).json()
        doc2 = table1_theta5_config()
        doc2["design"]["theta"] = 1.0
        client.post("/v1/optimize/estimation", json=doc2)
        second = client.post("/v1/optimize/estimation", json=doc).json()
        assert first["result"] == second["result"]
        assert first["curves"] == second["curves"]


class TestOptimizeInference:
    def test_waitlist_analog(self, client):
        r = client.post("/v1/optimize/inference", json=waitlist_config())
        assert r.status_code == 200
        body = r.json()
        assert body["result"]["pi_opt"] == 0.0
        assert body["result"]["b_incident_minus_prevalent"] == pytest.approx(-0.08, abs=0.02)

    def test_matches_direct_call(self, client):
        doc = waitlist_config()
        body = client.post("/v1/optimize/inference", json=doc).json()
        from cohortmix.config import parse_effect
        design = parse_design(doc["design"])
        direct = cox_criterion(design, effect=parse_effect(doc["effect"]))
        assert body["result"]["b_incident_minus_prevalent"] == pytest.approx(
            direct.b_incident_minus_prevalent, rel=1e-12)
        assert body["result"]["theoretical_power"] == pytest.approx(
            direct.theoretical_power, rel=1e-12)

    def test_zero_effect_power_alpha(self, client):
        doc = table1_theta5_config()
        doc["effect"] = {"log_hr": 0.0}
        doc["alpha"] = 0.05
        r = client.post("/v1/optimize/inference", json=doc)
        assert r.json()["result"]["theoretical_power"] == pytest.approx(0.05)

    def test_point_mass_zero_censoring(self, client):
        doc = table1_theta5_config()
        doc["design"]["incident_entry"] = {"family": "point_mass", "value": 0.0}
        r = client.post("/v1/optimize/inference", json=doc)
        assert r.json()["result"]["pi_opt"] == 0.0

    def test_unknown_key_400(self, client):
        doc = table1_theta5_config()
        doc["nonsense"] = 1
        r = client.post("/v1/optimize/inference", json=doc)
        assert r.status_code == 400


class TestWallTimeBudget:
    def test_503_when_budget_exceeded(self, monkeypatch):
        import cohortmix.service as service_mod

        monkeypatch.setattr(service_mod, "WALL_TIME_BUDGET_S", -1.0)
        client = TestClient(service_mod.create_app())
        r = client.post("/v1/optimize/estimation", json=table1_theta5_config())
        assert r.status_code == 503
        assert "retry" in r.json()["error"]


class TestUiParityChain:
    """The UI posts exactly the config-file design payloads (proven in the
    frontend suite) and renders API numbers verbatim, so CLI/UI parity
    reduces to CLI-vs-service equality on those payloads."""

    def test_estimation_parity_with_cli(self, client, tmp_path, capsys):
        import json
        from pathlib import Path

        from cohortmix.cli import main

        cfg = Path(__file__).resolve().parent.parent / "configs" / "table1_theta5.json"
        out = tmp_path / "cli"
        assert main(["optimize-estimation", "--config", str(cfg),
                     "--out", str(out), "--no-figures"]) == 0
        capsys.readouterr()
        summary = (out / "summary.txt").read_text()
        cli_pi = float(next(l for l in summary.splitlines()
                            if l.startswith("pi_opt_full_precision=")).split("=")[1])
        body = client.post("/v1/optimize/estimation",
                           json=json.loads(cfg.read_text())).json()
        assert body["result"]["pi_opt"] == pytest.approx(cli_pi, abs=1e-12)

    def test_inference_parity_with_cli(self, client, tmp_path, capsys):
        import json
        from pathlib import Path

        from cohortmix.cli import main

        cfg = Path(__file__).resolve().parent.parent / "configs" / "waitlist_analog.json"
        out = tmp_path / "cli"
        assert main(["optimize-inference", "--config", str(cfg),
                     "--out", str(out)]) == 0
        capsys.readouterr()
        cli_payload = json.loads((out / "decision.json").read_text())
        body = client.post("/v1/optimize/inference",
                           json=json.loads(cfg.read_text())).json()
        assert body["result"]["b_incident_minus_prevalent"] == pytest.approx(
            cli_payload["b_incident_minus_prevalent"], abs=1e-12)
        assert body["result"]["pi_opt"] == cli_payload["pi_opt"]
        assert body["result"]["theoretical_power"] == pytest.approx(
            cli_payload["theoretical_power"], abs=1e-12)
