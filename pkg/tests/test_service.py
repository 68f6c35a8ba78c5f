import numpy as np
import pytest
from fastapi.testclient import TestClient

import traderank
from traderank.analysis import correlator
from traderank.google_matrix import Direction, build_google, build_stochastic
from traderank.rank import cheirank, mass_rank, pagerank, rank_table
from traderank.service.app import app
from traderank.spectrum import full_spectrum
from traderank.trade_graph import load_flows

client = TestClient(app, raise_server_exceptions=False)


class TestHealth:
    def test_ok(self):
        response = client.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["version"] == traderank.__version__


class TestYears:
    def test_lists_years_for_commodity(self, multiyear_csv):
        response = client.post("/years", json={"csv": multiyear_csv})
        assert response.status_code == 200
        assert response.json() == {
            "commodity": "TOTAL",
            "years": [2000, 2001, 2002, 2003, 2004],
        }

    def test_commodity_filter(self, multiyear_csv):
        response = client.post("/years", json={"csv": multiyear_csv, "commodity": "GRAIN"})
        assert response.json()["years"] == [2004]

    def test_multiple_documents_merged(self, three_country_csv, multiyear_csv):
        response = client.post("/years", json={"csv": [three_country_csv, multiyear_csv]})
        assert response.json()["years"] == [2000, 2001, 2002, 2003, 2004, 2008]

    def test_bad_csv_is_a_400(self):
        response = client.post("/years", json={"csv": "not a header\n1,2,3\n"})
        assert response.status_code == 400
        assert response.json()["error"] == "input"


class TestRank:
    def test_matches_library_computation(self, three_country_csv):
        response = client.post(
            "/rank", json={"csv": three_country_csv, "year": 2008, "alpha": 0.5}
        )
        assert response.status_code == 200
        body = response.json()
        matrix = load_flows(three_country_csv, year=2008, commodity="TOTAL")
        table = rank_table(matrix, alpha=0.5)
        assert body["n"] == 3
        assert body["year"] == 2008
        assert body["pagerank_iterations"] == table.pagerank_iterations
        by_code = {row["code"]: row for row in body["table"]}
        for i, code in enumerate(table.codes):
            assert by_code[code]["K"] == int(table.k[i])
            assert by_code[code]["Kstar"] == int(table.k_star[i])
            assert by_code[code]["K2"] == int(table.k2[i])
            assert by_code[code]["Kimport"] == int(table.k_import[i])
            assert by_code[code]["Kexport"] == int(table.k_export[i])
        assert [entry["code"] for entry in body["registry"]] == ["DEU", "FRA", "USA"]
        assert body["fits"] is None

    def test_leaders_row_count_respects_top(self, three_country_csv):
        response = client.post(
            "/rank", json={"csv": three_country_csv, "year": 2008, "top": 2}
        )
        leaders = response.json()["leaders"]
        assert len(leaders) == 2
        assert leaders[0]["rank"] == 1

    def test_fit_range_produces_fits(self, multiyear_csv):
        response = client.post(
            "/rank",
            json={"csv": multiyear_csv, "year": 2002, "fit_range": [1, 4]},
        )
        body = response.json()
        assert response.status_code == 200
        kinds = {fit["kind"] for fit in body["fits"]}
        assert kinds == {"pagerank", "cheirank"}
        for fit in body["fits"]:
            assert fit["k_min"] == 1 and fit["k_max"] == 4

    def test_missing_year_is_a_400(self, three_country_csv):
        response = client.post("/rank", json={"csv": three_country_csv, "year": 1999})
        assert response.status_code == 400
        assert response.json()["error"] == "input"

    def test_missing_body_field_is_a_422(self):
        response = client.post("/rank", json={"year": 2008})
        assert response.status_code == 422

    def test_non_convergence_is_a_500(self, three_country_csv):
        response = client.post(
            "/rank",
            json={"csv": three_country_csv, "year": 2008, "max_iter": 1, "tol": 1e-15},
        )
        assert response.status_code == 500
        body = response.json()
        assert body["error"] == "non_convergence"
        assert body["iterations"] == 1
        assert body["residual"] > 0.0

    def test_bad_alpha_is_a_400(self, three_country_csv):
        response = client.post(
            "/rank", json={"csv": three_country_csv, "year": 2008, "alpha": 1.5}
        )
        assert response.status_code == 400


class TestSpectrum:
    def test_matches_library_eigenvalues(self, three_country_csv):
        response = client.post(
            "/spectrum", json={"csv": three_country_csv, "year": 2008, "alpha": 0.5}
        )
        body = response.json()
        matrix = load_flows(three_country_csv, year=2008, commodity="TOTAL")
        sp = full_spectrum(build_google(build_stochastic(matrix, Direction.DIRECT), 0.5))
        got = [complex(v["re"], v["im"]) for v in body["eigenvalues"]]
        assert np.allclose(got, sp.eigenvalues)
        assert body["quasi_degenerate"] is None

    def test_alpha_one_reports_quasi_degenerate(self, multiyear_csv):
        response = client.post(
            "/spectrum", json={"csv": multiyear_csv, "year": 2002, "alpha": 1.0}
        )
        body = response.json()
        assert body["quasi_degenerate"] is not None
        assert len(body["quasi_degenerate"]) >= 1


class TestSpindle:
    def test_counts_conserved(self, multiyear_csv):
        response = client.post("/spindle", json={"csv": multiyear_csv})
        body = response.json()
        assert body["years"] == [2000, 2001, 2002, 2003, 2004]
        total_countries = 3 + 3 + 4 + 3 + 4
        assert body["total"] == total_countries
        assert sum(cell["count"] for cell in body["cells"]) == total_countries
        assert body["x_negative"] + body["x_zero"] + body["x_positive"] == total_countries

    def test_rescaled_grid(self, multiyear_csv):
        response = client.post(
            "/spindle", json={"csv": multiyear_csv, "rescale": True}
        )
        body = response.json()
        assert body["rescaled"] is True
        for cell in body["cells"]:
            assert -1.0 <= cell["x"] <= 1.0
            assert 0.0 <= cell["y"] <= 2.0

    def test_year_subset(self, multiyear_csv):
        response = client.post("/spindle", json={"csv": multiyear_csv, "years": [2000]})
        assert response.json()["total"] == 3


class TestVelocity:
    def test_matches_library_series(self, multiyear_csv):
        response = client.post(
            "/velocity", json={"csv": multiyear_csv, "years": [2000, 2001, 2002]}
        )
        body = response.json()
        assert len(body["samples"]) == 6
        by_key = {(s["code"], s["year_from"]): s for s in body["samples"]}
        assert by_key[("A", 2000)]["dv2"] == 1.0
        assert by_key[("A", 2000)]["kpk"] == 3
        assert body["window_years"] == 5
        assert len(body["bands"]) == 3

    def test_single_year_is_a_400(self, three_country_csv):
        response = client.post("/velocity", json={"csv": three_country_csv})
        assert response.status_code == 400


class TestCorrelator:
    def test_uniform_network_is_exactly_zero(self, uniform_csv):
        response = client.post("/correlator", json={"csv": uniform_csv})
        body = response.json()
        (row,) = body["rows"]
        assert row["kappa"] == 0.0
        assert row["kappa_mass"] == 0.0
        assert row["n"] == 4

    def test_matches_library_values(self, multiyear_csv):
        response = client.post("/correlator", json={"csv": multiyear_csv, "years": [2002]})
        (row,) = response.json()["rows"]
        matrix = load_flows(multiyear_csv, year=2002, commodity="TOTAL")
        g = build_google(build_stochastic(matrix, Direction.DIRECT), 0.5)
        expected = correlator(pagerank(g), cheirank(matrix, 0.5))
        expected_mass = correlator(mass_rank(matrix, "import"), mass_rank(matrix, "export"))
        assert row["kappa"] == expected
        assert row["kappa_mass"] == expected_mass


class TestSummary:
    def test_rows_match_library(self, multiyear_csv):
        response = client.post("/summary", json={"csv": multiyear_csv})
        rows = response.json()["rows"]
        assert [r["year"] for r in rows] == [2000, 2001, 2002, 2003, 2004]
        assert [r["n"] for r in rows] == [3, 3, 4, 3, 4]

    def test_single_year_is_a_400(self, three_country_csv):
        response = client.post("/summary", json={"csv": three_country_csv})
        assert response.status_code == 400


class TestRmwtn:
    def test_deterministic_and_conserving(self):
        request = {"n": 10, "seed": 1, "realizations": 3}
        first = client.post("/rmwtn", json=request)
        second = client.post("/rmwtn", json=request)
        assert first.status_code == 200
        assert first.json() == second.json()
        body = first.json()
        assert len(body["points"]) == 30
        assert body["histogram"]["total"] == 30
        assert sum(c["count"] for c in body["histogram"]["cells"]) == 30

    def test_shared_variant_sits_on_the_axis(self):
        response = client.post(
            "/rmwtn", json={"n": 12, "seed": 2, "variant": "shared", "realizations": 2}
        )
        body = response.json()
        assert body["histogram"]["x_zero"] == body["histogram"]["total"] == 24

    def test_bad_variant_is_a_400(self):
        response = client.post("/rmwtn", json={"n": 5, "variant": "nope"})
        assert response.status_code == 400
