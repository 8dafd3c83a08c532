import math
import time

import numpy as np
import pytest

from hydrocrack.core import default_iron_params
from hydrocrack.mesh import generate_rect_mesh
from hydrocrack.verify import (
    OracleReport,
    diffusion_1d_oracle,
    format_report_table,
    gamma_functional,
    gamma_ladder,
    patch_test_error,
    relative_report,
    run_verification_suite,
    steady_enrichment_oracle,
    stressed_bar,
    tangent_errors,
    transient_bar_error,
    write_report_csv,
)

P = default_iron_params()


def test_report_passes_iff_within_tolerance():
    assert OracleReport("a", 1.0, 1.0, 0.0, 0.0).passed
    assert not OracleReport("a", 1.0, 1.0, 2e-3, 1e-3).passed
    assert not OracleReport("a", np.nan, 1.0, np.nan, 1.0).passed
    assert relative_report("b", 1.01, 1.0, 0.02).error == pytest.approx(0.01)


def test_gamma_of_zero_field():
    m = generate_rect_mesh(4.0, 1.0, 8, 2, "quad8")
    assert gamma_functional(m, np.zeros(m.n_nodes), 1.0) == 0.0


def test_gamma_of_unit_field_is_half_width_over_ell():
    m = generate_rect_mesh(6.0, 1.0, 6, 1, "quad8")
    assert gamma_functional(m, np.ones(m.n_nodes), 0.5) == pytest.approx(6.0 / (2 * 0.5), rel=1e-13)


def test_gamma_of_exponential_profile_converges_quadratically():
    errs = gamma_ladder(1.0, (5, 10, 20))
    assert errs[1] < 0.02
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] > 3.5  # at least quadratic in h


def test_diffusion_oracle_values():
    assert diffusion_1d_oracle(0.0, 1.0, 0.7, 2.0) == pytest.approx(0.7)
    assert diffusion_1d_oracle(50.0, 1.0, 1.0, 1.0) < 1e-250
    assert diffusion_1d_oracle(2.0 * math.sqrt(3.0 * 0.5), 0.5, 2.0, 3.0) == pytest.approx(2 * 0.157299207050285, rel=1e-12)
    with pytest.raises(ValueError):
        diffusion_1d_oracle(0.0, 0.0, 1.0, 1.0)


def test_enrichment_oracle_values():
    assert steady_enrichment_oracle(0.0, 0.4, P) == pytest.approx(0.4)
    assert steady_enrichment_oracle(100.0, 1.0, P) == pytest.approx(1.0835, abs=5e-5)
    a, b = steady_enrichment_oracle([30.0, 45.0], 2.0, P)
    assert steady_enrichment_oracle(75.0, 2.0, P) == pytest.approx(a * b / 2.0, rel=1e-14)


def test_transient_bar_error_decreases_under_refinement():
    errs = [transient_bar_error(nx, n) for nx, n in ((10, 12), (20, 50), (40, 200))]
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] < 0.01


def test_stressed_bar_matches_exponential_law():
    x, c, sig, params = stressed_bar(100.0)
    ref = steady_enrichment_oracle(sig, 1.0, params)
    assert np.max(np.abs(c / ref - 1.0)) < 5e-3
    assert c.max() / c.min() == pytest.approx(1.0835, abs=1e-3)


@pytest.mark.parametrize("kind", ["quad4", "quad8"])
def test_tangents_against_finite_differences(kind):
    eu, ephi = tangent_errors(kind, seed=3)
    assert eu < 1e-5 and ephi < 1e-5


@pytest.mark.parametrize("kind", ["quad4", "quad8"])
def test_patch_on_distorted_mesh(kind):
    assert patch_test_error(kind) < 1e-10


def test_fast_suite_passes_within_budget(tmp_path):
    t0 = time.perf_counter()
    reports = run_verification_suite("fast")
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    names = [r.name for r in reports]
    assert names == sorted(names)
    assert all(np.isfinite(r.error) for r in reports)
    failed = [r.name for r in reports if not r.passed]
    assert failed == []
    table = format_report_table(reports)
    assert table.count("PASS") == len(reports)
    write_report_csv(tmp_path / "v.csv", reports)
    rows = (tmp_path / "v.csv").read_text().splitlines()
    assert rows[0] == "name,computed,reference,error,tolerance,pass" and len(rows) == len(reports) + 1


def test_unknown_level_rejected():
    with pytest.raises(ValueError):
        run_verification_suite("medium")
