"""
Tests des bornes de complexité : arithmétique des formules, cohérence entre
chemins de calcul, ε_{t₀}, t₀ minimal et seuil supérieur par point fixe.
"""

import math

import numpy as np
import pandas as pd
import pytest

from src.core.bounds import (
    CONSTANTS_LABEL, BoundQuery, UniversalConstants, bound_report_table, eps_t0, lower_bound_cor1,
    lower_bound_cor2, lower_bound_general, lower_bound_thm1, lse_condition_prop4, minimal_t0,
    upper_bound_terms, upper_bound_thm2, write_reports_csv
)
from src.core.errors import UnstableMatrixError
from src.core.excitation_design import admissible_perturbation_radius, design_covariance
from src.util.helper.enum import BoundKindEnum

LOG_10_3 = math.log(10.0 / 3.0)


def query(epsilon=0.1, delta=0.1, u_bar=1.0, **constants) -> BoundQuery:
    return BoundQuery(epsilon=epsilon, delta=delta, u_bar=u_bar, constants=UniversalConstants(**constants))


class TestUniversalConstants:
    """Constantes universelles et leur lecture en ligne de commande"""

    def test_defaults(self):
        constants = UniversalConstants()
        assert (constants.c_lower, constants.c_prime, constants.K, constants.C) == (1.0, 1.0, 1.0, 1.0)

    def test_parse(self):
        constants = UniversalConstants.parse("c_lower=2, c_prime=0.5,K=1.5")
        assert constants.c_lower == 2.0
        assert constants.C == pytest.approx(0.5 * 1.5 ** 4)

    def test_parse_partial(self):
        assert UniversalConstants.parse("K=2").c_prime == 1.0

    def test_parse_rejects_unknown_and_malformed(self):
        with pytest.raises(ValueError):
            UniversalConstants.parse("c=1")
        with pytest.raises(ValueError):
            UniversalConstants.parse("c_lower")
        with pytest.raises(ValueError):
            UniversalConstants.parse("c_lower=-1")

    def test_query_validation(self):
        with pytest.raises(ValueError):
            query(delta=1.0)
        with pytest.raises(ValueError):
            query(epsilon=0.0)


class TestLowerBounds:
    """Bornes inférieures sur le nombre d'échantillons"""

    def test_general_rhs_arithmetic(self, jordan4):
        report = lower_bound_general(jordan4, np.eye(4), 0.25 * np.eye(4), query(), 10)
        assert report.rhs == pytest.approx(50.0 * LOG_10_3, rel=1e-12)
        assert report.kind == BoundKindEnum.LOWER_EQ5
        assert report.label == CONSTANTS_LABEL

    def test_general_log_boundary(self):
        report = lower_bound_general(np.zeros((2, 2)), np.zeros((2, 1)), [[0.0]], query(delta=1.0 / 3.0), 5)
        assert report.rhs == pytest.approx(0.0, abs=1e-12)
        assert report.satisfied

    def test_general_pure_noise(self):
        report = lower_bound_general(np.zeros((3, 3)), np.zeros((3, 1)), [[0.0]], query(), 40)
        assert report.lhs == pytest.approx(39.0)
        assert report.satisfied == (39.0 >= 50.0 * LOG_10_3)

    def test_general_requires_tau(self, jordan4):
        with pytest.raises(ValueError):
            lower_bound_general(jordan4, np.eye(4), np.eye(4), query(), 1)

    def test_thm1_arithmetic(self):
        report = lower_bound_thm1(np.zeros((4, 4)), np.eye(4), 0.25 * np.eye(4), query(epsilon=0.01), 10)
        assert report.rhs == pytest.approx(0.5 * 1e4 * (math.log(10.0) + 4.0), rel=1e-12)
        assert report.rhs == pytest.approx(31_512.9, abs=0.1)

    def test_thm1_linear_in_dimension(self):
        small = lower_bound_thm1(np.zeros((4, 4)), np.eye(4), 0.25 * np.eye(4), query(), 10)
        large = lower_bound_thm1(np.zeros((8, 8)), np.eye(8), 0.125 * np.eye(8), query(), 10)
        assert large.rhs / small.rhs == pytest.approx((math.log(10.0) + 8.0) / (math.log(10.0) + 4.0), rel=1e-12)

    def test_thm1_shares_lhs_with_general(self, jordan4):
        U = 0.25 * np.eye(4)
        assert lower_bound_thm1(jordan4, np.eye(4), U, query(), 30).lhs == \
            lower_bound_general(jordan4, np.eye(4), U, query(), 30).lhs

    def test_thm1_linear_in_c_lower(self, jordan4):
        base = lower_bound_thm1(jordan4, np.eye(4), np.eye(4) * 0.25, query(), 10)
        scaled = lower_bound_thm1(jordan4, np.eye(4), np.eye(4) * 0.25, query(c_lower=3.0), 10)
        assert scaled.rhs == pytest.approx(3.0 * base.rhs, rel=1e-12)

    def test_cor1_scalar(self):
        report = lower_bound_cor1([[0.8]], [[1.0]], query())
        assert report.value == pytest.approx(9.0 * LOG_10_3, rel=1e-9)
        assert report.inputs_echo["J_star"] == pytest.approx(2.0 / 0.36, rel=1e-9)

    def test_cor1_without_input(self):
        A = np.diag([0.5, 0.2])
        report = lower_bound_cor1(A, np.zeros((2, 2)), query())
        assert report.value == pytest.approx(LOG_10_3 / (2 * 0.01 * 1.0 / (1 - 0.04)), rel=1e-9)

    def test_cor1_non_increasing_in_budget(self):
        A = np.diag([0.9, 0.1])
        low = lower_bound_cor1(A, np.eye(2), query(u_bar=1.0))
        high = lower_bound_cor1(A, np.eye(2), query(u_bar=2.0))
        assert high.value <= low.value

    def test_cor1_unstable(self):
        with pytest.raises(UnstableMatrixError):
            lower_bound_cor1([[1.1]], [[1.0]], query())

    def test_cor2_arithmetic(self, jordan4):
        design = design_covariance(jordan4, np.eye(4), 1.0)
        report = lower_bound_cor2(jordan4, np.eye(4), query(), design)
        expected = (math.log(10.0) + 4.0) / (2.0 * 0.01 * design.objective)
        assert report.value == pytest.approx(expected, rel=1e-12)

    def test_cor2_warnings(self, jordan4):
        report = lower_bound_cor2(jordan4, np.eye(4), query(delta=0.5))
        assert len(report.warnings) == 2
        quiet = lower_bound_cor2(np.zeros((2, 2)), np.eye(2), query(epsilon=0.01))
        assert quiet.warnings == []

    def test_cor1_cor2_ratio(self, jordan4):
        design = design_covariance(jordan4, np.eye(4), 1.0)
        cor1 = lower_bound_cor1(jordan4, np.eye(4), query(), design)
        cor2 = lower_bound_cor2(jordan4, np.eye(4), query(), design)
        expected = 2.0 * (math.log(10.0) + 4.0) / (2.0 * LOG_10_3)
        assert cor2.value / cor1.value == pytest.approx(expected, rel=1e-12)


class TestLseCondition:
    """Condition de performance du LSE"""

    def test_trivial_system(self):
        report = lse_condition_prop4(np.zeros((3, 3)), np.zeros((3, 1)), [[0.0]], query(), 25)
        assert report.lhs == pytest.approx(24.0)
        assert report.inputs_echo["gamma_bar"] == pytest.approx(1.0)
        assert report.rhs == pytest.approx(100.0 * (math.log(10.0) + 3.0))

    def test_small_epsilon_branch(self):
        report = lse_condition_prop4([[0.5]], [[1.0]], [[1.0]], query(epsilon=0.01), 10)
        assert report.rhs == pytest.approx(1e4 * (math.log(10.0) + 1.0))

    def test_gamma_bar_branch(self):
        report = lse_condition_prop4([[0.5]], [[1.0]], [[1.0]], query(epsilon=1.0), 10)
        assert report.rhs == pytest.approx(8.0 * (math.log(10.0) + 1.0), rel=1e-9)

    def test_matches_sigma_recursion(self):
        general = lower_bound_general([[0.8]], [[1.0]], [[1.0]], query(), 60)
        prop4 = lse_condition_prop4([[0.8]], [[1.0]], [[1.0]], query(), 60)
        assert prop4.lhs == pytest.approx(general.lhs, rel=1e-10)

    def test_linear_in_c_prime(self):
        base = lse_condition_prop4([[0.5]], [[1.0]], [[1.0]], query(), 10)
        scaled = lse_condition_prop4([[0.5]], [[1.0]], [[1.0]], query(c_prime=2.0, K=2.0), 10)
        assert scaled.rhs == pytest.approx(32.0 * base.rhs, rel=1e-12)


class TestEpsT0:
    """ε_{t₀} : précision garantie après la phase initiale"""

    def test_closed_form_on_trivial_system(self):
        report = eps_t0(np.zeros((2, 2)), np.zeros((2, 1)), query(), 101)
        assert report.lhs == pytest.approx(100.0)
        assert report.value == pytest.approx(math.sqrt((math.log(20.0) + 2.0) / 100.0), rel=1e-12)

    def test_infeasible_sentinel(self):
        report = eps_t0(np.zeros((2, 2)), np.zeros((2, 1)), query(), 2)
        assert math.isinf(report.value)
        assert report.warnings

    def test_monotone_in_delta(self):
        loose = eps_t0(np.zeros((2, 2)), np.zeros((2, 1)), query(delta=0.2), 200)
        tight = eps_t0(np.zeros((2, 2)), np.zeros((2, 1)), query(delta=0.01), 200)
        assert tight.value > loose.value

    def test_scaling_on_jordan(self, jordan4):
        q = query(c_prime=1e-5)
        first = eps_t0(jordan4, np.eye(4), q, 10_000)
        second = eps_t0(jordan4, np.eye(4), q, 20_000)
        assert math.isfinite(first.value)
        assert 1.35 <= first.value / second.value <= 1.48

    @pytest.mark.slow
    def test_root_t0_constant(self, jordan4):
        q = query(c_prime=1e-5)
        first = eps_t0(jordan4, np.eye(4), q, 10_000).value * math.sqrt(10_000)
        second = eps_t0(jordan4, np.eye(4), q, 40_000).value * math.sqrt(40_000)
        assert second == pytest.approx(first, rel=0.05)


class TestMinimalT0:
    """Plus petit t₀ admissible"""

    def test_trivial_system(self):
        A, B = np.zeros((2, 2)), np.zeros((2, 1))
        q = query()
        t0 = minimal_t0(A, B, q)
        radius = admissible_perturbation_radius(A)
        assert t0 == 81
        assert eps_t0(A, B, q, t0).value <= radius
        assert eps_t0(A, B, q, t0 - 1).value > radius

    def test_search_cap(self):
        assert math.isinf(minimal_t0(np.zeros((2, 2)), np.zeros((2, 1)), query(), t_max=50))


class TestUpperBound:
    """Seuil supérieur par itération de point fixe"""

    def test_fixed_point_substitution(self):
        A = 0.1 * np.eye(2)
        q = query(epsilon=1.0, delta=0.5, c_prime=0.01)
        report = upper_bound_thm2(A, np.eye(2), q, 1000)
        terms, _ = upper_bound_terms(A, np.eye(2), q, 1000)
        t = report.value
        assert math.isfinite(t)
        assert t > 1000
        assert terms.rhs(t) <= t
        assert terms.rhs(t - 1) > t - 1

    def test_grows_with_dimension(self):
        q = query(epsilon=1.0, delta=0.5, c_prime=0.01)
        small = upper_bound_thm2(0.1 * np.eye(2), np.eye(2), q, 1000)
        large = upper_bound_thm2(0.1 * np.eye(4), np.eye(4), q, 1000)
        assert large.value > small.value

    def test_infinite_when_eps_t0_infeasible(self):
        report = upper_bound_thm2(0.1 * np.eye(2), np.eye(2), query(), 2)
        assert math.isinf(report.value)
        assert report.warnings

    def test_echo_contains_terms(self):
        report = upper_bound_thm2(0.1 * np.eye(2), np.eye(2), query(epsilon=1.0, delta=0.5, c_prime=0.01), 1000)
        for key in ("J_star", "C1", "C2", "gamma_norm", "eps_t0"):
            assert key in report.inputs_echo


class TestReportTable:
    """Tableau de rapports et export CSV"""

    def test_all_kinds(self, tmp_path):
        A = 0.5 * np.eye(2)
        kinds = list(BoundKindEnum)
        reports = bound_report_table(A, np.eye(2), query(), kinds, tau=50, t=50, t0=100)
        assert [r.kind for r in reports] == kinds
        path = write_reports_csv(reports, tmp_path / "bounds.csv")
        frame = pd.read_csv(path)
        assert list(frame["kind"]) == [k.value for k in kinds]
        assert "warnings" in frame.columns

    def test_missing_parameter(self):
        with pytest.raises(ValueError):
            bound_report_table(0.5 * np.eye(2), np.eye(2), query(), [BoundKindEnum.LOWER_EQ5])

    def test_shared_design_values(self):
        reports = bound_report_table([[0.8]], [[1.0]], query(), [BoundKindEnum.LOWER_COR1, BoundKindEnum.LOWER_COR2])
        assert reports[0].inputs_echo["J_star"] == reports[1].inputs_echo["J_star"]
        assert reports[0].value == pytest.approx(9.0 * LOG_10_3, rel=1e-9)
