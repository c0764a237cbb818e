"""Parity-check band construction, termination accounting, and file formats.

The two reference grids below were derived by hand from the generator
exponents (rate-2/3 code, g1 = {0,8,9,12}, g2 = {0,6,11,13}): entry (r, c)
of the band is 1 exactly when r - t is an exponent of the polynomial tied
to column stream s, with (t, s) the time unit and stream of column c.  Each
tuple is (row, first column, cells); unlisted cells are not asserted.
"""

import numpy as np
import pytest

from scldpc import (
    BandMatrix,
    StructuralError,
    build_band,
    build_nonsystematic_H,
    build_systematic_H,
    column_templates,
    read_alist,
    read_coord_csv,
    terminate,
    termination_rate,
    write_alist,
    write_coord_csv,
)
from scldpc.lifting import classical_edge_spread

# systematic band, 5 time units of 3 columns (2 info + 1 parity): 18 x 15
SYS_CELLS = [
    (0, 0, "111"),
    (1, 0, "000111"),
    (2, 0, "000000111"),
    (3, 0, "000000000111"),
    (4, 0, "000000000000111"),
    (5, 0, "000000000000000"),
    (6, 0, "010000000000000"),
    (7, 0, "000010000000000"),
    (8, 0, "100000010000000"),
    (9, 0, "100100000010000"),
    (10, 0, "000100100000010"),
    (11, 0, "010000100100000"),
    (12, 0, "100010000100100"),
    (13, 0, "010100010000100"),
    (14, 3, "010100010000"),
    (15, 6, "010100010"),
    (16, 9, "010100"),
    (17, 12, "010"),
]

# two-stream band after dropping the degree-1 parity columns, 7 time units
# of 2 columns (even stream g1, odd stream g2): 20 x 14
NS_CELLS = [
    (0, 0, "11"),
    (1, 0, "0011"),
    (2, 0, "000011"),
    (3, 0, "00000011"),
    (4, 0, "0000000011"),
    (5, 0, "000000000011"),
    (6, 0, "01000000000011"),
    (7, 0, "00010000000000"),
    (8, 0, "10000100000000"),
    (9, 0, "10100001000000"),
    (10, 0, "00101000010000"),
    (11, 0, "01001010000100"),
    (12, 0, "10010010100001"),
    (13, 0, "01100100101000"),
    (14, 2, "011001001010"),
    (15, 4, "0110010010"),
    (16, 6, "01100100"),
    (17, 8, "011001"),
    (18, 10, "0110"),
    (19, 12, "01"),
]


def assert_cells(dense, cells):
    for row, col0, bits in cells:
        for i, ch in enumerate(bits):
            assert dense[row, col0 + i] == int(ch), (row, col0 + i)


class TestReferenceGrids:
    def test_systematic_band_matches_hand_derivation(self, massey):
        h = build_systematic_H(massey, time_units=5)
        assert (h.rows, h.cols) == (18, 15)
        assert_cells(h.to_dense(), SYS_CELLS)

    def test_nonsystematic_band_matches_hand_derivation(self, massey):
        h = build_nonsystematic_H(massey, time_units=7)
        assert (h.rows, h.cols) == (20, 14)
        assert_cells(h.to_dense(), NS_CELLS)


class TestBandAccounting:
    def test_systematic_shape_and_weights(self, massey):
        h = build_systematic_H(massey, time_units=5)
        assert h.cols_per_time == 3
        assert h.rows_per_time == 1
        assert h.memory == 13
        assert h.band_width == 14
        assert h.num_ones == 5 * (4 + 4 + 1)
        w = h.col_weights()
        assert list(w[:3]) == [4, 4, 1]
        assert len(h.info_cols()) == 10
        assert len(h.parity_cols()) == 5

    def test_nonsystematic_is_regular(self, massey, robinson):
        h = build_nonsystematic_H(massey, time_units=7)
        assert h.cols_per_time == 2
        assert np.all(h.col_weights() == 4)
        h3 = build_nonsystematic_H(robinson, time_units=7)
        assert h3.cols_per_time == 3
        assert np.all(h3.col_weights() == 4)

    def test_nonsystematic_needs_three_streams(self):
        from scldpc import CsocSpec

        tiny = CsocSpec.from_exponents([(0, 1, 3)])
        with pytest.raises(StructuralError):
            build_nonsystematic_H(tiny, time_units=4)

    def test_terminate_requires_room_for_checks(self, massey):
        with pytest.raises(ValueError):
            terminate(massey, L=6, form="nonsystematic")

    def test_build_band_tiles_roles(self):
        # roles are given per column block and must be repeated per time unit
        h = build_band([(0, 1), (0, 2)], [0, 1], time_units=3)
        assert h.col_roles.shape == (6,)
        assert list(h.col_roles) == [0, 1, 0, 1, 0, 1]

    def test_row_and_col_blocks(self, massey):
        h = build_systematic_H(massey, time_units=5)
        assert h.col_block(1) == slice(3, 6)
        assert h.row_block(2) == slice(2, 3)

    def test_restrict_rows(self, massey):
        h = build_systematic_H(massey, time_units=5)
        sub = h.restrict_rows(5)
        assert sub.rows == 5
        assert sub.cols == h.cols
        dense = sub.to_dense()
        assert np.array_equal(dense, h.to_dense()[:5])
        assert np.array_equal(sub.col_roles, h.col_roles)

    def test_dense_and_csr_agree(self, robinson):
        h = build_nonsystematic_H(robinson, time_units=6)
        assert np.array_equal(h.to_csr().toarray(), h.to_dense())


class TestColumnTemplates:
    def test_systematic_adds_degree_one_parity(self, massey):
        exps, roles = column_templates(massey, "systematic")
        assert exps == [(0, 8, 9, 12), (0, 6, 11, 13), (0,)]
        assert list(roles) == [0, 0, 1]

    def test_nonsystematic_drops_parity(self, robinson):
        exps, roles = column_templates(robinson, "nonsystematic")
        assert exps == [(0, 6, 11, 13), (0, 8, 17, 18), (0, 3, 15, 19)]
        assert list(roles) == [0, 0, 1]

    def test_protograph_templates(self):
        exps, roles = column_templates(classical_edge_spread(3, 3), "nonsystematic")
        assert exps == [(0, 1, 2)] * 3


class TestTermination:
    def test_rate_formula_reference_points(self):
        # (columns per time unit, memory, L) -> terminated rate
        assert termination_rate(14, 94, 500) == pytest.approx(6406 / 7000)
        assert termination_rate(11, 324, 1000) == pytest.approx(9676 / 11000)
        assert termination_rate(3, 19, 200) == pytest.approx(0.635)
        assert termination_rate(3, 10, 200) == pytest.approx(0.650)

    def test_rounded_to_three_decimals(self):
        assert round(termination_rate(14, 94, 500), 3) == 0.915
        assert round(termination_rate(11, 324, 1000), 3) == 0.880
        assert round(termination_rate(3, 19, 200), 3) == 0.635
        assert round(termination_rate(3, 10, 200), 3) == 0.650

    def test_terminate_returns_band_and_info(self, massey):
        h, info = terminate(massey, L=200, form="nonsystematic")
        assert h.time_units == 200
        assert h.rows == 213  # L + m check rows
        assert h.cols == 400
        assert info.L == 200
        assert info.memory == 13
        assert info.cols_per_time == 2
        assert info.total_checks == 213
        assert info.transmitted_bits == 400
        assert info.info_bits == 200 - 13
        assert info.rate == pytest.approx(187 / 400)
        assert info.unterminated_rate == pytest.approx(0.5)

    def test_terminated_rate_approaches_design_rate(self, robinson):
        _, small = terminate(robinson, L=100, form="systematic")
        _, large = terminate(robinson, L=10_000, form="systematic")
        assert small.rate < large.rate < robinson.rate


class TestFileFormats:
    def test_alist_round_trip(self, massey, tmp_path):
        h = build_systematic_H(massey, time_units=5)
        path = tmp_path / "sys.alist"
        write_alist(h, path)
        back = read_alist(
            str(path),
            cols_per_time=h.cols_per_time,
            time_units=h.time_units,
            memory=h.memory,
            col_roles=h.col_roles,
        )
        assert (back.rows, back.cols) == (h.rows, h.cols)
        assert np.array_equal(back.ones, h.ones)
        assert np.array_equal(back.col_roles, h.col_roles)

    def test_alist_header_counts(self, massey):
        h = build_nonsystematic_H(massey, time_units=7)
        lines = write_alist(h).splitlines()
        rows, cols = map(int, lines[0].split())
        assert (rows, cols) == (h.rows, h.cols)
        max_row_w, max_col_w = map(int, lines[1].split())
        assert max_col_w == 4
        assert max_row_w == max(h.row_weights())

    def test_coord_csv_round_trip(self, robinson):
        h = build_nonsystematic_H(robinson, time_units=6)
        text = write_coord_csv(h)
        back = read_coord_csv(
            text,
            rows=h.rows,
            cols=h.cols,
            cols_per_time=h.cols_per_time,
            time_units=h.time_units,
            memory=h.memory,
            col_roles=h.col_roles,
            rows_per_time=h.rows_per_time,
        )
        assert np.array_equal(back.ones, h.ones)
        assert (back.rows, back.cols) == (h.rows, h.cols)

    def test_coord_csv_bad_header(self):
        with pytest.raises(ValueError):
            read_coord_csv("r,c\n0,0\n")


class TestBandMatrixValidation:
    def test_rejects_out_of_range_ones(self):
        with pytest.raises((StructuralError, ValueError)):
            BandMatrix(
                rows=2,
                cols=2,
                ones=np.array([[0, 5]], dtype=np.int64),
                cols_per_time=2,
                time_units=1,
                memory=0,
                col_roles=np.zeros(2, dtype=np.uint8),
            )
