"""Record loading, adjusted population, design matrices, and splits."""

import math

import numpy as np
import pytest

from transitgap.census import TVV_NAMES
from transitgap.errors import (
    ConstantFeature,
    DuplicateMonth,
    EmptyStopListWarning,
    InconsistentEnrollment,
    NegativeCount,
    SchemaError,
    TooFewRows,
    UnknownFeature,
)
from transitgap.ingest import (
    Dataset,
    FeatureSpec,
    MonthlyRecord,
    adjusted_population,
    build_design_matrix,
    encode_month,
    load_calendar,
    load_monthly,
    load_stops,
    train_test_split,
)


class TestAdjustedPopulation:
    def test_in_session_passthrough(self):
        assert adjusted_population(53000, 20000, 2000, in_session=True) == 53000

    def test_off_session_applies_factor(self):
        # 53000 - 0.9 * (20000 - 2000) = 36800
        assert adjusted_population(53000, 20000, 2000, in_session=False) == 36800.0

    def test_everyone_enrolled_in_summer(self):
        assert adjusted_population(53000, 20000, 20000, in_session=False) == 53000

    def test_summer_exceeding_enrollment_rejected(self):
        with pytest.raises(InconsistentEnrollment):
            adjusted_population(53000, 2000, 3000, in_session=False)

    def test_monotone_in_departing_students(self):
        previous = math.inf
        for departing in (0, 5000, 10000, 18000):
            value = adjusted_population(53000, 20000, 20000 - departing, in_session=False)
            assert value <= previous
            previous = value

    def test_never_negative(self):
        assert adjusted_population(1000, 1000, 0, in_session=False, off_session_factor=1.0) >= 0


def monthly_csv_rows(n_months, start_year=2017, start_month=7, shuffle_seed=None):
    """Synthetic monthly rows; returns (header, list of row strings)."""
    tvv_header = ",".join(TVV_NAMES)
    header = (
        "year,month,passenger_trips,revenue_miles,revenue_hours,jmu_enrollment,"
        "jmu_routes_ran,city_routes_ran,base_population,in_session,"
        f"summer_enrollment,{tvv_header}"
    )
    rows = []
    year, month = start_year, start_month
    rng = np.random.default_rng(0)
    for i in range(n_months):
        in_session = month not in (5, 6, 7, 8)
        tvv = ",".join(f"{rng.uniform(100, 5000):.1f}" for _ in TVV_NAMES[:-1])
        rows.append(
            f"{year},{month},{40000 + 100 * i},{45000 + 10 * i},{3300 + i},"
            f"20000,{10 if in_session else 2},12,52500,{str(in_session).lower()},"
            f"2000,{tvv},52000"
        )
        month += 1
        if month > 12:
            month = 1
            year += 1
    if shuffle_seed is not None:
        rows = [rows[i] for i in np.random.default_rng(shuffle_seed).permutation(len(rows))]
    return header, rows


def write_monthly(tmp_path, n_months=60, name="monthly.csv", shuffle_seed=None):
    header, rows = monthly_csv_rows(n_months, shuffle_seed=shuffle_seed)
    path = tmp_path / name
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return path


class TestLoadMonthly:
    def test_sixty_row_file(self, tmp_path):
        records = load_monthly(write_monthly(tmp_path))
        assert len(records) == 60
        assert records[0].row_id == "2017-07"
        assert records[-1].row_id == "2022-06"

    def test_duplicate_month_rejected(self, tmp_path):
        header, rows = monthly_csv_rows(5)
        rows.append(rows[2])
        path = tmp_path / "monthly.csv"
        path.write_text(header + "\n" + "\n".join(rows) + "\n")
        with pytest.raises(DuplicateMonth):
            load_monthly(path)

    def test_month_thirteen_rejected(self, tmp_path):
        header, rows = monthly_csv_rows(2)
        rows[0] = rows[0].replace("2017,7", "2017,13", 1)
        path = tmp_path / "monthly.csv"
        path.write_text(header + "\n" + "\n".join(rows) + "\n")
        with pytest.raises(SchemaError):
            load_monthly(path)

    def test_negative_count_rejected(self, tmp_path):
        header, rows = monthly_csv_rows(2)
        rows[0] = rows[0].replace("40000", "-1", 1)
        path = tmp_path / "monthly.csv"
        path.write_text(header + "\n" + "\n".join(rows) + "\n")
        with pytest.raises(NegativeCount):
            load_monthly(path)

    def test_row_order_invariance(self, tmp_path):
        ordered = load_monthly(write_monthly(tmp_path, name="a.csv"))
        shuffled = load_monthly(write_monthly(tmp_path, name="b.csv", shuffle_seed=42))
        assert ordered == shuffled

    def test_adjusted_population_derived(self, tmp_path):
        records = load_monthly(write_monthly(tmp_path, n_months=12))
        by_id = {r.row_id: r for r in records}
        assert by_id["2017-09"].adj_pop == 52500  # in session
        assert by_id["2017-07"].adj_pop == 52500 - 0.9 * (20000 - 2000)

    def test_calendar_is_authoritative_and_must_agree(self, tmp_path):
        path = write_monthly(tmp_path, n_months=3)
        calendar_path = tmp_path / "calendar.csv"
        calendar_path.write_text(
            "year,month,in_session\n2017,7,false\n2017,8,false\n2017,9,true\n"
        )
        calendar = load_calendar(calendar_path)
        records = load_monthly(path, calendar=calendar)
        assert [r.in_session for r in records] == [False, False, True]

        bad = tmp_path / "bad_calendar.csv"
        bad.write_text("year,month,in_session\n2017,7,true\n2017,8,false\n2017,9,true\n")
        with pytest.raises(SchemaError):
            load_monthly(path, calendar=load_calendar(bad))


def write_stops(tmp_path, rows):
    path = tmp_path / "stops.csv"
    path.write_text(
        "stop_id,name,lat,lon,total_riders,city_routes_ran,is_transfer_hub,on_jmu_route\n"
        + "\n".join(rows)
        + "\n"
    )
    return path


class TestLoadStops:
    ROWS = [
        "S1,Main,38.45,-78.87,1200,10,false,false",
        "S2,Court Square,38.449,-78.868,9000,40,true,false",
        "S3,Campus,38.44,-78.86,5000,20,false,true",
        "S4,EastSide,38.46,-78.85,300,4,false,false",
    ]

    def test_exclusions_applied(self, tmp_path):
        path = write_stops(tmp_path, self.ROWS)
        stops = load_stops(path, exclude_transfer_hubs=True, exclude_jmu_routes=True)
        assert [s.stop_id for s in stops] == ["S1", "S4"]

    def test_no_exclusions_keeps_all(self, tmp_path):
        path = write_stops(tmp_path, self.ROWS)
        assert len(load_stops(path)) == 4

    def test_all_hubs_excluded_warns(self, tmp_path):
        rows = [r.replace("false,false", "true,false") for r in self.ROWS]
        rows = [r.replace("true,true", "true,false") for r in rows]
        path = write_stops(tmp_path, [r.split(",false,")[0] + ",true,false" for r in self.ROWS])
        with pytest.warns(EmptyStopListWarning):
            stops = load_stops(path, exclude_transfer_hubs=True)
        assert stops == []

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "stops.csv"
        path.write_text("stop_id,name,lat,lon\nS1,Main,38.45,-78.87\n")
        with pytest.raises(SchemaError):
            load_stops(path)


class FakeRow:
    def __init__(self, **kwargs):
        self.tvv = kwargs.pop("tvv", {})
        for key, value in kwargs.items():
            setattr(self, key, value)


def linear_rows(n, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        x1 = float(rng.normal())
        x2 = float(rng.normal())
        rows.append(FakeRow(row_id=f"r{i}", x1=x1, x2=x2, y=2 * x1 - x2 + 1))
    return rows


class TestBuildDesignMatrix:
    def test_standardized_columns_zero_mean_unit_variance(self):
        ds = build_design_matrix(linear_rows(40), features=["x1", "x2"], target="y")
        assert np.all(np.abs(ds.features.mean(axis=0)) < 1e-12)
        assert np.allclose(ds.features.std(axis=0), 1.0)

    def test_targets_stay_raw(self):
        rows = linear_rows(10)
        ds = build_design_matrix(rows, features=["x1"], target="y")
        assert np.allclose(ds.targets, [r.y for r in rows])

    def test_cyclic_month_encoding(self):
        assert encode_month(3) == pytest.approx((1.0, 0.0), abs=1e-12)

    def test_constant_year_rejected(self):
        rows = [
            FakeRow(row_id=f"m{m}", t_month=m, t_year=2019, y=float(m)) for m in range(1, 13)
        ]
        with pytest.raises(ConstantFeature):
            build_design_matrix(rows, features=["t_month", "t_year"], target="y")

    def test_constant_feature_rejected(self):
        rows = [FakeRow(row_id=f"r{i}", x1=1.0, y=float(i)) for i in range(6)]
        with pytest.raises(ConstantFeature):
            build_design_matrix(rows, features=["x1"], target="y")

    def test_month_expands_to_two_columns(self):
        rows = [
            FakeRow(row_id=f"m{m}", t_month=m, y=float(m)) for m in range(1, 13)
        ]
        ds = build_design_matrix(rows, features=["t_month"], target="y")
        assert ds.spec.feature_names == ("t_month_sin", "t_month_cos")
        raw = ds.spec.destandardize(ds.features)
        march = list(ds.row_ids).index("m3")
        assert raw[march] == pytest.approx(encode_month(3), abs=1e-12)

    def test_unknown_feature_rejected(self):
        with pytest.raises(UnknownFeature):
            build_design_matrix(linear_rows(5), features=["nope"], target="y")

    def test_tvv_fields_resolved(self):
        rows = [
            FakeRow(row_id=f"r{i}", x1=float(i), y=float(i), tvv={"renters": float(10 + i)})
            for i in range(6)
        ]
        ds = build_design_matrix(rows, features=["x1", "renters"], target="y")
        assert "renters" in ds.spec.feature_names

    def test_standardization_round_trip(self):
        rows = linear_rows(30, seed=5)
        ds = build_design_matrix(rows, features=["x1", "x2"], target="y")
        raw = np.array([[r.x1, r.x2] for r in rows])
        recovered = ds.spec.destandardize(ds.features)
        assert np.allclose(recovered, raw, rtol=1e-10, atol=1e-12)

    def test_row_from_values_matches_matrix_row(self):
        rows = [
            FakeRow(row_id=f"m{m}", t_month=m, x1=float(m) ** 1.5, y=float(m))
            for m in range(1, 13)
        ]
        ds = build_design_matrix(rows, features=["x1", "t_month"], target="y")
        row = ds.spec.row_from_values({"x1": 5**1.5, "t_month": 5})
        position = list(ds.row_ids).index("m5")
        assert np.allclose(row, ds.features[position], atol=1e-12)


class TestTrainTestSplit:
    def dataset(self, n, seed=0):
        rows = linear_rows(n, seed=seed)
        return build_design_matrix(rows, features=["x1", "x2"], target="y")

    def test_sizes_floor_arithmetic(self):
        train, test = train_test_split(self.dataset(60), seed=7)
        assert train.n_rows == 48
        assert test.n_rows == 12

    def test_deterministic_under_seed(self):
        ds = self.dataset(40)
        first = train_test_split(ds, seed=7)
        second = train_test_split(ds, seed=7)
        assert first[0].row_ids == second[0].row_ids
        assert np.array_equal(first[1].features, second[1].features)

    def test_partition_disjoint_and_covering(self):
        ds = self.dataset(37)
        train, test = train_test_split(ds, seed=3)
        train_ids, test_ids = set(train.row_ids), set(test.row_ids)
        assert train_ids | test_ids == set(ds.row_ids)
        assert train_ids & test_ids == set()

    def test_too_few_rows(self):
        with pytest.raises(TooFewRows):
            train_test_split(self._tiny(), seed=1)

    def _tiny(self):
        rows = linear_rows(3)
        features = np.array([[r.x1] for r in rows])
        std = features.std(axis=0)
        spec = FeatureSpec(
            feature_names=("x1",),
            encodings=("numeric",),
            means=tuple(features.mean(axis=0)),
            stds=tuple(std),
            target="y",
        )
        return Dataset(
            features=(features - features.mean(axis=0)) / std,
            targets=np.array([r.y for r in rows]),
            spec=spec,
            row_ids=tuple(r.row_id for r in rows),
        )

    def test_different_seeds_differ(self):
        ds = self.dataset(60)
        a, _ = train_test_split(ds, seed=1)
        b, _ = train_test_split(ds, seed=2)
        assert a.row_ids != b.row_ids


class TestDataset:
    def test_rejects_nan(self):
        spec = FeatureSpec(("x",), ("numeric",), (0.0,), (1.0,), "y")
        with pytest.raises(SchemaError):
            Dataset(
                features=np.array([[np.nan]]),
                targets=np.array([1.0]),
                spec=spec,
                row_ids=("r0",),
            )

    def test_immutable_after_construction(self):
        spec = FeatureSpec(("x",), ("numeric",), (0.0,), (1.0,), "y")
        ds = Dataset(
            features=np.array([[1.0], [2.0]]),
            targets=np.array([1.0, 2.0]),
            spec=spec,
            row_ids=("a", "b"),
        )
        with pytest.raises(ValueError):
            ds.features[0, 0] = 5.0

    def test_round_trip_dict(self):
        rows = linear_rows(8)
        ds = build_design_matrix(rows, features=["x1", "x2"], target="y")
        clone = Dataset.from_dict(ds.to_dict())
        assert np.array_equal(clone.features, ds.features)
        assert clone.spec == ds.spec
