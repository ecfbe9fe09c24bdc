"""Train all four regressor families on the monthly series and compare errors.

Reproduces the model-comparison table shape: RMSE and relative RMSE per
model kind for the supply targets (revenue miles / hours) and the demand
target (passenger trips). The neural net wins where the relationship is
genuinely nonlinear; the polynomial is skipped when its expansion would
outnumber the rows.
"""

from _common import demo_config

from transitgap.errors import ExpansionTooLarge
from transitgap.ingest import build_design_matrix, load_calendar, load_monthly, train_test_split
from transitgap.models import fit, metrics, predict

config = demo_config()
records = load_monthly(config.monthly_csv, calendar=load_calendar(config.calendar_csv))
print(f"{len(records)} monthly records "
      f"({records[0].row_id} .. {records[-1].row_id})")

datasets = {
    "revenue_miles": build_design_matrix(records, config.temporal_supply_features, "revenue_miles"),
    "revenue_hours": build_design_matrix(records, config.temporal_supply_features, "revenue_hours"),
    "passenger_trips": build_design_matrix(records, config.temporal_demand_features, "passenger_trips"),
}

for target, ds in datasets.items():
    train, test = train_test_split(ds, config.train_fraction, config.seed)
    print(f"\n{target}  (train {train.n_rows} / test {test.n_rows})")
    print(f"  {'model':<14} {'rmse':>12} {'relative rmse':>14}")
    for kind in ("linear", "polynomial", "random_forest", "neural_net"):
        try:
            model = fit(train, kind, seed=config.seed, **config.hyperparams(kind))
        except ExpansionTooLarge as exc:
            print(f"  {kind:<14} {'skipped':>12}   ({exc})")
            continue
        report = metrics(predict(model, test.features), test.targets)
        print(f"  {kind:<14} {report.rmse:>12.2f} {report.relative_rmse:>14.4f}")
