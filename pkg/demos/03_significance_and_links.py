"""Which predictors move demand, and the simple supply-to-demand link.

Significance of a predictor is the average absolute partial derivative of
the trained demand model with respect to that input, taken over the data;
the signed mean gives the direction of the average effect. The second half
fits plain lines from revenue hours/miles to passenger trips for quick
what-if arithmetic.
"""

from _common import demo_config

from transitgap.analysis import fit_linear_link, predict_trips, significance
from transitgap.ingest import build_design_matrix, load_calendar, load_monthly
from transitgap.models import fit_neural_net

config = demo_config()
records = load_monthly(config.monthly_csv, calendar=load_calendar(config.calendar_csv))
ds = build_design_matrix(records, config.temporal_demand_features, "passenger_trips")

model = fit_neural_net(ds, seed=config.seed, **config.hyperparams("neural_net"))
report = significance(model, ds)

print("significance of demand predictors (standardized space):")
for name in report.ranking():
    i = report.feature_names.index(name)
    direction = "+" if report.mean_signed_gradient[i] >= 0 else "-"
    print(f"  {name:<18} {report.mean_abs_gradient[i]:>10.1f}   direction {direction}")

print("\nlinear supply-to-demand links:")
for predictor in ("revenue_hours", "revenue_miles"):
    link = fit_linear_link(records, predictor)
    print(f"  trips = {link.intercept:,.2f} + {link.slope:.2f} * {predictor}"
          f"   (r^2 = {link.r_squared:.3f})")
    sample = records[-1]
    value = getattr(sample, predictor)
    print(f"    at {sample.row_id}'s {predictor} = {value:,.1f}: "
          f"predicted trips = {predict_trips(link, value):,.0f} "
          f"(actual {sample.passenger_trips:,.0f})")
