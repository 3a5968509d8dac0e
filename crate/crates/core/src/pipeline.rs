//! Forecasting on sliding-window signature features.
//!
//! The regression target is the delayed increment `Δ_D Y_t = Y_t - Y_{t-D}`,
//! regressed on the signature features of the window ending at `t`. The
//! forecast adds the predicted increment back onto the observed `Y_{t-D}`.
//! The regularization strength is chosen on a validation split, then the
//! model is refit on train and validation together and scored on the test
//! split. Linear-regression baselines on hand-made temperature features are
//! evaluated on the same test rows.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;

use crate::data::SeriesFrame;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::ridge::{default_lambda_grid, fit_ridge, select_lambda, RidgeModel};
use crate::signature::{feature_indices, MultiIndex};
use crate::sliding::{SlidingParams, SlidingSignatureState};

/// Exponential smoothing `T̄_1 = T_1`, `T̄_t = (1 - α) T̄_{t-1} + α T_t`.
pub fn exp_smooth(series: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing parameter must lie in (0, 1], got {alpha}"
        )));
    }
    let Some(&first) = series.first() else {
        return Err(Error::InvalidArgument(
            "cannot smooth an empty series".into(),
        ));
    };
    let mut out = Vec::with_capacity(series.len());
    let mut acc = first;
    out.push(acc);
    for &x in &series[1..] {
        acc = (1.0 - alpha) * acc + alpha * x;
        out.push(acc);
    }
    Ok(out)
}

/// `y_t - y_{t-D}` for `t >= D`; entry `i` corresponds to `t = i + D`.
pub fn delta_target(y: &[f64], delay: usize) -> Result<Vec<f64>> {
    if delay == 0 {
        return Err(Error::InvalidArgument(
            "delay must be at least 1 step".into(),
        ));
    }
    if delay >= y.len() {
        return Err(Error::InvalidArgument(format!(
            "delay {delay} is not shorter than the series ({})",
            y.len()
        )));
    }
    Ok(y[delay..].iter().zip(y).map(|(a, b)| a - b).collect())
}

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} actual values vs {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::InvalidArgument(
            "metrics need at least one value".into(),
        ));
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let sse: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (p - a) * (p - a))
        .sum();
    Ok((sse / actual.len() as f64).sqrt())
}

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    if let Some(i) = actual.iter().position(|a| *a == 0.0) {
        return Err(Error::InvalidArgument(format!(
            "MAPE undefined: actual value {i} is zero"
        )));
    }
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| ((p - a) / a).abs())
        .sum();
    Ok(100.0 * sum / actual.len() as f64)
}

/// Hyperparameters of a forecasting run.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastConfig {
    pub window_days: usize,
    /// Samples per day after any subsampling.
    pub steps_per_day: usize,
    pub order: usize,
    pub delay_days: usize,
    pub lambda_grid: Vec<f64>,
    /// Smoothing parameter for the `T̄` baseline features.
    pub alpha: f64,
    /// Keep every `stride`-th sample of the input (1 = full resolution).
    pub stride: usize,
    /// Last calendar year of the training split.
    pub train_end_year: i32,
    /// Last calendar year of the validation split; later rows are test.
    pub valid_end_year: i32,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            window_days: 9,
            steps_per_day: 48,
            order: 4,
            delay_days: 2,
            lambda_grid: default_lambda_grid(),
            alpha: 0.005,
            stride: 1,
            train_end_year: 2013,
            valid_end_year: 2014,
        }
    }
}

impl ForecastConfig {
    /// Window length `w` in steps.
    pub fn window_steps(&self) -> usize {
        self.window_days * self.steps_per_day
    }

    /// Delay `D` in steps.
    pub fn delay_steps(&self) -> usize {
        self.delay_days * self.steps_per_day
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_day == 0 {
            return Err(Error::Config("steps per day must be positive".into()));
        }
        if self.order == 0 {
            return Err(Error::Config("truncation order must be at least 1".into()));
        }
        if self.delay_days == 0 {
            return Err(Error::Config("delay must be at least one day".into()));
        }
        if self.window_days < self.delay_days {
            return Err(Error::Config(format!(
                "window ({} days) must be at least the delay ({} days)",
                self.window_days, self.delay_days
            )));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::Config("lambda grid is empty".into()));
        }
        if self.lambda_grid.iter().any(|l| *l < 0.0 || !l.is_finite()) {
            return Err(Error::Config(
                "lambda grid values must be finite and >= 0".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be positive".into()));
        }
        if self.train_end_year >= self.valid_end_year {
            return Err(Error::Config(
                "training years must precede validation years".into(),
            ));
        }
        Ok(())
    }
}

/// Split horizons as inclusive row indices: training rows end at
/// `train_end`, validation rows at `valid_end`, and the rest is test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Splits {
    pub train_end: usize,
    pub valid_end: usize,
    pub len: usize,
}

impl Splits {
    pub fn new(train_end: usize, valid_end: usize, len: usize) -> Result<Self> {
        if !(train_end < valid_end && valid_end < len) {
            return Err(Error::Config(format!(
                "need train_end < valid_end < length, got {train_end}, {valid_end}, {len}"
            )));
        }
        Ok(Self {
            train_end,
            valid_end,
            len,
        })
    }

    /// Splits at calendar-year boundaries.
    pub fn by_year(frame: &SeriesFrame, train_end_year: i32, valid_end_year: i32) -> Result<Self> {
        let train_end = frame
            .last_index_of_year(train_end_year)
            .ok_or_else(|| Error::Config(format!("no data in or before {train_end_year}")))?;
        let valid_end = frame
            .last_index_of_year(valid_end_year)
            .ok_or_else(|| Error::Config(format!("no data in or before {valid_end_year}")))?;
        Self::new(train_end, valid_end, frame.len())
    }

    pub fn validation(&self) -> RangeInclusive<usize> {
        self.train_end + 1..=self.valid_end
    }

    pub fn test(&self) -> RangeInclusive<usize> {
        self.valid_end + 1..=self.len - 1
    }
}

/// Feature rows of the sliding engine; row `i` belongs to the window whose
/// right edge is sample `first_t + i`.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub first_t: usize,
    pub features: Matrix,
    pub indices: Vec<MultiIndex>,
}

impl FeatureTable {
    pub fn last_t(&self) -> usize {
        self.first_t + self.features.rows() - 1
    }

    pub fn row_at(&self, t: usize) -> &[f64] {
        self.features.row(t - self.first_t)
    }

    /// Rows for right edges `range`.
    pub fn rows(&self, range: RangeInclusive<usize>) -> Result<Matrix> {
        if *range.start() < self.first_t || *range.end() > self.last_t() {
            return Err(Error::InvalidArgument(format!(
                "rows {}..={} outside feature table {}..={}",
                range.start(),
                range.end(),
                self.first_t,
                self.last_t()
            )));
        }
        Ok(self
            .features
            .slice_rows(range.start() - self.first_t..range.end() + 1 - self.first_t))
    }
}

/// Signature features of every window of `window` steps over the covariate
/// rows, produced by one sequential pass of the sliding engine.
pub fn build_feature_table(
    covariates: &Matrix,
    order: usize,
    window: usize,
) -> Result<FeatureTable> {
    let n = covariates.rows();
    if n < window + 1 {
        return Err(Error::WindowLength {
            expected: window + 1,
            got: n,
        });
    }
    let dim = covariates.cols() + 1;
    let mut engine = SlidingSignatureState::new(SlidingParams::new(dim, order, window))?;
    let p = engine.feature_len();
    let mut data = Vec::with_capacity((n - window) * p);
    for row in covariates.iter_rows() {
        if engine.push(row)? {
            let sig = engine.signature().expect("engine reported a signature");
            crate::signature::flatten_features_into(sig, &mut data);
        }
    }
    Ok(FeatureTable {
        first_t: window,
        features: Matrix::from_vec(n - window, p, data)?,
        indices: feature_indices(dim, order)?,
    })
}

/// `Ŷ_t = y_{t-D} + predict(features_t)` for each right edge in `range`.
pub fn forecast(
    model: &RidgeModel,
    demand: &[f64],
    table: &FeatureTable,
    delay: usize,
    range: RangeInclusive<usize>,
) -> Result<Vec<f64>> {
    if *range.start() < table.first_t || *range.start() < delay {
        return Err(Error::InvalidArgument(format!(
            "forecast range starts at {} before the first full window ({}) or delay ({delay})",
            range.start(),
            table.first_t
        )));
    }
    if *range.end() >= demand.len() || *range.end() > table.last_t() {
        return Err(Error::InvalidArgument(format!(
            "forecast range ends at {} beyond the data",
            range.end()
        )));
    }
    range
        .map(|t| {
            let row = table.row_at(t);
            if row.len() != model.num_features() {
                return Err(Error::Shape(format!(
                    "model has {} features, table has {}",
                    model.num_features(),
                    row.len()
                )));
            }
            Ok(demand[t - delay] + model.predict_row(row))
        })
        .collect()
}

/// Result of fitting the signature model.
#[derive(Debug, Clone)]
pub struct RidgeSigFit {
    /// Model refit on train and validation rows with the selected `λ`.
    pub model: RidgeModel,
    pub lambda: f64,
    /// Validation RMSE per grid entry.
    pub validation_scores: Vec<(f64, f64)>,
    /// Validation RMSE of the selected `λ` (fit on training rows only).
    pub validation_rmse: f64,
    /// Right edges used for the selection fit and the refit.
    pub train_rows: RangeInclusive<usize>,
    pub refit_rows: RangeInclusive<usize>,
}

/// Selects `λ` on the validation split and refits on train + validation.
///
/// Validation scores are RMSEs of the increment predictions, which equal the
/// RMSEs of the corresponding forecasts `y_{t-D} + Δ̂`.
pub fn train_on_features(
    table: &FeatureTable,
    demand: &[f64],
    delay: usize,
    splits: &Splits,
    grid: &[f64],
) -> Result<RidgeSigFit> {
    let start = table.first_t.max(delay);
    if splits.train_end < start {
        return Err(Error::Config(format!(
            "training split ends at {} before the first usable window {start}",
            splits.train_end
        )));
    }
    let target = |range: RangeInclusive<usize>| -> Vec<f64> {
        range.map(|t| demand[t] - demand[t - delay]).collect()
    };
    let train_rows = start..=splits.train_end;
    let refit_rows = start..=splits.valid_end;

    let x_train = table.rows(train_rows.clone())?;
    let y_train = target(train_rows.clone());
    let x_valid = table.rows(splits.validation())?;
    let y_valid = target(splits.validation());

    let selection = select_lambda(&x_train, &y_train, &x_valid, &y_valid, grid, rmse)?;
    let validation_rmse = selection
        .scores
        .iter()
        .find(|(l, _)| *l == selection.lambda)
        .map(|(_, s)| *s)
        .expect("selected lambda is in the grid");

    let model = fit_ridge(
        &table.rows(refit_rows.clone())?,
        &target(refit_rows.clone()),
        selection.lambda,
    )?;
    Ok(RidgeSigFit {
        model,
        lambda: selection.lambda,
        validation_scores: selection.scores,
        validation_rmse,
        train_rows,
        refit_rows,
    })
}

/// Builds temperature signature features and trains on them.
pub fn train_ridgesig(
    frame: &SeriesFrame,
    config: &ForecastConfig,
    splits: &Splits,
) -> Result<(RidgeSigFit, FeatureTable)> {
    config.validate()?;
    let table = build_feature_table(
        &Matrix::column(frame.temperature()),
        config.order,
        config.window_steps(),
    )?;
    let fit = train_on_features(
        &table,
        frame.demand(),
        config.delay_steps(),
        splits,
        &config.lambda_grid,
    )?;
    Ok((fit, table))
}

/// Hand-made covariates for the linear-regression baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineFeature {
    Temperature,
    TemperatureSq,
    Smoothed,
    SmoothedSq,
    /// Demand lagged by this many days.
    LaggedDemand(usize),
}

impl fmt::Display for BaselineFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineFeature::Temperature => f.write_str("T"),
            BaselineFeature::TemperatureSq => f.write_str("T2"),
            BaselineFeature::Smoothed => f.write_str("Tbar"),
            BaselineFeature::SmoothedSq => f.write_str("Tbar2"),
            BaselineFeature::LaggedDemand(days) => write!(f, "Ylag{days}d"),
        }
    }
}

impl FromStr for BaselineFeature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" => Ok(Self::Temperature),
            "T2" => Ok(Self::TemperatureSq),
            "Tbar" => Ok(Self::Smoothed),
            "Tbar2" => Ok(Self::SmoothedSq),
            _ => s
                .strip_prefix("Ylag")
                .and_then(|r| r.strip_suffix('d'))
                .and_then(|d| d.parse().ok())
                .filter(|d| *d > 0)
                .map(Self::LaggedDemand)
                .ok_or_else(|| Error::Config(format!("unknown baseline feature `{s}`"))),
        }
    }
}

/// A model to evaluate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ModelSpec {
    RidgeSig,
    Linear(Vec<BaselineFeature>),
}

impl ModelSpec {
    /// Models compared on synthetic data, weakest baseline first.
    pub fn synthetic_suite() -> Vec<ModelSpec> {
        use BaselineFeature::*;
        vec![
            ModelSpec::Linear(vec![Temperature]),
            ModelSpec::Linear(vec![Temperature, TemperatureSq]),
            ModelSpec::Linear(vec![Smoothed]),
            ModelSpec::RidgeSig,
            ModelSpec::Linear(vec![Smoothed, SmoothedSq]),
        ]
    }

    /// Models compared on observed demand.
    pub fn real_suite() -> Vec<ModelSpec> {
        use BaselineFeature::*;
        vec![
            ModelSpec::Linear(vec![Smoothed, SmoothedSq]),
            ModelSpec::Linear(vec![Temperature, TemperatureSq, Smoothed, SmoothedSq]),
            ModelSpec::Linear(vec![LaggedDemand(7)]),
            ModelSpec::Linear(vec![
                Temperature,
                TemperatureSq,
                Smoothed,
                SmoothedSq,
                LaggedDemand(7),
            ]),
            ModelSpec::RidgeSig,
        ]
    }

    /// Parses a comma-separated list such as `ridgesig,lr:T+T2,lr:Tbar`, or
    /// one of the presets `synthetic` and `real`.
    pub fn parse_list(s: &str) -> Result<Vec<ModelSpec>> {
        match s.trim() {
            "synthetic" => return Ok(Self::synthetic_suite()),
            "real" => return Ok(Self::real_suite()),
            _ => {}
        }
        // Commas inside `LR(...)` separate features, not models.
        let mut parts = Vec::new();
        let (mut depth, mut start) = (0usize, 0);
        for (i, c) in s.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    parts.push(&s[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&s[start..]);
        let specs = parts
            .into_iter()
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if specs.is_empty() {
            return Err(Error::Config("no models requested".into()));
        }
        Ok(specs)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::RidgeSig => f.write_str("RidgeSig"),
            ModelSpec::Linear(features) => {
                f.write_str("LR(")?;
                for (i, x) in features.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("ridgesig") {
            return Ok(ModelSpec::RidgeSig);
        }
        let body = s
            .strip_prefix("lr:")
            .or_else(|| s.strip_prefix("LR(").and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))?;
        let features = body
            .split(['+', ','])
            .map(str::parse)
            .collect::<Result<Vec<BaselineFeature>>>()?;
        if features.is_empty() {
            return Err(Error::Config(format!("model `{s}` has no features")));
        }
        Ok(ModelSpec::Linear(features))
    }
}

/// Test-split scores of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelScore {
    pub name: String,
    pub rmse: f64,
    pub mape: f64,
    /// Selected regularization, for RidgeSig.
    pub lambda: Option<f64>,
    /// Forecasts for the rows of the split, in order.
    pub forecast: Vec<f64>,
}

/// Per-model metrics on a named split.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub split: String,
    pub first_t: usize,
    pub actual: Vec<f64>,
    pub models: Vec<ModelScore>,
}

impl EvaluationReport {
    pub fn get(&self, name: &str) -> Option<&ModelScore> {
        self.models.iter().find(|m| m.name == name)
    }
}

/// One cell of a window/order sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub window_days: usize,
    pub order: usize,
    pub lambda: f64,
    pub validation_rmse: f64,
    pub test_rmse: f64,
    pub test_mape: f64,
}

/// A prepared series with the protocol's splits, ready to evaluate models on.
#[derive(Debug, Clone)]
pub struct Experiment {
    frame: SeriesFrame,
    smoothed: Vec<f64>,
    config: ForecastConfig,
    splits: Splits,
}

impl Experiment {
    /// Smooths temperature at the input resolution, then subsamples by
    /// `config.stride` and splits by calendar year. `config.steps_per_day`
    /// is overwritten with the post-stride value.
    pub fn new(frame: &SeriesFrame, mut config: ForecastConfig) -> Result<Self> {
        config.validate()?;
        let smoothed_full = exp_smooth(frame.temperature(), config.alpha)?;
        let frame = frame.subsample(config.stride)?;
        let smoothed: Vec<f64> = smoothed_full.into_iter().step_by(config.stride).collect();
        let spd = frame.steps_per_day();
        if spd == 0 {
            return Err(Error::Config(format!(
                "sampling step of {} s does not divide a day",
                frame.step_seconds()
            )));
        }
        config.steps_per_day = spd;
        config.validate()?;
        let splits = Splits::by_year(&frame, config.train_end_year, config.valid_end_year)?;
        Ok(Self {
            frame,
            smoothed,
            config,
            splits,
        })
    }

    pub fn frame(&self) -> &SeriesFrame {
        &self.frame
    }

    pub fn config(&self) -> &ForecastConfig {
        &self.config
    }

    pub fn splits(&self) -> &Splits {
        &self.splits
    }

    pub fn smoothed_temperature(&self) -> &[f64] {
        &self.smoothed
    }

    fn check_test_split(&self, first_usable: usize) -> Result<()> {
        if *self.splits.test().start() < first_usable {
            return Err(Error::Config(format!(
                "test split starts at {} before the first usable row {first_usable}",
                self.splits.test().start()
            )));
        }
        if self.splits.test().is_empty() {
            return Err(Error::Config("test split is empty".into()));
        }
        Ok(())
    }

    pub fn features(&self, window_days: usize, order: usize) -> Result<FeatureTable> {
        build_feature_table(
            &Matrix::column(self.frame.temperature()),
            order,
            window_days * self.config.steps_per_day,
        )
    }

    fn score(&self, name: String, forecast: Vec<f64>, lambda: Option<f64>) -> Result<ModelScore> {
        let actual = &self.frame.demand()[self.splits.test()];
        Ok(ModelScore {
            name,
            rmse: rmse(actual, &forecast)?,
            mape: mape(actual, &forecast)?,
            lambda,
            forecast,
        })
    }

    /// Fits RidgeSig on a precomputed table and scores it on the test split.
    pub fn ridgesig_on(&self, table: &FeatureTable) -> Result<(ModelScore, RidgeSigFit)> {
        let delay = self.config.delay_steps();
        self.check_test_split(table.first_t.max(delay))?;
        let fit = train_on_features(
            table,
            self.frame.demand(),
            delay,
            &self.splits,
            &self.config.lambda_grid,
        )?;
        let fc = forecast(
            &fit.model,
            self.frame.demand(),
            table,
            delay,
            self.splits.test(),
        )?;
        let score = self.score(ModelSpec::RidgeSig.to_string(), fc, Some(fit.lambda))?;
        Ok((score, fit))
    }

    pub fn ridgesig(&self) -> Result<(ModelScore, RidgeSigFit)> {
        let table = self.features(self.config.window_days, self.config.order)?;
        self.ridgesig_on(&table)
    }

    fn baseline_column(&self, feature: BaselineFeature, t: usize) -> f64 {
        let temp = self.frame.temperature();
        match feature {
            BaselineFeature::Temperature => temp[t],
            BaselineFeature::TemperatureSq => temp[t] * temp[t],
            BaselineFeature::Smoothed => self.smoothed[t],
            BaselineFeature::SmoothedSq => self.smoothed[t] * self.smoothed[t],
            BaselineFeature::LaggedDemand(days) => {
                self.frame.demand()[t - days * self.config.steps_per_day]
            }
        }
    }

    fn baseline_design(&self, features: &[BaselineFeature], rows: RangeInclusive<usize>) -> Matrix {
        let p = features.len();
        let n = rows.clone().count();
        let mut data = Vec::with_capacity(n * p);
        for t in rows {
            data.extend(features.iter().map(|f| self.baseline_column(*f, t)));
        }
        Matrix::from_vec(n, p, data).expect("sized above")
    }

    /// Ordinary least squares of demand on the baseline features, fit on
    /// train + validation and scored on test.
    pub fn baseline(&self, features: &[BaselineFeature]) -> Result<ModelScore> {
        if features.is_empty() {
            return Err(Error::Config("baseline needs at least one feature".into()));
        }
        let first = features
            .iter()
            .map(|f| match f {
                BaselineFeature::LaggedDemand(days) => days * self.config.steps_per_day,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        self.check_test_split(first)?;
        if first > self.splits.valid_end {
            return Err(Error::Config("lag exceeds the fitting period".into()));
        }
        let fit_rows = first..=self.splits.valid_end;
        let y = &self.frame.demand()[fit_rows.clone()];
        let model = fit_ridge(&self.baseline_design(features, fit_rows), y, 0.0)?;
        let fc = model.predict(&self.baseline_design(features, self.splits.test()))?;
        self.score(ModelSpec::Linear(features.to_vec()).to_string(), fc, None)
    }

    /// Runs every model and reports test metrics in the given order.
    pub fn evaluate(&self, models: &[ModelSpec]) -> Result<EvaluationReport> {
        let models = models
            .par_iter()
            .map(|spec| match spec {
                ModelSpec::RidgeSig => self.ridgesig().map(|(s, _)| s),
                ModelSpec::Linear(f) => self.baseline(f),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvaluationReport {
            split: "test".into(),
            first_t: *self.splits.test().start(),
            actual: self.frame.demand()[self.splits.test()].to_vec(),
            models,
        })
    }

    /// RidgeSig over every `(window_days, order)` pair, in row-major order
    /// of the inputs. Cells run in parallel.
    pub fn sweep(&self, windows: &[usize], orders: &[usize]) -> Result<Vec<SweepCell>> {
        let cells: Vec<(usize, usize)> = windows
            .iter()
            .flat_map(|w| orders.iter().map(move |n| (*w, *n)))
            .collect();
        cells
            .par_iter()
            .map(|&(window_days, order)| {
                if window_days < self.config.delay_days {
                    return Err(Error::Config(format!(
                        "window ({window_days} days) shorter than delay ({} days)",
                        self.config.delay_days
                    )));
                }
                let table = self.features(window_days, order)?;
                let (score, fit) = self.ridgesig_on(&table)?;
                Ok(SweepCell {
                    window_days,
                    order,
                    lambda: fit.lambda,
                    validation_rmse: fit.validation_rmse,
                    test_rmse: score.rmse,
                    test_mape: score.mape,
                })
            })
            .collect()
    }
}

/// The cell with the lowest value of `key`; earlier cells win ties.
pub fn best_cell(cells: &[SweepCell], key: impl Fn(&SweepCell) -> f64) -> Option<&SweepCell> {
    cells
        .iter()
        .fold(None, |best: Option<&SweepCell>, c| match best {
            Some(b) if key(b) <= key(c) => Some(b),
            _ => Some(c),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing() {
        assert_eq!(exp_smooth(&[10.0, 20.0], 0.5).unwrap(), vec![10.0, 15.0]);
        let x = [3.0, -1.0, 4.0, 1.5];
        assert_eq!(exp_smooth(&x, 1.0).unwrap(), x.to_vec());
        assert!(exp_smooth(&x, 0.0).is_err());
        assert!(exp_smooth(&x, 1.5).is_err());
        assert!(exp_smooth(&[], 0.5).is_err());
    }

    #[test]
    fn three_day_weight_ratio() {
        let ratio = (1.0 - 0.005f64).powi(144);
        assert!((0.48..=0.49).contains(&ratio), "{ratio}");
    }

    #[test]
    fn deltas() {
        assert_eq!(delta_target(&[5.0; 4], 2).unwrap(), vec![0.0, 0.0]);
        assert_eq!(
            delta_target(&[1.0, 2.0, 4.0, 7.0], 1).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            delta_target(&[1.0, 2.0, 4.0, 7.0], 2).unwrap(),
            vec![3.0, 5.0]
        );
        assert!(delta_target(&[1.0, 2.0], 2).is_err());
        assert!(delta_target(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn metrics() {
        let a = [100.0, 100.0];
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        assert_eq!(mape(&a, &a).unwrap(), 0.0);
        assert_eq!(rmse(&a, &[90.0, 110.0]).unwrap(), 10.0);
        assert!((mape(&a, &[90.0, 110.0]).unwrap() - 10.0).abs() < 1e-12);
        assert!(mape(&[0.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = ForecastConfig::default();
        c.validate().unwrap();
        assert_eq!(c.window_steps(), 432);
        assert_eq!(c.delay_steps(), 96);
        c.window_days = 1;
        assert!(c.validate().is_err());
        let c = ForecastConfig {
            lambda_grid: vec![],
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn constant_covariates_give_zero_table() {
        let cov = Matrix::column(&[4.0; 20]);
        let t = build_feature_table(&cov, 3, 5).unwrap();
        assert_eq!(t.features.rows(), 15);
        assert_eq!(t.first_t, 5);
        assert!(t.features.as_slice().iter().all(|x| x.abs() < 1e-14));
        assert!(build_feature_table(&Matrix::column(&[1.0; 5]), 2, 5).is_err());
    }

    #[test]
    fn persistence_and_perfect_forecasts() {
        let y: Vec<f64> = (0..30).map(|i| 100.0 + (i as f64).sin() * 10.0).collect();
        let cov = Matrix::column(&y);
        let table = build_feature_table(&cov, 2, 4).unwrap();
        let zero = RidgeModel::constant(table.features.cols(), 0.0);
        let fc = forecast(&zero, &y, &table, 2, 10..=29).unwrap();
        assert_eq!(fc, y[8..=27].to_vec());

        // With w = D the level-1 covariate feature is exactly the increment.
        let table = build_feature_table(&cov, 1, 2).unwrap();
        let mut perfect = RidgeModel::constant(1, 0.0);
        perfect.theta[0] = 1.0;
        let fc = forecast(&perfect, &y, &table, 2, 5..=29).unwrap();
        for (f, a) in fc.iter().zip(&y[5..]) {
            assert!((f - a).abs() < 1e-12);
        }
        assert!(forecast(&zero, &y, &table, 2, 1..=10).is_err());
    }

    #[test]
    fn model_spec_parsing() {
        let specs = ModelSpec::parse_list("ridgesig, lr:T+T2 ,LR(Tbar,Tbar2),lr:Ylag7d").unwrap();
        assert_eq!(specs.len(), 4);
        assert_eq!(specs[0], ModelSpec::RidgeSig);
        assert_eq!(specs[1].to_string(), "LR(T,T2)");
        assert_eq!(specs[2].to_string(), "LR(Tbar,Tbar2)");
        assert_eq!(
            specs[3],
            ModelSpec::Linear(vec![BaselineFeature::LaggedDemand(7)])
        );
        assert_eq!(ModelSpec::parse_list("synthetic").unwrap().len(), 5);
        assert!(ModelSpec::parse_list("lr:X").is_err());
        assert!(ModelSpec::parse_list("").is_err());
        for spec in ModelSpec::real_suite() {
            assert_eq!(spec.to_string().parse::<ModelSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn best_cell_prefers_first_on_ties() {
        let cell = |w, r| SweepCell {
            window_days: w,
            order: 4,
            lambda: 1.0,
            validation_rmse: r,
            test_rmse: r,
            test_mape: 1.0,
        };
        let cells = [cell(2, 3.0), cell(3, 1.0), cell(4, 1.0)];
        assert_eq!(best_cell(&cells, |c| c.test_rmse).unwrap().window_days, 3);
        assert!(best_cell(&[], |c| c.test_rmse).is_none());
    }
}
