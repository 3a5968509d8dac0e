//! Series ingestion, resampling, and synthetic demand generation.
//!
//! CSV files use the fixed header `timestamp,demand_mw,temperature_c`, with
//! ISO-8601 UTC timestamps (`2012-01-01T00:00:00Z`), comma separators and dot
//! decimals.
//!
//! Synthetic noise is drawn from `ChaCha8Rng::seed_from_u64(seed)` through
//! `rand_distr::StandardNormal` (ziggurat). Both are portable and
//! platform-independent, so a seed pins the output bit-for-bit.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, TimeZone, Timelike, Utc};
use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pipeline::exp_smooth;
use crate::ridge::fit_ridge;

pub const CSV_HEADER: [&str; 3] = ["timestamp", "demand_mw", "temperature_c"];

/// Plausible range for national-average temperature, in °C.
pub const TEMPERATURE_BOUNDS: (f64, f64) = (-10.0, 35.0);

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

/// Timestamped demand and temperature on a fixed step.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFrame {
    timestamps: Vec<DateTime<Utc>>,
    step_seconds: i64,
    demand: Vec<f64>,
    temperature: Vec<f64>,
}

impl SeriesFrame {
    /// Validates and builds a frame. Timestamps must be strictly increasing on
    /// a single step and demand strictly positive. Temperatures outside
    /// [`TEMPERATURE_BOUNDS`] are logged, not rejected.
    pub fn new(
        timestamps: Vec<DateTime<Utc>>,
        demand: Vec<f64>,
        temperature: Vec<f64>,
    ) -> Result<Self> {
        let n = timestamps.len();
        if demand.len() != n || temperature.len() != n {
            return Err(Error::Shape(format!(
                "{n} timestamps, {} demand values, {} temperatures",
                demand.len(),
                temperature.len()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("empty series".into()));
        }
        let step_seconds = if n > 1 {
            (timestamps[1] - timestamps[0]).num_seconds()
        } else {
            0
        };
        for i in 1..n {
            let gap = (timestamps[i] - timestamps[i - 1]).num_seconds();
            if gap <= 0 {
                return Err(Error::InvalidArgument(format!(
                    "timestamps not strictly increasing at row {i}"
                )));
            }
            if gap != step_seconds {
                return Err(Error::InvalidArgument(format!(
                    "step violation at row {i}: {gap} s, expected {step_seconds} s"
                )));
            }
        }
        if let Some(i) = demand.iter().position(|d| *d <= 0.0 || !d.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "demand must be positive and finite, row {i} has {}",
                demand[i]
            )));
        }
        if temperature.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("temperature"));
        }
        let frame = Self {
            timestamps,
            step_seconds,
            demand,
            temperature,
        };
        let outside = frame.temperature_out_of_bounds();
        if outside > 0 {
            warn!(
                "{outside} temperature values outside [{}, {}] °C",
                TEMPERATURE_BOUNDS.0, TEMPERATURE_BOUNDS.1
            );
        }
        Ok(frame)
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[DateTime<Utc>] {
        &self.timestamps
    }

    pub fn step_seconds(&self) -> i64 {
        self.step_seconds
    }

    /// Samples per day; zero for single-row frames or steps that do not divide a day.
    pub fn steps_per_day(&self) -> usize {
        if self.step_seconds > 0 && 86_400 % self.step_seconds == 0 {
            (86_400 / self.step_seconds) as usize
        } else {
            0
        }
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn temperature(&self) -> &[f64] {
        &self.temperature
    }

    pub fn temperature_out_of_bounds(&self) -> usize {
        self.temperature
            .iter()
            .filter(|t| **t < TEMPERATURE_BOUNDS.0 || **t > TEMPERATURE_BOUNDS.1)
            .count()
    }

    /// Same series with the demand column replaced.
    pub fn with_demand(&self, demand: Vec<f64>) -> Result<Self> {
        Self::new(self.timestamps.clone(), demand, self.temperature.clone())
    }

    /// Every `stride`-th row, starting with the first.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidArgument("stride must be positive".into()));
        }
        let pick = |v: &[f64]| v.iter().step_by(stride).copied().collect::<Vec<_>>();
        Self::new(
            self.timestamps.iter().step_by(stride).copied().collect(),
            pick(&self.demand),
            pick(&self.temperature),
        )
    }

    /// Index of the last row whose timestamp falls in `year` or earlier.
    pub fn last_index_of_year(&self, year: i32) -> Option<usize> {
        let end = self.timestamps.partition_point(|t| t.year() <= year);
        end.checked_sub(1)
    }
}

/// Formats a timestamp in the CSV convention.
pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s)
        .ok()
        .map(|t| t.with_timezone(&Utc))
}

/// Reads a `timestamp,demand_mw,temperature_c` file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<SeriesFrame> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(parse_err(
            1,
            format!(
                "expected header `{}`, found `{}`",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut timestamps = Vec::new();
    let mut demand = Vec::new();
    let mut temperature = Vec::new();
    let mut step: Option<i64> = None;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        if record.len() != 3 {
            return Err(parse_err(
                line,
                format!("expected 3 fields, found {}", record.len()),
            ));
        }
        let ts = parse_timestamp(&record[0])
            .ok_or_else(|| parse_err(line, format!("bad timestamp `{}`", &record[0])))?;
        let num = |field: &str, name: &str| -> Result<f64> {
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad {name} `{field}`")))
        };
        let d = num(&record[1], "demand")?;
        let t = num(&record[2], "temperature")?;
        if d <= 0.0 {
            return Err(parse_err(
                line,
                format!("demand must be positive, found {d}"),
            ));
        }
        if let Some(prev) = timestamps.last() {
            let gap = ts.signed_duration_since(*prev).num_seconds();
            if gap == 0 {
                return Err(parse_err(
                    line,
                    format!("duplicated timestamp `{}`", &record[0]),
                ));
            }
            if gap < 0 {
                return Err(parse_err(
                    line,
                    format!("timestamp `{}` goes backwards", &record[0]),
                ));
            }
            match step {
                None => step = Some(gap),
                Some(s) if s != gap => {
                    return Err(parse_err(
                        line,
                        format!("step violation: {gap} s after previous row, expected {s} s"),
                    ))
                }
                _ => {}
            }
        }
        timestamps.push(ts);
        demand.push(d);
        temperature.push(t);
    }
    if timestamps.is_empty() {
        return Err(parse_err(2, "no data rows".into()));
    }
    SeriesFrame::new(timestamps, demand, temperature)
}

/// Writes a frame in the CSV convention. Floats use the shortest
/// representation that reads back to the same value.
pub fn write_csv(frame: &SeriesFrame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_csv_to(frame, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to(frame: &SeriesFrame, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for i in 0..frame.len() {
        writeln!(
            out,
            "{},{},{}",
            format_timestamp(&frame.timestamps[i]),
            frame.demand[i],
            frame.temperature[i]
        )?;
    }
    Ok(())
}

/// Linear interpolation of a series sampled every `coarse_step` onto a grid of
/// `fine_step`. The coarse step must be a whole multiple of the fine one;
/// original points are kept exactly.
pub fn interpolate_to_step(values: &[f64], coarse_step: u64, fine_step: u64) -> Result<Vec<f64>> {
    if fine_step == 0 || coarse_step == 0 || !coarse_step.is_multiple_of(fine_step) {
        return Err(Error::InvalidArgument(format!(
            "coarse step {coarse_step} is not a multiple of fine step {fine_step}"
        )));
    }
    let ratio = (coarse_step / fine_step) as usize;
    if values.len() < 2 || ratio == 1 {
        return Ok(values.to_vec());
    }
    let mut out = Vec::with_capacity((values.len() - 1) * ratio + 1);
    for pair in values.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        out.push(a);
        for j in 1..ratio {
            let f = j as f64 / ratio as f64;
            out.push(a + (b - a) * f);
        }
    }
    out.push(values[values.len() - 1]);
    Ok(out)
}

/// Synthetic demand driven by smoothed temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDemand {
    pub demand: Vec<f64>,
    /// Noise-free part `θ0 + θ1·T̄ + θ2·T̄²`.
    pub fitted: Vec<f64>,
    pub smoothed_temperature: Vec<f64>,
    pub theta0: f64,
    pub theta1: f64,
    pub theta2: f64,
}

/// Fits `Y ≈ θ0 + θ1·T̄ + θ2·T̄²` by least squares on the observed demand,
/// with `T̄` the exponentially smoothed temperature, then adds i.i.d.
/// `N(0, σ²)` noise to the fitted values.
pub fn gen_synthetic(
    temperature: &[f64],
    observed_demand: &[f64],
    alpha: f64,
    sigma: f64,
    seed: u64,
) -> Result<SyntheticDemand> {
    if temperature.len() != observed_demand.len() {
        return Err(Error::Shape(format!(
            "{} temperatures but {} demand values",
            temperature.len(),
            observed_demand.len()
        )));
    }
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    let smoothed = exp_smooth(temperature, alpha)?;
    let design = Matrix::from_vec(
        smoothed.len(),
        2,
        smoothed.iter().flat_map(|t| [*t, t * t]).collect(),
    )?;
    let model = fit_ridge(&design, observed_demand, 0.0)?;
    if model.theta.contains(&0.0) {
        return Err(Error::InvalidArgument(
            "degenerate fit: smoothed temperature has no variation".into(),
        ));
    }
    let theta1 = model.theta[0] / model.feature_scales[0];
    let theta2 = model.theta[1] / model.feature_scales[1];
    let theta0 =
        model.intercept - theta1 * model.feature_means[0] - theta2 * model.feature_means[1];

    let fitted: Vec<f64> = smoothed
        .iter()
        .map(|t| theta0 + theta1 * t + theta2 * t * t)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let demand = fitted
        .iter()
        .map(|f| {
            let z: f64 = rng.sample(StandardNormal);
            f + sigma * z
        })
        .collect();
    Ok(SyntheticDemand {
        demand,
        fitted,
        smoothed_temperature: smoothed,
        theta0,
        theta1,
        theta2,
    })
}

/// Settings for [`reference_climate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClimateConfig {
    /// First timestamp (midnight UTC).
    pub start: DateTime<Utc>,
    pub days: usize,
    pub steps_per_day: usize,
    pub seed: u64,
}

impl Default for ClimateConfig {
    /// Four years of half-hourly data, 2012-01-01 through 2015-12-31.
    fn default() -> Self {
        Self {
            start: Utc.with_ymd_and_hms(2012, 1, 1, 0, 0, 0).unwrap(),
            days: 1461,
            steps_per_day: 48,
            seed: 2012,
        }
    }
}

/// Generates a plausible national temperature and demand series when real
/// data is not at hand.
///
/// Temperature: annual cycle (about 4.5 °C in late January to 20.5 °C in
/// late July), a diurnal cycle peaking mid-afternoon, and a weather anomaly
/// following a first-order autoregression with a three-day decorrelation
/// time. Demand: a base load, heating load linear in how far a slowly
/// smoothed temperature sits below 15 °C, a small cooling load, intraday and
/// weekday profiles, and autocorrelated noise.
pub fn reference_climate(config: &ClimateConfig) -> Result<SeriesFrame> {
    let spd = config.steps_per_day;
    if spd == 0 || 86_400 % spd != 0 {
        return Err(Error::InvalidArgument(format!(
            "steps per day must divide 86400, got {spd}"
        )));
    }
    let n = config.days * spd;
    let step = Duration::seconds((86_400 / spd) as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // Weather anomaly: AR(1) with 3-day e-folding and 3 °C stationary sd.
    let phi = (-1.0 / (3.0 * spd as f64)).exp();
    let innovation_sd = 3.0 * (1.0 - phi * phi).sqrt();
    let mut anomaly = 3.0 * rng.sample::<f64, _>(StandardNormal);
    let mut demand_noise = 0.0;
    let noise_phi = (-1.0 / (0.25 * spd as f64)).exp();
    let noise_sd = 700.0 * (1.0 - noise_phi * noise_phi).sqrt();

    let mut timestamps = Vec::with_capacity(n);
    let mut temperature = Vec::with_capacity(n);
    for i in 0..n {
        let ts = config.start + step * i as i32;
        let doy = ts.ordinal0() as f64 + (ts.num_seconds_from_midnight() as f64) / 86_400.0;
        let hour = ts.num_seconds_from_midnight() as f64 / 3600.0;
        let season = -(2.0 * PI * (doy - 20.0) / 365.25).cos();
        let diurnal_amp = 3.0 + 1.2 * season;
        let t =
            12.5 + 8.0 * season + diurnal_amp * (2.0 * PI * (hour - 15.0) / 24.0).cos() + anomaly;
        anomaly = phi * anomaly + innovation_sd * rng.sample::<f64, _>(StandardNormal);
        timestamps.push(ts);
        temperature.push(t);
    }

    let slow = exp_smooth(&temperature, 0.004)?;
    let mut demand = Vec::with_capacity(n);
    for i in 0..n {
        let ts = timestamps[i];
        let hour = ts.num_seconds_from_midnight() as f64 / 3600.0;
        let heating = 2300.0 * (15.0 - slow[i]).max(0.0);
        let cooling = 400.0 * (temperature[i] - 24.0).max(0.0);
        let intraday = 4500.0 * (2.0 * PI * (hour - 10.0) / 24.0).cos()
            + 2000.0 * (4.0 * PI * (hour - 19.0) / 24.0).cos();
        let weekday = match ts.weekday().num_days_from_monday() {
            5 => -5000.0,
            6 => -8000.0,
            _ => 0.0,
        };
        demand_noise = noise_phi * demand_noise + noise_sd * rng.sample::<f64, _>(StandardNormal);
        demand.push(50_000.0 + heating + cooling + intraday + weekday + demand_noise);
    }
    SeriesFrame::new(timestamps, demand, temperature)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(h: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2013, 3, 1, h, 0, 0).unwrap()
    }

    #[test]
    fn frame_validation() {
        let ok = SeriesFrame::new(vec![ts(0), ts(1)], vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
        assert_eq!(ok.step_seconds(), 3600);
        assert_eq!(ok.steps_per_day(), 24);
        assert!(SeriesFrame::new(vec![ts(1), ts(0)], vec![1.0; 2], vec![0.0; 2]).is_err());
        assert!(SeriesFrame::new(vec![ts(0), ts(1), ts(3)], vec![1.0; 3], vec![0.0; 3]).is_err());
        assert!(SeriesFrame::new(vec![ts(0), ts(1)], vec![1.0, 0.0], vec![0.0; 2]).is_err());
    }

    #[test]
    fn interpolation() {
        assert_eq!(
            interpolate_to_step(&[0.0, 6.0], 2, 1).unwrap(),
            vec![0.0, 3.0, 6.0]
        );
        assert_eq!(
            interpolate_to_step(&[4.0, 4.0, 4.0], 6, 2).unwrap(),
            vec![4.0; 7]
        );
        assert_eq!(
            interpolate_to_step(&[1.0, 5.0], 3, 3).unwrap(),
            vec![1.0, 5.0]
        );
        assert!(interpolate_to_step(&[1.0, 5.0], 3, 2).is_err());
        let coarse = [1.0, -2.0, 7.5, 7.5, 0.25];
        let fine = interpolate_to_step(&coarse, 6, 1).unwrap();
        assert_eq!(fine.len(), 25);
        for (j, v) in fine.iter().enumerate() {
            let k = j / 6;
            let (a, b) = (coarse[k], coarse[(k + 1).min(4)]);
            assert!(*v >= a.min(b) && *v <= a.max(b));
            if j % 6 == 0 {
                assert_eq!(*v, coarse[k]);
            }
        }
    }

    #[test]
    fn noiseless_synthetic_is_quadratic() {
        let temp: Vec<f64> = (0..500)
            .map(|i| 10.0 + 8.0 * (i as f64 / 40.0).sin())
            .collect();
        let obs: Vec<f64> = temp
            .iter()
            .map(|t| 60_000.0 - 900.0 * t + 12.0 * t * t)
            .collect();
        let s = gen_synthetic(&temp, &obs, 0.05, 0.0, 1).unwrap();
        for (y, t) in s.demand.iter().zip(&s.smoothed_temperature) {
            let q = s.theta0 + s.theta1 * t + s.theta2 * t * t;
            assert_eq!(*y, q);
        }
    }

    #[test]
    fn synthetic_seeding() {
        let temp: Vec<f64> = (0..300).map(|i| (i as f64 / 17.0).cos() * 5.0).collect();
        let obs: Vec<f64> = temp.iter().map(|t| 1000.0 + t * t).collect();
        let a = gen_synthetic(&temp, &obs, 0.1, 10.0, 7).unwrap();
        let b = gen_synthetic(&temp, &obs, 0.1, 10.0, 7).unwrap();
        let c = gen_synthetic(&temp, &obs, 0.1, 10.0, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.demand, c.demand);
    }

    #[test]
    fn synthetic_rejects_constant_temperature() {
        let temp = vec![12.0; 100];
        let obs: Vec<f64> = (0..100).map(|i| 1000.0 + i as f64).collect();
        assert!(gen_synthetic(&temp, &obs, 0.1, 1.0, 1).is_err());
        assert!(gen_synthetic(&temp, &obs[..10], 0.1, 1.0, 1).is_err());
    }

    #[test]
    fn year_boundaries() {
        let frame = reference_climate(&ClimateConfig {
            days: 3,
            start: Utc.with_ymd_and_hms(2013, 12, 31, 0, 0, 0).unwrap(),
            steps_per_day: 24,
            seed: 1,
        })
        .unwrap();
        assert_eq!(frame.last_index_of_year(2013), Some(23));
        assert_eq!(frame.last_index_of_year(2012), None);
        assert_eq!(frame.last_index_of_year(2014), Some(71));
    }
}
