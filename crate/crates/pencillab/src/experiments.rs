//! Monte Carlo campaigns over random pencils: expected real critical-point
//! counts on RP¹ and RP², pooled-angle equidistribution tests, convergence
//! studies in the degree, and CSV persistence with an integrity-checked
//! summary sidecar.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::mean_stderr;
use crate::ensembles::{make_stream, sample_pencil_binary, sample_pencil_ternary};
use crate::realroots::{
    count_crit_rp2, critical_angles, critical_angles_rootcheck, CircleOpts, RootError, Rp2Opts,
};

/// Degree above which the per-sample base-locus guard switches from the
/// resultant-magnitude test to the root-level check. The normalized
/// resultant of a generic Kostlan pair shrinks like 10^(-0.08 d²), so a
/// fixed magnitude floor stops separating degenerate pairs from typical
/// ones past d ≈ 30; the root-level check is also O(d) instead of O(d³).
const RESULTANT_MAX_DEGREE: u32 = 30;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("invalid configuration: {0}")]
    BadConfig(&'static str),
    #[error("exclusion rate {rate:.4} exceeds the cap {cap}")]
    ExclusionRate { rate: f64, cap: f64 },
    #[error("need at least {min} pooled angles, got {got}")]
    TooFewAngles { got: usize, min: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("integrity: {0}")]
    Integrity(String),
    #[error(transparent)]
    Root(#[from] RootError),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub run_id: String,
    pub n: u32,
    pub d: u32,
    pub samples: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(run_id: &str, n: u32, d: u32, samples: u64, seed: u64) -> Self {
        RunConfig {
            run_id: run_id.to_string(),
            n,
            d,
            samples,
            seed,
            out: None,
        }
    }

    fn validate(&self) -> Result<(), ExpError> {
        if self.samples < 1 {
            return Err(ExpError::BadConfig("samples must be >= 1"));
        }
        if self.d < 1 {
            return Err(ExpError::BadConfig("degree must be >= 1"));
        }
        Ok(())
    }
}

/// One row of the frozen CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub run_id: String,
    pub seed: u64,
    pub n: u32,
    pub d: u32,
    pub sample_index: u64,
    pub count: u64,
    pub certified: bool,
    /// Empty for samples entering the mean.
    pub excluded_reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub n: u32,
    pub d: u32,
    pub samples: u64,
    pub seed: u64,
    pub mean_count: f64,
    /// mean_count / √dⁿ
    pub mean_scaled: f64,
    pub stderr_scaled: f64,
    pub excluded: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub rows: Vec<SampleRow>,
    pub summary: RunSummary,
}

fn summarize(config: &RunConfig, rows: &[SampleRow], wall_time_s: f64) -> RunSummary {
    let counts: Vec<f64> = rows
        .iter()
        .filter(|r| r.excluded_reason.is_empty())
        .map(|r| r.count as f64)
        .collect();
    let excluded = rows.len() as u64 - counts.len() as u64;
    let (mean, stderr) = if counts.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        mean_stderr(&counts)
    };
    let scale = (config.d as f64).sqrt().powi(config.n as i32);
    RunSummary {
        run_id: config.run_id.clone(),
        n: config.n,
        d: config.d,
        samples: config.samples,
        seed: config.seed,
        mean_count: mean,
        mean_scaled: mean / scale,
        stderr_scaled: stderr / scale,
        excluded,
        wall_time_s,
    }
}

fn reason_of(err: &RootError) -> &'static str {
    match err {
        RootError::BaseLocus => "base-locus",
        RootError::ProportionalForms => "proportional",
        RootError::DegenerateSystem => "degenerate",
        RootError::ZeroForm => "zero-form",
        RootError::DegreeMismatch(_, _) => "degree-mismatch",
    }
}

/// Per-sample outcome before serialization.
enum Outcome {
    Counted { count: u64, certified: bool },
    Excluded(&'static str),
}

fn rows_from_outcomes(config: &RunConfig, outcomes: Vec<Outcome>) -> Vec<SampleRow> {
    outcomes
        .into_iter()
        .enumerate()
        .map(|(k, o)| {
            let (count, certified, reason) = match o {
                Outcome::Counted { count, certified } => {
                    (count, certified, if certified { "" } else { "uncertified" })
                }
                Outcome::Excluded(r) => (0, false, r),
            };
            SampleRow {
                run_id: config.run_id.clone(),
                seed: config.seed,
                n: config.n,
                d: config.d,
                sample_index: k as u64,
                count,
                certified,
                excluded_reason: reason.to_string(),
            }
        })
        .collect()
}

fn check_exclusion(rows: &[SampleRow], cap: f64) -> Result<(), ExpError> {
    let excluded = rows.iter().filter(|r| !r.excluded_reason.is_empty()).count();
    let rate = excluded as f64 / rows.len() as f64;
    if rate > cap {
        return Err(ExpError::ExclusionRate { rate, cap });
    }
    Ok(())
}

/// Expected real critical points of degree-d Kostlan pencils on RP¹.
/// Only certified samples enter the mean; the run fails if more than 1%
/// of samples are excluded.
pub fn run_pencil1d(config: &RunConfig, opts: &CircleOpts) -> Result<ExperimentRecord, ExpError> {
    config.validate()?;
    if config.n != 1 {
        return Err(ExpError::BadConfig("run_pencil1d requires n = 1"));
    }
    let start = Instant::now();
    let stream = make_stream(config.seed, 0);
    let d = config.d;
    let outcomes: Vec<Outcome> = (0..config.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.substream(k).rng();
            let pencil = sample_pencil_binary(d, &mut rng).expect("d >= 1");
            let res = if d <= RESULTANT_MAX_DEGREE {
                critical_angles(&pencil.alpha, &pencil.beta, opts)
            } else {
                critical_angles_rootcheck(&pencil.alpha, &pencil.beta, opts)
            };
            match res {
                Ok(list) => Outcome::Counted {
                    count: list.angles.len() as u64,
                    certified: list.certified,
                },
                Err(e) => Outcome::Excluded(reason_of(&e)),
            }
        })
        .collect();
    let rows = rows_from_outcomes(config, outcomes);
    check_exclusion(&rows, 0.01)?;
    let summary = summarize(config, &rows, start.elapsed().as_secs_f64());
    let record = ExperimentRecord { rows, summary };
    if let Some(path) = &config.out {
        write_records(path, &record)?;
    }
    Ok(record)
}

/// Certified real critical-point counts of Kostlan pencils on RP².
/// Exclusion cap 10% at this tier (the certified solver gives up more
/// often than the circle counter).
pub fn run_pencil2d(config: &RunConfig, opts: &Rp2Opts) -> Result<ExperimentRecord, ExpError> {
    config.validate()?;
    if config.n != 2 {
        return Err(ExpError::BadConfig("run_pencil2d requires n = 2"));
    }
    if config.d > 8 {
        return Err(ExpError::BadConfig("run_pencil2d supports d <= 8"));
    }
    let start = Instant::now();
    let stream = make_stream(config.seed, 0);
    let d = config.d;
    let outcomes: Vec<Outcome> = (0..config.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.substream(k).rng();
            let pencil = sample_pencil_ternary(d, &mut rng).expect("d >= 1");
            match count_crit_rp2(&pencil.alpha, &pencil.beta, opts) {
                Ok(rc) => Outcome::Counted {
                    count: rc.count as u64,
                    certified: rc.certified,
                },
                Err(e) => Outcome::Excluded(reason_of(&e)),
            }
        })
        .collect();
    let rows = rows_from_outcomes(config, outcomes);
    check_exclusion(&rows, 0.10)?;
    let summary = summarize(config, &rows, start.elapsed().as_secs_f64());
    let record = ExperimentRecord { rows, summary };
    if let Some(path) = &config.out {
        write_records(path, &record)?;
    }
    Ok(record)
}

/// Pool the critical angles of many pencils; uncertified or degenerate
/// samples are skipped and counted.
pub fn pool_angles(
    d: u32,
    samples: u64,
    seed: u64,
    opts: &CircleOpts,
) -> (Vec<f64>, u64) {
    let stream = make_stream(seed, 1);
    let lists: Vec<Option<Vec<f64>>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.substream(k).rng();
            let pencil = sample_pencil_binary(d, &mut rng).ok()?;
            let res = if d <= RESULTANT_MAX_DEGREE {
                critical_angles(&pencil.alpha, &pencil.beta, opts)
            } else {
                critical_angles_rootcheck(&pencil.alpha, &pencil.beta, opts)
            };
            match res {
                Ok(list) if list.certified => Some(list.angles),
                _ => None,
            }
        })
        .collect();
    let mut pooled = Vec::new();
    let mut excluded = 0;
    for l in lists {
        match l {
            Some(mut angles) => pooled.append(&mut angles),
            None => excluded += 1,
        }
    }
    (pooled, excluded)
}

/// Kolmogorov–Smirnov statistic of the angle sample against the uniform
/// law on [0, π).
pub fn ks_uniform(angles: &[f64]) -> Result<f64, ExpError> {
    if angles.len() < 100 {
        return Err(ExpError::TooFewAngles {
            got: angles.len(),
            min: 100,
        });
    }
    let mut sorted = angles.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d_stat = 0.0f64;
    for (i, theta) in sorted.iter().enumerate() {
        let f = theta / std::f64::consts::PI;
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d_stat = d_stat.max((f - lo).abs()).max((hi - f).abs());
    }
    Ok(d_stat)
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub d: u32,
    pub mean_scaled: f64,
    pub stderr_scaled: f64,
    pub excluded: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    /// Intercept of the least-squares fit mean_scaled ≈ c + b/√d.
    pub extrapolated_c: f64,
    pub slope_b: f64,
    /// Largest absolute fit residual across the d grid.
    pub max_residual: f64,
}

/// Scaled means over a degree grid with a c + b/√d extrapolation; the
/// intercept estimates the d → ∞ limit.
pub fn convergence_study(
    d_list: &[u32],
    samples: u64,
    seed: u64,
    opts: &CircleOpts,
) -> Result<StudyTable, ExpError> {
    if d_list.len() < 2 || d_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExpError::BadConfig("need an increasing list of degrees"));
    }
    let mut rows = Vec::new();
    for &d in d_list {
        let config = RunConfig::new(&format!("study-d{}", d), 1, d, samples, seed);
        let rec = run_pencil1d(&config, opts)?;
        rows.push(StudyRow {
            d,
            mean_scaled: rec.summary.mean_scaled,
            stderr_scaled: rec.summary.stderr_scaled,
            excluded: rec.summary.excluded,
        });
    }
    // least squares for y = c + b x with x = 1/√d
    let xs: Vec<f64> = rows.iter().map(|r| 1.0 / (r.d as f64).sqrt()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_scaled).collect();
    let m = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = m * sxx - sx * sx;
    let b = (m * sxy - sx * sy) / denom;
    let c = (sy - b * sx) / m;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (c + b * x)).abs())
        .fold(0.0f64, f64::max);
    Ok(StudyTable {
        rows,
        extrapolated_c: c,
        slope_b: b,
        max_residual,
    })
}

fn summary_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".summary.json");
    PathBuf::from(s)
}

/// Write rows as CSV at `path` and the summary as JSON at
/// `path.summary.json`. Deterministic bytes for a given record.
pub fn write_records(path: &Path, record: &ExperimentRecord) -> Result<(), ExpError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_to_exp)?;
    for row in &record.rows {
        w.serialize(row).map_err(csv_to_exp)?;
    }
    w.flush()?;
    let json = serde_json::to_vec_pretty(&record.summary)?;
    std::fs::write(summary_path(path), json)?;
    Ok(())
}

/// Read rows and a summary back, recompute the summary from the rows, and
/// fail on any mismatch. Parse errors carry the offending line number.
pub fn read_records(path: &Path) -> Result<ExperimentRecord, ExpError> {
    let mut rows = Vec::new();
    let mut reader = csv::Reader::from_path(path).map_err(csv_to_exp)?;
    for result in reader.deserialize::<SampleRow>() {
        rows.push(result.map_err(csv_to_exp)?);
    }
    let summary: RunSummary =
        serde_json::from_slice(&std::fs::read(summary_path(path))?)?;
    if rows.is_empty() {
        return Err(ExpError::Integrity("no rows".to_string()));
    }
    let config = RunConfig {
        run_id: summary.run_id.clone(),
        n: summary.n,
        d: summary.d,
        samples: summary.samples,
        seed: summary.seed,
        out: None,
    };
    let recomputed = summarize(&config, &rows, summary.wall_time_s);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs()) || (a.is_nan() && b.is_nan());
    if rows.len() as u64 != summary.samples
        || recomputed.excluded != summary.excluded
        || !close(recomputed.mean_count, summary.mean_count)
        || !close(recomputed.mean_scaled, summary.mean_scaled)
        || !close(recomputed.stderr_scaled, summary.stderr_scaled)
    {
        return Err(ExpError::Integrity(format!(
            "stored summary disagrees with rows: stored mean {}, recomputed {}",
            summary.mean_count, recomputed.mean_count
        )));
    }
    Ok(ExperimentRecord { rows, summary })
}

fn csv_to_exp(e: csv::Error) -> ExpError {
    let line = e.position().map_or(0, |p| p.line());
    ExpError::Parse {
        line,
        msg: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn opts() -> CircleOpts {
        CircleOpts::default()
    }

    #[test]
    fn mobius_pencils_have_no_critical_points() {
        let config = RunConfig::new("d1", 1, 1, 200, 7);
        let rec = run_pencil1d(&config, &opts()).unwrap();
        assert_eq!(rec.summary.excluded, 0);
        assert!(rec.rows.iter().all(|r| r.count == 0));
        assert_eq!(rec.summary.mean_count, 0.0);
    }

    #[test]
    fn counts_bounded_and_even() {
        let config = RunConfig::new("d6", 1, 6, 300, 11);
        let rec = run_pencil1d(&config, &opts()).unwrap();
        for row in rec.rows.iter().filter(|r| r.excluded_reason.is_empty()) {
            assert!(row.count <= 10); // 2d - 2
            assert_eq!(row.count % 2, 0);
        }
    }

    #[test]
    fn pencil1d_deterministic() {
        let config = RunConfig::new("det", 1, 5, 100, 3);
        let a = run_pencil1d(&config, &opts()).unwrap();
        let b = run_pencil1d(&config, &opts()).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn quadratic_mean_matches_direct_oracle() {
        // independent straight-line implementation at d = 2: the critical
        // equation is the quadratic Wronskian, solved by the discriminant
        use crate::ensembles::sample_pencil_binary;
        use crate::forms::wronskian_binary;
        let stream = make_stream(21, 0);
        let mut oracle_counts = Vec::new();
        for k in 0..20_000u64 {
            let mut rng = stream.substream(k).rng();
            let p = sample_pencil_binary(2, &mut rng).unwrap();
            let w = wronskian_binary(&p.alpha, &p.beta).unwrap();
            let c = w.coeffs(); // c0 y² + c1 xy + c2 x²... as stored [x^0, .., x^2]
            let (c0, c1, c2) = (c[0], c[1], c[2]);
            // projective roots of c2 x² + c1 x y + c0 y²
            let count = if c2 == 0.0 && c1 == 0.0 && c0 == 0.0 {
                continue;
            } else if c2 == 0.0 {
                // root at [1:0], plus one affine root when c1 ≠ 0
                if c1 == 0.0 {
                    1
                } else {
                    2
                }
            } else {
                let disc = c1 * c1 - 4.0 * c2 * c0;
                if disc > 0.0 {
                    2
                } else if disc == 0.0 {
                    1
                } else {
                    0
                }
            };
            oracle_counts.push(count as f64);
        }
        let (oracle_mean, oracle_stderr) = mean_stderr(&oracle_counts);

        let config = RunConfig::new("d2", 1, 2, 20_000, 21);
        let rec = run_pencil1d(&config, &opts()).unwrap();
        let gap = (rec.summary.mean_count - oracle_mean).abs();
        assert!(
            gap < 3.0 * oracle_stderr.max(1e-12),
            "mean {} vs oracle {}",
            rec.summary.mean_count,
            oracle_mean
        );
    }

    #[test]
    fn ks_statistic_behaviour() {
        let n = 10_000;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * PI / n as f64).collect();
        assert!(ks_uniform(&grid).unwrap() < 0.011);
        let degenerate = vec![1.0; 1000];
        assert!(ks_uniform(&degenerate).unwrap() > 0.6);
        assert!(ks_uniform(&grid[..50]).is_err());
    }

    #[test]
    fn pooled_angles_look_uniform() {
        let (angles, excluded) = pool_angles(12, 2_000, 5, &opts());
        assert!(excluded as f64 <= 0.01 * 2_000.0);
        assert!(angles.len() > 1_000);
        let stat = ks_uniform(&angles).unwrap();
        assert!(stat < 0.05, "ks = {}", stat);
    }

    #[test]
    fn csv_roundtrip() {
        let dir = std::env::temp_dir().join("pencillab-test-csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.csv");
        let mut config = RunConfig::new("rt", 1, 4, 50, 13);
        config.out = Some(path.clone());
        let rec = run_pencil1d(&config, &opts()).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(rec.rows, back.rows);
        assert_eq!(rec.summary, back.summary);
    }

    #[test]
    fn truncated_csv_reports_line() {
        let dir = std::env::temp_dir().join("pencillab-test-csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("trunc.csv");
        let mut config = RunConfig::new("tr", 1, 4, 20, 13);
        config.out = Some(path.clone());
        run_pencil1d(&config, &opts()).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let cut: String = content.lines().take(5).collect::<Vec<_>>().join("\n")
            + "\n4,oops";
        std::fs::write(&path, cut).unwrap();
        match read_records(&path) {
            Err(ExpError::Parse { line, .. }) => assert!(line >= 5),
            other => panic!("expected parse error, got {:?}", other.map(|r| r.summary)),
        }
    }

    #[test]
    fn summary_tamper_detected() {
        let dir = std::env::temp_dir().join("pencillab-test-csv");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tamper.csv");
        let mut config = RunConfig::new("tm", 1, 4, 30, 13);
        config.out = Some(path.clone());
        let rec = run_pencil1d(&config, &opts()).unwrap();
        let mut summary = rec.summary.clone();
        summary.mean_count += 1.0;
        std::fs::write(
            summary_path(&path),
            serde_json::to_vec_pretty(&summary).unwrap(),
        )
        .unwrap();
        assert!(matches!(read_records(&path), Err(ExpError::Integrity(_))));
    }

    #[test]
    fn study_fit_is_sane() {
        let table = convergence_study(&[16, 64, 256], 400, 9, &opts()).unwrap();
        assert!(table.extrapolated_c.is_finite());
        assert!(table.slope_b.is_finite());
        // Kac-Rice with the conditioning at a point gives the exact mean
        // √(2d−2) for the real critical points of a degree-d Kostlan
        // pencil on the line, so the scaled means extrapolate to √2
        assert_relative_eq!(
            table.extrapolated_c,
            std::f64::consts::SQRT_2,
            max_relative = 0.05
        );
        for r in &table.rows {
            let exact = (2.0 * r.d as f64 - 2.0).sqrt() / (r.d as f64).sqrt();
            assert!(
                (r.mean_scaled - exact).abs() < 4.0 * r.stderr_scaled,
                "d={}: {} vs {}",
                r.d,
                r.mean_scaled,
                exact
            );
        }
        assert!(convergence_study(&[16, 4], 10, 9, &opts()).is_err());
    }

    #[test]
    fn pencil2d_small_degrees() {
        let config = RunConfig::new("p2-d1", 2, 1, 30, 17);
        let rec = run_pencil2d(&config, &Rp2Opts::default()).unwrap();
        assert!(rec.rows.iter().all(|r| r.count == 0));

        let config = RunConfig::new("p2-d3", 2, 3, 20, 17);
        let rec = run_pencil2d(&config, &Rp2Opts::default()).unwrap();
        for row in rec.rows.iter().filter(|r| r.excluded_reason.is_empty()) {
            assert!(row.count <= 12);
        }
    }
}
