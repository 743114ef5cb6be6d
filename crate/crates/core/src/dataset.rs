//! Labelled datasets with provenance, deduplicated growth and CSV storage.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// Default max-norm distance under which two inputs count as the same point.
pub const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: {message}")]
    Malformed { row: u64, message: String },
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("non-finite value in data point")]
    NonFinite,
    #[error("header must name at least one variable and a label column")]
    BadHeader,
}

/// Where a data point came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Provenance {
    Original,
    /// Derived from an existing point through the named truth, in the given
    /// generation of a run.
    Generated { truth_id: String, generation: usize },
}

impl Provenance {
    pub fn generated(truth_id: impl Into<String>, generation: usize) -> Provenance {
        Provenance::Generated {
            truth_id: truth_id.into(),
            generation,
        }
    }

    pub fn is_original(&self) -> bool {
        matches!(self, Provenance::Original)
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Original => f.write_str("original"),
            Provenance::Generated {
                truth_id,
                generation,
            } => write!(f, "gen:{truth_id}:{generation}"),
        }
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "original" {
            return Ok(Provenance::Original);
        }
        let rest = s
            .strip_prefix("gen:")
            .ok_or_else(|| format!("bad provenance `{s}`"))?;
        let (truth_id, generation) = rest
            .rsplit_once(':')
            .ok_or_else(|| format!("bad provenance `{s}`"))?;
        let generation = generation
            .parse()
            .map_err(|_| format!("bad generation in provenance `{s}`"))?;
        Ok(Provenance::generated(truth_id, generation))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub inputs: Vec<f64>,
    pub label: f64,
    pub provenance: Provenance,
}

impl DataPoint {
    pub fn original(inputs: Vec<f64>, label: f64) -> DataPoint {
        DataPoint {
            inputs,
            label,
            provenance: Provenance::Original,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.label.is_finite() && self.inputs.iter().all(|x| x.is_finite())
    }

    fn distance(&self, other: &[f64]) -> f64 {
        self.inputs
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Anything that can label inputs drawn from per-variable ranges.
pub trait Oracle {
    fn variable_names(&self) -> &[String];
    fn sampling_ranges(&self) -> &[(f64, f64)];
    /// Ground-truth label, or `None` where the function is singular.
    fn label(&self, inputs: &[f64]) -> Option<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    points: Vec<DataPoint>,
}

/// CSV output switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    pub strip_provenance: bool,
}

/// Fixed, distinct weights in [1, 2) used to index points for dedup.
fn projection_weights(arity: usize) -> Vec<f64> {
    const PHI: f64 = 1.618_033_988_749_895;
    (1..=arity).map(|i| 1.0 + (i as f64 * PHI).fract()).collect()
}

/// Weighted sum of the inputs and the rounding slack for comparing it.
fn project(inputs: &[f64]) -> (f64, f64) {
    let w = projection_weights(inputs.len());
    let key = inputs.iter().zip(&w).map(|(x, w)| x * w).sum();
    let magnitude: f64 = inputs.iter().zip(&w).map(|(x, w)| (x * w).abs()).sum();
    (key, 1e-12 * magnitude)
}

impl Dataset {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Dataset {
        Dataset {
            names: names.into_iter().map(Into::into).collect(),
            points: Vec::new(),
        }
    }

    pub fn from_points<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        points: Vec<DataPoint>,
    ) -> Result<Dataset, DatasetError> {
        let mut ds = Dataset::new(names);
        for p in points {
            ds.push(p)?;
        }
        Ok(ds)
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count_original(&self) -> usize {
        self.points.iter().filter(|p| p.provenance.is_original()).count()
    }

    pub fn count_generated(&self) -> usize {
        self.len() - self.count_original()
    }

    fn check(&self, p: &DataPoint) -> Result<(), DatasetError> {
        if p.inputs.len() != self.arity() {
            return Err(DatasetError::Arity {
                expected: self.arity(),
                got: p.inputs.len(),
            });
        }
        if !p.is_finite() {
            return Err(DatasetError::NonFinite);
        }
        Ok(())
    }

    /// Appends without deduplication.
    pub fn push(&mut self, p: DataPoint) -> Result<(), DatasetError> {
        self.check(&p)?;
        self.points.push(p);
        Ok(())
    }

    /// Keeps the first `n` points.
    pub fn truncate(&mut self, n: usize) {
        self.points.truncate(n);
    }

    /// Input columns, one vector per variable.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.arity())
            .map(|j| self.points.iter().map(|p| p.inputs[j]).collect())
            .collect()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.label).collect()
    }

    /// Appends each point whose inputs are farther than `tol` (max-norm) from
    /// every point already present, including ones accepted earlier in the
    /// same call. Returns how many were appended. Fails without modifying the
    /// dataset if any point has the wrong arity or a non-finite value.
    pub fn append_dedup(&mut self, points: Vec<DataPoint>, tol: f64) -> Result<usize, DatasetError> {
        self.append_dedup_limited(points, tol, usize::MAX)
    }

    /// Like [`Dataset::append_dedup`], but stops once `limit` points have
    /// been appended.
    pub fn append_dedup_limited(
        &mut self,
        points: Vec<DataPoint>,
        tol: f64,
        limit: usize,
    ) -> Result<usize, DatasetError> {
        for p in &points {
            self.check(p)?;
        }
        if points.is_empty() {
            return Ok(0);
        }
        // Points within tol in max-norm have projections within tol * sum(w).
        let radius = tol * projection_weights(self.arity()).iter().sum::<f64>();
        let mut keys: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (project(&p.inputs).0, i))
            .collect();
        keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut appended = 0;
        for p in points {
            if appended >= limit {
                break;
            }
            let (x0, slack) = project(&p.inputs);
            let window = radius + slack;
            let near = if (x0 - window).is_finite() && (x0 + window).is_finite() {
                let start = keys.partition_point(|(k, _)| *k < x0 - window);
                let end = keys.partition_point(|(k, _)| *k <= x0 + window);
                &keys[start..end.max(start)]
            } else {
                &keys[..]
            };
            let clash = near
                .iter()
                .any(|&(_, i)| self.points[i].distance(&p.inputs) <= tol);
            if clash {
                continue;
            }
            let at = keys.partition_point(|(k, _)| *k <= x0);
            keys.insert(at, (x0, self.points.len()));
            self.points.push(p);
            appended += 1;
        }
        Ok(appended)
    }

    /// Draws `n` original points uniformly from the oracle's ranges,
    /// redrawing any input where the oracle is singular.
    pub fn sample_from_oracle<O: Oracle + ?Sized, R: Rng + ?Sized>(
        oracle: &O,
        n: usize,
        rng: &mut R,
    ) -> Dataset {
        let ranges = oracle.sampling_ranges();
        let mut ds = Dataset::new(oracle.variable_names().iter().cloned());
        let mut attempts = 0usize;
        while ds.len() < n {
            attempts += 1;
            assert!(
                attempts < 1000 * (n + 10),
                "oracle is singular almost everywhere on its sampling ranges"
            );
            let x: Vec<f64> = ranges.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
            if let Some(y) = oracle.label(&x).filter(|y| y.is_finite()) {
                ds.points.push(DataPoint::original(x, y));
            }
        }
        ds
    }

    pub fn write_csv<W: Write>(&self, writer: W, options: CsvOptions) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.names.clone();
        header.push("y".into());
        if !options.strip_provenance {
            header.push("provenance".into());
        }
        w.write_record(&header)?;
        for p in &self.points {
            let mut row: Vec<String> = p.inputs.iter().map(|x| format_value(*x)).collect();
            row.push(format_value(p.label));
            if !options.strip_provenance {
                row.push(p.provenance.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, options: CsvOptions) -> Result<(), DatasetError> {
        self.write_csv(File::create(path)?, options)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Dataset, DatasetError> {
        let mut r = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let has_provenance = header.last().is_some_and(|h| h == "provenance");
        let data_cols = header.len() - usize::from(has_provenance);
        if data_cols < 2 {
            return Err(DatasetError::BadHeader);
        }
        let mut ds = Dataset::new(header[..data_cols - 1].iter().cloned());
        for record in r.records() {
            let record = record?;
            let row = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(DatasetError::Malformed {
                    row,
                    message: format!("expected {} cells, found {}", header.len(), record.len()),
                });
            }
            let mut values = Vec::with_capacity(data_cols);
            for (j, cell) in record.iter().take(data_cols).enumerate() {
                let v: f64 = cell.parse().map_err(|_| DatasetError::Malformed {
                    row,
                    message: format!("column `{}`: `{cell}` is not a number", header[j]),
                })?;
                if !v.is_finite() {
                    return Err(DatasetError::Malformed {
                        row,
                        message: format!("column `{}` is not finite", header[j]),
                    });
                }
                values.push(v);
            }
            let provenance = if has_provenance {
                record[data_cols]
                    .parse()
                    .map_err(|message| DatasetError::Malformed { row, message })?
            } else {
                Provenance::Original
            };
            let label = values.pop().expect("label column");
            ds.points.push(DataPoint {
                inputs: values,
                label,
                provenance,
            });
        }
        Ok(ds)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
        Dataset::read_csv(File::open(path)?)
    }
}

/// 17 significant digits, enough to round-trip any finite double.
fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_vars() -> Dataset {
        Dataset::new(["r1", "r2"])
    }

    #[test]
    fn worked_example_row_loads_as_original() {
        let ds = Dataset::read_csv("r1,r2,y\n12,0,0\n".as_bytes()).unwrap();
        assert_eq!(ds.names(), ["r1", "r2"]);
        assert_eq!(ds.points(), [DataPoint::original(vec![12.0, 0.0], 0.0)]);
    }

    #[test]
    fn short_row_reports_its_line() {
        let err = Dataset::read_csv("a,b,y\n1,2,3\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Malformed { row: 3, .. }), "{err}");
        let err = Dataset::read_csv("a,b,y\n1,x,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::Malformed { row: 2, .. }), "{err}");
    }

    #[test]
    fn csv_round_trip_keeps_bits_and_provenance() {
        let mut ds = two_vars();
        ds.push(DataPoint::original(vec![0.1, 1.0 / 3.0], -2.5e-300)).unwrap();
        ds.push(DataPoint {
            inputs: vec![-0.0, 7.0],
            label: 0.0,
            provenance: Provenance::generated("zero_r1_r2", 4),
        })
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf, CsvOptions::default()).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.points()[1].inputs[0].to_bits(), (-0.0f64).to_bits());

        let mut stripped = Vec::new();
        ds.write_csv(&mut stripped, CsvOptions { strip_provenance: true }).unwrap();
        let text = String::from_utf8(stripped).unwrap();
        assert!(text.lines().all(|l| l.split(',').count() == 3));
    }

    #[test]
    fn swapped_point_is_new() {
        let mut ds = two_vars();
        ds.push(DataPoint::original(vec![2.0, 3.0], 4.0)).unwrap();
        let n = ds
            .append_dedup(
                vec![DataPoint {
                    inputs: vec![3.0, 2.0],
                    label: 4.0,
                    provenance: Provenance::generated("sym", 0),
                }],
                DEDUP_TOL,
            )
            .unwrap();
        assert_eq!(n, 1);
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn duplicates_are_dropped() {
        let mut ds = two_vars();
        ds.push(DataPoint::original(vec![2.0, 3.0], 4.0)).unwrap();
        assert_eq!(
            ds.append_dedup(vec![DataPoint::original(vec![2.0, 3.0 + 1e-12], 4.0)], DEDUP_TOL)
                .unwrap(),
            0
        );
        let fresh = DataPoint::original(vec![5.0, 5.0], 1.0);
        assert_eq!(
            ds.append_dedup(vec![fresh.clone(), fresh], DEDUP_TOL).unwrap(),
            1
        );
        assert_eq!(ds.len(), 2);
    }

    #[test]
    fn arity_mismatch_leaves_dataset_untouched() {
        let mut ds = two_vars();
        let err = ds
            .append_dedup(
                vec![
                    DataPoint::original(vec![1.0, 2.0], 0.0),
                    DataPoint::original(vec![1.0], 0.0),
                ],
                DEDUP_TOL,
            )
            .unwrap_err();
        assert!(matches!(err, DatasetError::Arity { expected: 2, got: 1 }));
        assert!(ds.is_empty());
    }

    #[test]
    fn provenance_text_round_trips() {
        for p in [Provenance::Original, Provenance::generated("guard_1", 12)] {
            assert_eq!(p.to_string().parse::<Provenance>().unwrap(), p);
        }
        assert!("gen:x".parse::<Provenance>().is_err());
    }

    struct Product {
        names: Vec<String>,
        ranges: Vec<(f64, f64)>,
    }

    impl Oracle for Product {
        fn variable_names(&self) -> &[String] {
            &self.names
        }
        fn sampling_ranges(&self) -> &[(f64, f64)] {
            &self.ranges
        }
        fn label(&self, x: &[f64]) -> Option<f64> {
            // Singular on half the domain to exercise redraws.
            (x[0] > 0.0).then(|| x[0] * x[1])
        }
    }

    #[test]
    fn oracle_sampling_is_seeded_and_skips_singular_points() {
        let oracle = Product {
            names: vec!["a".into(), "b".into()],
            ranges: vec![(-1.0, 1.0), (1.0, 5.0)],
        };
        let a = Dataset::sample_from_oracle(&oracle, 50, &mut ChaCha8Rng::seed_from_u64(1));
        let b = Dataset::sample_from_oracle(&oracle, 50, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        assert!(a.points().iter().all(|p| p.inputs[0] > 0.0 && p.label == p.inputs[0] * p.inputs[1]));
        assert_eq!(a.count_original(), 50);
    }
}
