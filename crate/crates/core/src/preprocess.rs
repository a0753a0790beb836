//! Cleaning, encoding, outlier clamping, scaling, splitting and
//! undersampling.
//!
//! Every transform parameter is fitted once and stored in a
//! [`PreprocessState`], which is then applied unchanged to any other frame
//! (test split, inference input). Fences and scales are fitted on the
//! training split only.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{mean_std, quantile, Rng};
use crate::tabular::{Column, ColumnData, ColumnKind, Frame};

// ---------------------------------------------------------------------------
// Individual operations
// ---------------------------------------------------------------------------

/// Most frequent non-missing level; ties go to the lexicographically
/// smallest level.
pub fn categorical_mode(frame: &Frame, column: &str) -> Result<String> {
    let col = frame.column(column)?;
    let ColumnData::Categorical { codes, levels } = &col.data else {
        return Err(Error::NonCategorical(column.to_string()));
    };
    let mut counts = vec![0usize; levels.len()];
    for (&c, &m) in codes.iter().zip(&col.missing) {
        if !m {
            counts[c as usize] += 1;
        }
    }
    // Levels are sorted, so the first maximum is the smallest text.
    let best = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .fold(None::<(usize, usize)>, |acc, (i, &c)| match acc {
            Some((_, bc)) if bc >= c => acc,
            _ => Some((i, c)),
        });
    best.map(|(i, _)| levels[i].clone())
        .ok_or_else(|| Error::AllMissing(column.to_string()))
}

/// Fills missing cells of a categorical column with `value`.
pub fn impute_with(frame: &Frame, column: &str, value: &str) -> Result<Frame> {
    let col = frame.column(column)?;
    if !matches!(col.data, ColumnData::Categorical { .. }) {
        return Err(Error::NonCategorical(column.to_string()));
    }
    let cells: Vec<Option<&str>> = (0..frame.n_rows())
        .map(|r| Some(col.text(r).unwrap_or(value)))
        .collect();
    frame.with_column(column, Column::categorical(&cells))
}

/// Replaces missing categorical cells by the column mode.
pub fn impute_mode(frame: &Frame, column: &str) -> Result<Frame> {
    let col = frame.column(column)?;
    if !matches!(col.data, ColumnData::Categorical { .. }) {
        return Err(Error::NonCategorical(column.to_string()));
    }
    if col.missing_count() == 0 {
        return Ok(frame.clone());
    }
    let mode = categorical_mode(frame, column)?;
    impute_with(frame, column, &mode)
}

/// Keeps the rows with no missing cell in any of `columns`, in order.
pub fn drop_missing_rows(frame: &Frame, columns: &[String]) -> Result<Frame> {
    let masks: Vec<&[bool]> = columns
        .iter()
        .map(|c| frame.column(c).map(|col| col.missing.as_slice()))
        .collect::<Result<_>>()?;
    let keep: Vec<usize> = (0..frame.n_rows())
        .filter(|&r| masks.iter().all(|m| !m[r]))
        .collect();
    Ok(frame.take(&keep))
}

/// Replaces a categorical column by integer codes assigned in lexicographic
/// order of its distinct values. Returns the code map (index = code).
pub fn encode_categorical(frame: &Frame, column: &str) -> Result<(Frame, Vec<String>)> {
    let col = frame.column(column)?;
    let ColumnData::Categorical { .. } = &col.data else {
        return Err(Error::NonCategorical(column.to_string()));
    };
    if col.missing_count() > 0 {
        return Err(Error::HasMissing(column.to_string()));
    }
    let mut levels: Vec<String> = (0..frame.n_rows())
        .filter_map(|r| col.text(r).map(str::to_string))
        .collect();
    levels.sort();
    levels.dedup();
    let out = apply_encoding(frame, column, &levels)?;
    Ok((out, levels))
}

/// Encodes with a previously fitted code map. Levels absent from the map
/// become missing cells.
pub fn apply_encoding(frame: &Frame, column: &str, levels: &[String]) -> Result<Frame> {
    let col = frame.column(column)?;
    if !matches!(col.data, ColumnData::Categorical { .. }) {
        return Err(Error::NonCategorical(column.to_string()));
    }
    let lookup: HashMap<&str, usize> = levels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut values = Vec::with_capacity(frame.n_rows());
    let mut missing = Vec::with_capacity(frame.n_rows());
    for r in 0..frame.n_rows() {
        match col.text(r).and_then(|t| lookup.get(t)) {
            Some(&code) => {
                values.push(code as f64);
                missing.push(false);
            }
            None => {
                values.push(0.0);
                missing.push(true);
            }
        }
    }
    frame.with_column(column, Column::numeric_with_mask(values, missing))
}

/// Outlier fences `(Q1 − k·IQR, Q3 + k·IQR)` over the non-missing cells.
pub fn fit_fences(frame: &Frame, column: &str, k: f64) -> Result<(f64, f64)> {
    let mut values = frame.present_values(column)?;
    if values.len() < 4 {
        return Err(Error::TooFewValues {
            column: column.to_string(),
            needed: 4,
            found: values.len(),
        });
    }
    values.sort_by(f64::total_cmp);
    let q1 = quantile(&values, 0.25)?;
    let q3 = quantile(&values, 0.75)?;
    let iqr = q3 - q1;
    Ok((q1 - k * iqr, q3 + k * iqr))
}

/// Clamps every non-missing cell into `[lo, hi]`.
pub fn winsorize(frame: &Frame, column: &str, lo: f64, hi: f64) -> Result<Frame> {
    if !(lo <= hi) {
        return Err(Error::InvalidFences { lo, hi });
    }
    let (values, missing) = frame.numeric(column)?;
    let clamped = values
        .iter()
        .zip(missing)
        .map(|(&v, &m)| if m { v } else { v.clamp(lo, hi) })
        .collect();
    frame.with_column(column, Column::numeric_with_mask(clamped, missing.to_vec()))
}

/// Maps raw labels 1 → 0 and 2 → 1 and marks 1 as the positive class.
/// Missing labels stay missing.
pub fn recode_label(frame: &Frame) -> Result<Frame> {
    recode_label_with(frame, &default_label_map())
}

fn default_label_map() -> BTreeMap<i64, i64> {
    BTreeMap::from([(1, 0), (2, 1)])
}

fn recode_label_with(frame: &Frame, map: &BTreeMap<i64, i64>) -> Result<Frame> {
    let label_name = frame.schema().label_name().to_string();
    let (values, missing) = frame.labels();
    let recoded = values
        .iter()
        .zip(missing)
        .map(|(&v, &m)| {
            if m {
                Ok(v)
            } else {
                map.get(&v).copied().ok_or(Error::UnexpectedLabelValue(v))
            }
        })
        .collect::<Result<Vec<i64>>>()?;
    let col = Column {
        data: ColumnData::Label(recoded),
        missing: missing.to_vec(),
    };
    Ok(frame.with_column(&label_name, col)?.with_label_positive(1))
}

/// Per-column z-score parameters (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub mean: f64,
    pub std: f64,
    pub constant: bool,
}

impl Scale {
    pub fn apply(&self, x: f64) -> f64 {
        if self.constant {
            0.0
        } else {
            (x - self.mean) / self.std
        }
    }

    pub fn invert(&self, z: f64) -> f64 {
        if self.constant {
            self.mean
        } else {
            z * self.std + self.mean
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub scales: BTreeMap<String, Scale>,
    pub fitted: bool,
}

pub fn fit_standardizer(train: &Frame, columns: &[String]) -> Result<Standardizer> {
    let mut scales = BTreeMap::new();
    for name in columns {
        let values = train.present_values(name)?;
        let (mean, std) = mean_std(&values).ok_or_else(|| Error::AllMissing(name.clone()))?;
        scales.insert(
            name.clone(),
            Scale {
                mean,
                std,
                constant: std == 0.0,
            },
        );
    }
    Ok(Standardizer {
        scales,
        fitted: true,
    })
}

pub fn apply_standardizer(state: &Standardizer, frame: &Frame) -> Result<Frame> {
    if !state.fitted {
        return Err(Error::NotFitted);
    }
    let mut out = frame.clone();
    for (name, scale) in &state.scales {
        let (values, missing) = out.numeric(name)?;
        let z = values
            .iter()
            .zip(missing)
            .map(|(&v, &m)| if m { v } else { scale.apply(v) })
            .collect();
        let col = Column::numeric_with_mask(z, missing.to_vec());
        out = out.with_column(name, col)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Splitting and balancing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: Frame,
    pub test: Frame,
    pub seed: u64,
    pub train_fraction: f64,
    pub warnings: Vec<String>,
}

fn class_rows(frame: &Frame) -> Result<BTreeMap<i64, Vec<usize>>> {
    let (values, missing) = frame.labels();
    let mut rows: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (r, (&v, &m)) in values.iter().zip(missing).enumerate() {
        if m {
            return Err(Error::HasMissing(frame.schema().label_name().to_string()));
        }
        rows.entry(v).or_default().push(r);
    }
    if rows.len() < 2 {
        return Err(Error::SingleClass);
    }
    Ok(rows)
}

/// Seeded train/test split. When stratified, each class is shuffled
/// separately and its first ⌊fraction·n_c⌋ rows go to train. Both outputs
/// keep the input row order.
pub fn train_test_split(
    frame: &Frame,
    train_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<SplitResult> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_fraction} outside (0, 1]"
        )));
    }
    let rows = class_rows(frame)?;
    let mut rng = Rng::new(seed);
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    let groups: Vec<Vec<usize>> = if stratified {
        rows.into_values().collect()
    } else {
        vec![(0..frame.n_rows()).collect()]
    };
    for mut group in groups {
        rng.shuffle(&mut group);
        let n_train = (train_fraction * group.len() as f64).floor() as usize;
        train_rows.extend_from_slice(&group[..n_train]);
        test_rows.extend_from_slice(&group[n_train..]);
    }
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    let mut warnings = Vec::new();
    if test_rows.is_empty() {
        let msg = format!("train fraction {train_fraction} leaves an empty test set");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(SplitResult {
        train: frame.take(&train_rows),
        test: frame.take(&test_rows),
        seed,
        train_fraction,
        warnings,
    })
}

/// Subsamples every larger class without replacement down to the size of
/// the smallest class. Row order is preserved.
pub fn random_undersample(train: &Frame, seed: u64) -> Result<Frame> {
    let rows = class_rows(train)?;
    let target = rows.values().map(Vec::len).min().unwrap_or(0);
    let mut rng = Rng::new(seed);
    let mut keep = Vec::with_capacity(target * rows.len());
    for group in rows.into_values() {
        if group.len() == target {
            keep.extend(group);
        } else {
            keep.extend(rng.sample_indices(group.len(), target).into_iter().map(|i| group[i]));
        }
    }
    keep.sort_unstable();
    Ok(train.take(&keep))
}

// ---------------------------------------------------------------------------
// Fitted pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalState {
    pub mode: String,
    /// Code map: index = integer code.
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fence {
    pub lo: f64,
    pub hi: f64,
}

/// Everything needed to replay preprocessing on new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessState {
    pub categorical: BTreeMap<String, CategoricalState>,
    pub fences: BTreeMap<String, Fence>,
    pub standardizer: Standardizer,
    pub label_map: BTreeMap<i64, i64>,
    pub iqr_multiplier: f64,
    pub fitted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
    pub iqr_multiplier: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 42,
            stratified: true,
            iqr_multiplier: 1.5,
        }
    }
}

/// Row counts at each preparation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareReport {
    pub rows_read: usize,
    pub rows_after_drop: usize,
    pub train_counts: BTreeMap<i64, usize>,
    pub test_counts: BTreeMap<i64, usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub state: PreprocessState,
    pub train: Frame,
    pub test: Frame,
    pub report: PrepareReport,
}

/// Runs the fixed preparation order: impute categoricals → drop rows with
/// missing numerics or labels → encode → recode labels → split → fit fences
/// on train and clamp both splits → fit the standardizer on train and apply
/// to both.
pub fn prepare(raw: &Frame, config: &PreprocessConfig) -> Result<Prepared> {
    let schema = raw.schema().clone();
    let categorical: Vec<String> = schema
        .columns()
        .iter()
        .filter(|c| c.kind == ColumnKind::Categorical)
        .map(|c| c.name.clone())
        .collect();
    let numeric: Vec<String> = schema
        .columns()
        .iter()
        .filter(|c| c.kind == ColumnKind::Numeric)
        .map(|c| c.name.clone())
        .collect();

    let mut frame = raw.clone();
    let mut cat_state = BTreeMap::new();
    let mut modes = BTreeMap::new();
    for name in &categorical {
        let mode = categorical_mode(&frame, name)?;
        frame = impute_with(&frame, name, &mode)?;
        modes.insert(name.clone(), mode);
    }

    let mut required = numeric.clone();
    required.push(schema.label_name().to_string());
    frame = drop_missing_rows(&frame, &required)?;
    let rows_after_drop = frame.n_rows();

    for name in &categorical {
        let (encoded, levels) = encode_categorical(&frame, name)?;
        frame = encoded;
        cat_state.insert(
            name.clone(),
            CategoricalState {
                mode: modes[name].clone(),
                levels,
            },
        );
    }
    frame = recode_label(&frame)?;

    let split = train_test_split(&frame, config.train_fraction, config.seed, config.stratified)?;
    let (mut train, mut test) = (split.train, split.test);

    let mut fences = BTreeMap::new();
    for name in &numeric {
        let (lo, hi) = fit_fences(&train, name, config.iqr_multiplier)?;
        train = winsorize(&train, name, lo, hi)?;
        test = winsorize(&test, name, lo, hi)?;
        fences.insert(name.clone(), Fence { lo, hi });
    }

    let predictors = schema.predictor_names();
    let standardizer = fit_standardizer(&train, &predictors)?;
    let train = apply_standardizer(&standardizer, &train)?;
    let test = apply_standardizer(&standardizer, &test)?;

    let report = PrepareReport {
        rows_read: raw.n_rows(),
        rows_after_drop,
        train_counts: train.class_counts(),
        test_counts: test.class_counts(),
        warnings: split.warnings,
    };
    Ok(Prepared {
        state: PreprocessState {
            categorical: cat_state,
            fences,
            standardizer,
            label_map: default_label_map(),
            iqr_multiplier: config.iqr_multiplier,
            fitted: true,
        },
        train,
        test,
        report,
    })
}

impl PreprocessState {
    /// Replays the fitted transforms on a raw frame with the training schema.
    /// Rows are never dropped; cells that cannot be transformed (missing
    /// numerics, unseen category levels) stay missing. Labels, when present,
    /// are recoded.
    pub fn apply(&self, raw: &Frame) -> Result<Frame> {
        if !self.fitted {
            return Err(Error::NotFitted);
        }
        let mut frame = raw.clone();
        for (name, cat) in &self.categorical {
            frame = impute_with(&frame, name, &cat.mode)?;
            frame = apply_encoding(&frame, name, &cat.levels)?;
        }
        frame = recode_label_with(&frame, &self.label_map)?;
        for (name, fence) in &self.fences {
            frame = winsorize(&frame, name, fence.lo, fence.hi)?;
        }
        apply_standardizer(&self.standardizer, &frame)
    }

    /// Maps a standardized value back to feature units.
    pub fn to_feature_units(&self, column: &str, z: f64) -> Option<f64> {
        self.standardizer.scales.get(column).map(|s| s.invert(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{ColumnSpec, Schema};

    fn frame_with(values: Vec<f64>, labels: Vec<i64>) -> Frame {
        let schema = Schema::new(
            vec![
                ColumnSpec::new("x", ColumnKind::Numeric),
                ColumnSpec::new("y", ColumnKind::Label),
            ],
            1,
        )
        .unwrap();
        Frame::new(schema, vec![Column::numeric(values), Column::label(labels)]).unwrap()
    }

    fn cat_frame(cells: &[Option<&str>]) -> Frame {
        let schema = Schema::new(
            vec![
                ColumnSpec::new("g", ColumnKind::Categorical),
                ColumnSpec::new("y", ColumnKind::Label),
            ],
            1,
        )
        .unwrap();
        Frame::new(
            schema,
            vec![Column::categorical(cells), Column::label(vec![1; cells.len()])],
        )
        .unwrap()
    }

    #[test]
    fn impute_unique_mode() {
        let f = impute_mode(&cat_frame(&[Some("M"), Some("F"), Some("F"), None]), "g").unwrap();
        let col = f.column("g").unwrap();
        assert_eq!(col.text(3), Some("F"));
        assert_eq!(col.missing_count(), 0);
    }

    #[test]
    fn impute_tie_breaks_lexicographically() {
        let f = impute_mode(&cat_frame(&[Some("M"), Some("F"), None]), "g").unwrap();
        assert_eq!(f.column("g").unwrap().text(2), Some("F"));
    }

    #[test]
    fn impute_without_missing_is_identity() {
        let f0 = cat_frame(&[Some("M"), Some("F")]);
        let f = impute_mode(&f0, "g").unwrap();
        assert_eq!(f.columns(), f0.columns());
    }

    #[test]
    fn impute_errors() {
        assert!(matches!(impute_mode(&cat_frame(&[None, None]), "g"), Err(Error::AllMissing(_))));
        assert!(matches!(
            impute_mode(&frame_with(vec![1.0], vec![1]), "x"),
            Err(Error::NonCategorical(_))
        ));
    }

    #[test]
    fn drop_rows_with_missing() {
        let schema = Schema::new(
            vec![
                ColumnSpec::new("x", ColumnKind::Numeric),
                ColumnSpec::new("y", ColumnKind::Label),
            ],
            1,
        )
        .unwrap();
        let f = Frame::new(
            schema,
            vec![
                Column::numeric_with_mask(vec![1., 2., 3., 4., 5.], vec![false, true, false, true, false]),
                Column::label(vec![1, 2, 1, 2, 1]),
            ],
        )
        .unwrap();
        let out = drop_missing_rows(&f, &["x".into()]).unwrap();
        assert_eq!(out.n_rows(), 3);
        assert_eq!(out.numeric("x").unwrap().0, &[1.0, 3.0, 5.0]);
        assert!(matches!(drop_missing_rows(&f, &["nope".into()]), Err(Error::UnknownColumn(_))));
        let clean = frame_with(vec![1.0, 2.0], vec![1, 2]);
        assert_eq!(drop_missing_rows(&clean, &["x".into()]).unwrap().n_rows(), 2);
    }

    #[test]
    fn encode_lexicographic() {
        let (f, map) = encode_categorical(&cat_frame(&[Some("Male"), Some("Female"), Some("Male")]), "g").unwrap();
        assert_eq!(map, vec!["Female".to_string(), "Male".to_string()]);
        assert_eq!(f.numeric("g").unwrap().0, &[1.0, 0.0, 1.0]);
        assert_eq!(f.schema().columns()[0].kind, ColumnKind::Numeric);

        let (f, _) = encode_categorical(&cat_frame(&[Some("X"), Some("X")]), "g").unwrap();
        assert_eq!(f.numeric("g").unwrap().0, &[0.0, 0.0]);

        assert!(matches!(
            encode_categorical(&frame_with(vec![1.0], vec![1]), "x"),
            Err(Error::NonCategorical(_))
        ));
        assert!(matches!(
            encode_categorical(&cat_frame(&[Some("X"), None]), "g"),
            Err(Error::HasMissing(_))
        ));
    }

    #[test]
    fn fences_examples() {
        let f = frame_with(vec![1.0, 2.0, 3.0, 4.0, 100.0], vec![1; 5]);
        assert_eq!(fit_fences(&f, "x", 1.5).unwrap(), (-1.0, 7.0));
        assert_eq!(fit_fences(&f, "x", 0.0).unwrap(), (2.0, 4.0));
        let c = frame_with(vec![5.0; 4], vec![1; 4]);
        assert_eq!(fit_fences(&c, "x", 1.5).unwrap(), (5.0, 5.0));
        let short = frame_with(vec![1.0, 2.0, 3.0], vec![1; 3]);
        assert!(matches!(fit_fences(&short, "x", 1.5), Err(Error::TooFewValues { .. })));
    }

    #[test]
    fn winsorize_examples() {
        let f = frame_with(vec![1.0, 2.0, 3.0, 4.0, 100.0], vec![1; 5]);
        let w = winsorize(&f, "x", -1.0, 7.0).unwrap();
        assert_eq!(w.numeric("x").unwrap().0, &[1.0, 2.0, 3.0, 4.0, 7.0]);
        let again = winsorize(&w, "x", -1.0, 7.0).unwrap();
        assert_eq!(again.numeric("x").unwrap().0, w.numeric("x").unwrap().0);
        let inside = winsorize(&f, "x", 0.0, 1000.0).unwrap();
        assert_eq!(inside.numeric("x").unwrap().0, f.numeric("x").unwrap().0);
        let collapsed = winsorize(&f, "x", 5.0, 5.0).unwrap();
        assert!(collapsed.numeric("x").unwrap().0.iter().all(|&v| v == 5.0));
        assert!(matches!(winsorize(&f, "x", 2.0, 1.0), Err(Error::InvalidFences { .. })));
    }

    #[test]
    fn recode_examples() {
        let f = recode_label(&frame_with(vec![0.0; 3], vec![1, 2, 1])).unwrap();
        assert_eq!(f.labels().0, &[0, 1, 0]);
        assert_eq!(f.schema().label_positive(), 1);
        assert!(matches!(
            recode_label(&frame_with(vec![0.0; 2], vec![0, 1])),
            Err(Error::UnexpectedLabelValue(0))
        ));
        let empty = frame_with(vec![], vec![]);
        assert_eq!(recode_label(&empty).unwrap().n_rows(), 0);
    }

    #[test]
    fn standardizer_examples() {
        let train = frame_with(vec![1.0, 3.0], vec![0, 1]);
        let st = fit_standardizer(&train, &["x".into()]).unwrap();
        let s = &st.scales["x"];
        assert_eq!((s.mean, s.std), (2.0, 1.0));
        let out = apply_standardizer(&st, &frame_with(vec![2.0], vec![0])).unwrap();
        assert_eq!(out.numeric("x").unwrap().0, &[0.0]);

        let constant = frame_with(vec![4.0; 3], vec![0, 1, 0]);
        let st = fit_standardizer(&constant, &["x".into()]).unwrap();
        assert!(st.scales["x"].constant);
        let out = apply_standardizer(&st, &frame_with(vec![1.0, 9.0], vec![0, 1])).unwrap();
        assert_eq!(out.numeric("x").unwrap().0, &[0.0, 0.0]);

        assert!(matches!(
            apply_standardizer(&Standardizer::default(), &train),
            Err(Error::NotFitted)
        ));
    }

    #[test]
    fn standardized_train_has_unit_moments() {
        let mut rng = Rng::new(11);
        let values: Vec<f64> = (0..500).map(|_| 3.0 + 7.0 * rng.normal()).collect();
        let train = frame_with(values, vec![0; 500]);
        let st = fit_standardizer(&train, &["x".into()]).unwrap();
        let z = apply_standardizer(&st, &train).unwrap();
        let (m, s) = mean_std(z.numeric("x").unwrap().0).unwrap();
        assert!(m.abs() < 1e-12);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_floor_rule() {
        let f = frame_with((0..10).map(f64::from).collect(), [vec![0; 8], vec![1; 2]].concat());
        let s = train_test_split(&f, 0.8, 42, true).unwrap();
        assert_eq!(s.train.class_counts(), BTreeMap::from([(0, 6), (1, 1)]));
        assert_eq!(s.test.class_counts(), BTreeMap::from([(0, 2), (1, 1)]));
        let again = train_test_split(&f, 0.8, 42, true).unwrap();
        assert_eq!(s.train.numeric("x").unwrap().0, again.train.numeric("x").unwrap().0);
    }

    #[test]
    fn split_full_fraction_warns() {
        let f = frame_with(vec![0.0; 4], vec![0, 0, 1, 1]);
        let s = train_test_split(&f, 1.0, 1, true).unwrap();
        assert_eq!(s.test.n_rows(), 0);
        assert_eq!(s.warnings.len(), 1);
        let single = frame_with(vec![0.0; 3], vec![1, 1, 1]);
        assert!(matches!(train_test_split(&single, 0.8, 1, true), Err(Error::SingleClass)));
    }

    #[test]
    fn undersample_examples() {
        let f = frame_with((0..4).map(f64::from).collect(), vec![0, 0, 0, 1]);
        let u = random_undersample(&f, 3).unwrap();
        assert_eq!(u.class_counts(), BTreeMap::from([(0, 1), (1, 1)]));

        let balanced = frame_with((0..4).map(f64::from).collect(), vec![0, 1, 0, 1]);
        let u = random_undersample(&balanced, 3).unwrap();
        assert_eq!(u.numeric("x").unwrap().0, balanced.numeric("x").unwrap().0);

        let single = frame_with(vec![0.0; 2], vec![1, 1]);
        assert!(matches!(random_undersample(&single, 0), Err(Error::SingleClass)));
    }

    #[test]
    fn state_apply_requires_fit() {
        let state = PreprocessState {
            categorical: BTreeMap::new(),
            fences: BTreeMap::new(),
            standardizer: Standardizer::default(),
            label_map: default_label_map(),
            iqr_multiplier: 1.5,
            fitted: false,
        };
        assert!(matches!(state.apply(&frame_with(vec![1.0], vec![1])), Err(Error::NotFitted)));
    }
}
