//! Station regression models and chained heat-quantity prediction.
//!
//! Three dense networks mirror the station's measured quantities: the
//! primary-side temperature difference (TDP), the secondary supply water
//! temperature (SWTS), and the secondary-side temperature difference (TDS).
//! A quadratic pump polynomial maps circulating-pump frequency to secondary
//! flow. Chained together they predict both heat quantities from the
//! controls, standing in for the plant wherever the real system would be too
//! expensive to query.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{split_7_1, Dataset, Sample};
use crate::neural::{
    backward_mse, load_mlp, mse_mae, optim_step, save_mlp, Activation, Matrix, Mlp, OptimState,
};
use crate::{Error, Result};

/// Which station quantity a regressor predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurrogateKind {
    Tdp,
    Swts,
    Tds,
}

impl SurrogateKind {
    pub const ALL: [SurrogateKind; 3] = [SurrogateKind::Tdp, SurrogateKind::Swts, SurrogateKind::Tds];

    pub fn name(self) -> &'static str {
        match self {
            SurrogateKind::Tdp => "tdp",
            SurrogateKind::Swts => "swts",
            SurrogateKind::Tds => "tds",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tdp" => Ok(SurrogateKind::Tdp),
            "swts" => Ok(SurrogateKind::Swts),
            "tds" => Ok(SurrogateKind::Tds),
            other => Err(Error::Parse(format!("unknown surrogate kind `{other}`"))),
        }
    }

    /// The model's inputs, exactly as recorded in the dataset.
    pub fn inputs(self, s: &Sample) -> [f64; 3] {
        match self {
            SurrogateKind::Tdp => [s.flow1, s.flow2, s.t1_supply],
            SurrogateKind::Swts => [s.t1_supply, s.flow1, s.flow2],
            SurrogateKind::Tds => [s.swts, s.flow2, s.t_out],
        }
    }

    pub fn target(self, s: &Sample) -> f64 {
        match self {
            SurrogateKind::Tdp => s.tdp,
            SurrogateKind::Swts => s.swts,
            SurrogateKind::Tds => s.tds,
        }
    }
}

/// Per-column normalization statistics, computed from a training split only.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormStats {
    pub fn from_matrix(m: &Matrix) -> Self {
        let cols = m.cols();
        let n = m.rows().max(1) as f64;
        let mut mean = vec![0.0; cols];
        let mut min = vec![f64::INFINITY; cols];
        let mut max = vec![f64::NEG_INFINITY; cols];
        for r in 0..m.rows() {
            for (c, &v) in m.row(r).iter().enumerate() {
                mean[c] += v;
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
            }
        }
        for v in mean.iter_mut() {
            *v /= n;
        }
        let mut var = vec![0.0; cols];
        for r in 0..m.rows() {
            for (c, &v) in m.row(r).iter().enumerate() {
                var[c] += (v - mean[c]) * (v - mean[c]);
            }
        }
        let std = var
            .iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        NormStats { mean, std, min, max }
    }

    pub fn normalize_row(&self, row: &mut [f64]) {
        for (c, v) in row.iter_mut().enumerate() {
            *v = (*v - self.mean[c]) / self.std[c];
        }
    }

    pub fn normalize(&self, m: &Matrix) -> Matrix {
        let mut out = m.clone();
        for r in 0..out.rows() {
            self.normalize_row(out.row_mut(r));
        }
        out
    }

    /// True when every coordinate lies within the observed range extended by
    /// `slack` times the range width on each side.
    pub fn within_range(&self, row: &[f64], slack: f64) -> bool {
        row.iter().enumerate().all(|(c, &v)| {
            let width = (self.max[c] - self.min[c]).max(1e-12);
            v >= self.min[c] - slack * width && v <= self.max[c] + slack * width
        })
    }
}

/// A trained single-output regressor plus its input normalization.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub net: Mlp,
    pub stats: NormStats,
}

impl FittedModel {
    pub fn predict(&self, raw_inputs: &[f64]) -> f64 {
        let mut row = raw_inputs.to_vec();
        self.stats.normalize_row(&mut row);
        self.net.forward_single(&row).expect("input dim checked at fit time")[0]
    }
}

const BATCH_SIZE: usize = 64;
const LEARNING_RATE: f64 = 1e-3;

/// Mini-batch MSE regression with z-scored inputs. Returns the fitted model;
/// targets stay in their raw units.
pub fn fit_regression(
    inputs: &Matrix,
    targets: &Matrix,
    hidden: &[usize],
    steps: usize,
    seed: u64,
) -> Result<FittedModel> {
    if inputs.rows() == 0 {
        return Err(Error::EmptyBatch);
    }
    if steps == 0 {
        return Err(Error::InvalidInput("need at least one training step".into()));
    }
    let stats = NormStats::from_matrix(inputs);
    let x = stats.normalize(inputs);

    let mut sizes = vec![inputs.cols()];
    sizes.extend_from_slice(hidden);
    sizes.push(targets.cols());
    let mut net = Mlp::new(&sizes, Activation::Relu, Activation::Identity, seed)?;
    let mut opt = OptimState::new(&net, LEARNING_RATE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ba7c);

    let n = x.rows();
    let bs = BATCH_SIZE.min(n);
    let mut bx = Matrix::zeros(bs, x.cols());
    let mut by = Matrix::zeros(bs, targets.cols());
    for _ in 0..steps {
        for b in 0..bs {
            let i = rng.gen_range(0..n);
            bx.row_mut(b).copy_from_slice(x.row(i));
            by.row_mut(b).copy_from_slice(targets.row(i));
        }
        let (_, grads) = backward_mse(&net, &bx, &by)?;
        optim_step(&mut net, &grads, &mut opt)?;
    }
    Ok(FittedModel { net, stats })
}

fn kind_matrices(ds: &Dataset, kind: SurrogateKind) -> Result<(Matrix, Matrix)> {
    if ds.is_empty() {
        return Err(Error::Schema(format!(
            "no rows available for the {} model",
            kind.name()
        )));
    }
    let rows: Vec<Vec<f64>> = ds.samples.iter().map(|s| kind.inputs(s).to_vec()).collect();
    let targets: Vec<Vec<f64>> = ds.samples.iter().map(|s| vec![kind.target(s)]).collect();
    Ok((Matrix::from_rows(&rows)?, Matrix::from_rows(&targets)?))
}

/// Trains one station model on the 7+1 train split and reports MSE/MAE on
/// the held-out test split.
pub fn fit_surrogate(
    ds: &Dataset,
    kind: SurrogateKind,
    arch: (usize, usize),
    steps: usize,
    seed: u64,
) -> Result<(FittedModel, f64, f64)> {
    let (train, test) = split_7_1(ds);
    if train.is_empty() || test.is_empty() {
        return Err(Error::Schema(
            "dataset too short for a 7+1 train/test split".into(),
        ));
    }
    let (x_train, y_train) = kind_matrices(&train, kind)?;
    let hidden = vec![arch.1; arch.0];
    let model = fit_regression(&x_train, &y_train, &hidden, steps, seed)?;

    let (x_test, y_test) = kind_matrices(&test, kind)?;
    let pred = model.net.forward(&model.stats.normalize(&x_test))?;
    let (mse, mae) = mse_mae(&pred, &y_test)?;
    Ok((model, mse, mae))
}

/// One architecture tried during the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub layers: usize,
    pub nodes: usize,
    pub final_loss: f64,
    pub wall_secs: f64,
}

/// All swept architectures plus the index picked by the selection rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchSweepResult {
    pub entries: Vec<SweepEntry>,
    pub chosen: usize,
}

/// Trains every grid point for `steps_per_arch` steps and applies the
/// speed/accuracy trade-off rule: among architectures no slower than 1.5x
/// the fastest, pick the smallest loss; ties go to the smaller network.
pub fn arch_sweep(
    ds: &Dataset,
    kind: SurrogateKind,
    grid: &[(usize, usize)],
    steps_per_arch: usize,
    seed: u64,
) -> Result<ArchSweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty architecture grid".into()));
    }
    let (train, _) = split_7_1(ds);
    if train.is_empty() {
        return Err(Error::Schema("dataset too short for a train split".into()));
    }
    let (x_train, y_train) = kind_matrices(&train, kind)?;

    let mut entries = Vec::with_capacity(grid.len());
    for &(layers, nodes) in grid {
        let start = Instant::now();
        let hidden = vec![nodes; layers];
        let model = fit_regression(&x_train, &y_train, &hidden, steps_per_arch, seed)?;
        let wall_secs = start.elapsed().as_secs_f64();
        let pred = model.net.forward(&model.stats.normalize(&x_train))?;
        let (final_loss, _) = mse_mae(&pred, &y_train)?;
        entries.push(SweepEntry {
            layers,
            nodes,
            final_loss,
            wall_secs,
        });
    }

    let fastest = entries
        .iter()
        .map(|e| e.wall_secs)
        .fold(f64::INFINITY, f64::min);
    let chosen = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.wall_secs <= 1.5 * fastest)
        .min_by(|(_, a), (_, b)| {
            (a.final_loss, a.nodes, a.layers)
                .partial_cmp(&(b.final_loss, b.nodes, b.layers))
                .unwrap()
        })
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(ArchSweepResult { entries, chosen })
}

/// Least-squares quadratic fit of pump frequency to flow. Solved in a
/// centered basis to keep the normal equations well conditioned.
pub fn fit_pump_poly(samples: &[(f64, f64)]) -> Result<[f64; 3]> {
    let mut distinct: Vec<f64> = samples.iter().map(|&(f, _)| f).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::RankDeficient(format!(
            "quadratic fit needs 3 distinct frequencies, got {}",
            distinct.len()
        )));
    }
    let m = samples.iter().map(|&(f, _)| f).sum::<f64>() / samples.len() as f64;

    // Normal equations over {1, g, g^2} with g = f - m.
    let mut a = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for &(f, y) in samples {
        let g = f - m;
        let basis = [1.0, g, g * g];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * y;
        }
    }

    // Gaussian elimination with partial pivoting.
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        if a[col][col].abs() < 1e-12 {
            return Err(Error::RankDeficient("singular normal equations".into()));
        }
        for row in col + 1..3 {
            let w = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= w * a[col][k];
            }
            rhs[row] -= w * rhs[col];
        }
    }
    let mut b = [0.0f64; 3];
    for row in (0..3).rev() {
        let mut v = rhs[row];
        for k in row + 1..3 {
            v -= a[row][k] * b[k];
        }
        b[row] = v / a[row][row];
    }

    // Expand back to the uncentered basis: a2 f^2 + a1 f + a0.
    let a2 = b[2];
    let a1 = b[1] - 2.0 * b[2] * m;
    let a0 = b[0] - b[1] * m + b[2] * m * m;
    Ok([a2, a1, a0])
}

/// The three chained models plus the pump polynomial.
#[derive(Debug, Clone)]
pub struct SurrogateSet {
    pub tdp: FittedModel,
    pub swts: FittedModel,
    pub tds: FittedModel,
    pub pump_coeffs: [f64; 3],
    /// Specific heat used to convert temperature differences to heat.
    pub c: f64,
}

/// Chained prediction output.
#[derive(Debug, Clone, PartialEq)]
pub struct QPrediction {
    pub q1: f64,
    pub q2: f64,
    pub flow2: f64,
    pub swts: f64,
    pub tdp: f64,
    pub tds: f64,
    /// Set when any model input fell outside its training range +-20%.
    pub extrapolated: bool,
}

/// Slack fraction beyond the observed training range before predictions are
/// flagged as extrapolation.
const EXTRAPOLATION_SLACK: f64 = 0.2;

/// Predicts both heat quantities from the controls by chaining the models:
/// pump polynomial, SWTS, then TDP/TDS. Negative predicted temperature
/// differences clamp to zero.
pub fn predict_q(
    set: &SurrogateSet,
    t1_supply: f64,
    t_out: f64,
    flow1: f64,
    pump_f: f64,
) -> Result<QPrediction> {
    let flow2 = crate::plant::pump_flow(set.pump_coeffs, pump_f)?;

    let swts_in = [t1_supply, flow1, flow2];
    let tdp_in = [flow1, flow2, t1_supply];
    let swts = set.swts.predict(&swts_in);
    let tdp = set.tdp.predict(&tdp_in).max(0.0);
    let tds_in = [swts, flow2, t_out];
    let tds = set.tds.predict(&tds_in).max(0.0);

    let extrapolated = !set.swts.stats.within_range(&swts_in, EXTRAPOLATION_SLACK)
        || !set.tdp.stats.within_range(&tdp_in, EXTRAPOLATION_SLACK)
        || !set.tds.stats.within_range(&tds_in, EXTRAPOLATION_SLACK);

    Ok(QPrediction {
        q1: set.c * flow1 * tdp,
        q2: set.c * flow2 * tds,
        flow2,
        swts,
        tdp,
        tds,
        extrapolated,
    })
}

/// Fits all three station models and the pump polynomial from one dataset.
/// Returns the set plus per-model (mse, mae) on the held-out split.
pub fn fit_surrogate_set(
    ds: &Dataset,
    arch: (usize, usize),
    steps: usize,
    seed: u64,
    c: f64,
) -> Result<(SurrogateSet, Vec<(SurrogateKind, f64, f64)>)> {
    let mut metrics = Vec::new();
    let mut models = Vec::new();
    for (i, kind) in SurrogateKind::ALL.iter().enumerate() {
        let (model, mse, mae) = fit_surrogate(ds, *kind, arch, steps, seed.wrapping_add(i as u64))?;
        metrics.push((*kind, mse, mae));
        models.push(model);
    }
    let pump_samples: Vec<(f64, f64)> = ds.samples.iter().map(|s| (s.pump_f, s.flow2)).collect();
    let pump_coeffs = fit_pump_poly(&pump_samples)?;
    let mut it = models.into_iter();
    Ok((
        SurrogateSet {
            tdp: it.next().unwrap(),
            swts: it.next().unwrap(),
            tds: it.next().unwrap(),
            pump_coeffs,
            c,
        },
        metrics,
    ))
}

fn stats_to_manifest(out: &mut String, prefix: &str, stats: &NormStats) {
    for (name, arr) in [
        ("mean", &stats.mean),
        ("std", &stats.std),
        ("min", &stats.min),
        ("max", &stats.max),
    ] {
        let vals: Vec<String> = arr.iter().map(|v| format!("{v}")).collect();
        out.push_str(&format!("{prefix}.{name} = {}\n", vals.join(" ")));
    }
}

fn stats_from_manifest(map: &BTreeMap<String, String>, prefix: &str) -> Result<NormStats> {
    let get = |name: &str| -> Result<Vec<f64>> {
        let key = format!("{prefix}.{name}");
        let raw = map
            .get(&key)
            .ok_or_else(|| Error::Schema(format!("manifest missing `{key}`")))?;
        raw.split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value in `{key}`")))
            })
            .collect()
    };
    Ok(NormStats {
        mean: get("mean")?,
        std: get("std")?,
        min: get("min")?,
        max: get("max")?,
    })
}

/// Persists the set as three model files plus a text manifest.
pub fn save_surrogate_set(set: &SurrogateSet, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = String::from("surrogate v1\n");
    manifest.push_str(&format!("c = {}\n", set.c));
    manifest.push_str(&format!(
        "pump = {} {} {}\n",
        set.pump_coeffs[0], set.pump_coeffs[1], set.pump_coeffs[2]
    ));
    for (kind, model) in [
        (SurrogateKind::Tdp, &set.tdp),
        (SurrogateKind::Swts, &set.swts),
        (SurrogateKind::Tds, &set.tds),
    ] {
        save_mlp(&model.net, &dir.join(format!("{}.mlp", kind.name())))?;
        stats_to_manifest(&mut manifest, kind.name(), &model.stats);
    }
    std::fs::write(dir.join("manifest.txt"), manifest)?;
    Ok(())
}

pub fn load_surrogate_set(dir: &Path) -> Result<SurrogateSet> {
    let text = std::fs::read_to_string(dir.join("manifest.txt"))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("surrogate v1") {
        return Err(Error::Parse("expected `surrogate v1` manifest header".into()));
    }
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let map = crate::config::parse_kv(&body)?;
    let c: f64 = map
        .get("c")
        .ok_or_else(|| Error::Schema("manifest missing `c`".into()))?
        .parse()
        .map_err(|_| Error::Parse("bad `c` value".into()))?;
    let pump_raw = map
        .get("pump")
        .ok_or_else(|| Error::Schema("manifest missing `pump`".into()))?;
    let pump: Vec<f64> = pump_raw
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse("bad pump value".into())))
        .collect::<Result<_>>()?;
    if pump.len() != 3 {
        return Err(Error::Schema("pump polynomial needs 3 coefficients".into()));
    }

    let mut load_model = |kind: SurrogateKind| -> Result<FittedModel> {
        let net = load_mlp(&dir.join(format!("{}.mlp", kind.name())))?;
        let stats = stats_from_manifest(&map, kind.name())?;
        if stats.mean.len() != net.input_dim() {
            return Err(Error::Shape(format!(
                "{} stats cover {} inputs, network expects {}",
                kind.name(),
                stats.mean.len(),
                net.input_dim()
            )));
        }
        Ok(FittedModel { net, stats })
    };
    Ok(SurrogateSet {
        tdp: load_model(SurrogateKind::Tdp)?,
        swts: load_model(SurrogateKind::Swts)?,
        tds: load_model(SurrogateKind::Tds)?,
        pump_coeffs: [pump[0], pump[1], pump[2]],
        c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_dataset, gen_weather, WeeklyOperator};
    use crate::plant::{PlantParams, StandardParams};

    fn small_dataset(days: usize) -> Dataset {
        let plant = PlantParams::reference().noise_free();
        let std = StandardParams::national();
        let weather = gen_weather(days, 42).unwrap();
        let op = WeeklyOperator::plan(&weather, &plant, &std);
        gen_dataset(&plant, &std, &weather, 60, &op, 7).unwrap()
    }

    #[test]
    fn pump_poly_exact_recovery() {
        let truth = [0.1492, -5.177, 168.2];
        let samples: Vec<(f64, f64)> = (0..31)
            .map(|i| {
                let f = 20.0 + i as f64;
                (f, truth[0] * f * f + truth[1] * f + truth[2])
            })
            .collect();
        let fit = fit_pump_poly(&samples).unwrap();
        for (a, b) in fit.iter().zip(truth.iter()) {
            assert!((a - b).abs() < 1e-9, "{fit:?}");
        }
    }

    #[test]
    fn pump_poly_linear_data() {
        let samples = vec![(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)];
        let fit = fit_pump_poly(&samples).unwrap();
        assert!(fit[0].abs() < 1e-9);
        assert!((fit[1] - 1.0).abs() < 1e-9);
        assert!(fit[2].abs() < 1e-9);
    }

    #[test]
    fn pump_poly_noisy_recovery_within_five_percent() {
        use rand_distr::{Distribution, StandardNormal};
        let truth = [0.1492, -5.177, 168.2];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let samples: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let f = 20.0 + 30.0 * (i as f64 / 49.0);
                let noise: f64 = StandardNormal.sample(&mut rng);
                (f, truth[0] * f * f + truth[1] * f + truth[2] + 2.0 * noise)
            })
            .collect();
        let fit = fit_pump_poly(&samples).unwrap();
        for (a, b) in fit.iter().zip(truth.iter()) {
            assert!(
                (a - b).abs() <= 0.05 * b.abs(),
                "coefficient {a} vs {b} drifted more than 5%"
            );
        }
    }

    #[test]
    fn pump_poly_needs_three_distinct_frequencies() {
        let samples = vec![(1.0, 1.0), (1.0, 1.1), (2.0, 2.0)];
        assert!(matches!(
            fit_pump_poly(&samples),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn constant_target_is_learned_exactly() {
        let mut ds = small_dataset(9);
        for s in ds.samples.iter_mut() {
            s.tds = 7.5;
        }
        let (model, mse, _) = fit_surrogate(&ds, SurrogateKind::Tds, (2, 8), 6000, 3).unwrap();
        assert!(mse < 1e-3, "mse {mse}");
        let any = SurrogateKind::Tds.inputs(&ds.samples[0]);
        assert!((model.predict(&any) - 7.5).abs() < 0.1);
    }

    #[test]
    fn schema_uses_exactly_the_documented_inputs() {
        let ds = small_dataset(1);
        let s = &ds.samples[0];
        assert_eq!(SurrogateKind::Tdp.inputs(s), [s.flow1, s.flow2, s.t1_supply]);
        assert_eq!(SurrogateKind::Swts.inputs(s), [s.t1_supply, s.flow1, s.flow2]);
        assert_eq!(SurrogateKind::Tds.inputs(s), [s.swts, s.flow2, s.t_out]);
    }

    #[test]
    fn normalization_stats_come_from_training_split_only() {
        let ds = small_dataset(9);
        let (train, _) = split_7_1(&ds);
        let (x_train, _) = kind_matrices(&train, SurrogateKind::Tdp).unwrap();
        let (x_full, _) = kind_matrices(&ds, SurrogateKind::Tdp).unwrap();
        let train_stats = NormStats::from_matrix(&x_train);
        let full_stats = NormStats::from_matrix(&x_full);
        assert_ne!(train_stats, full_stats);

        let (model, _, _) = fit_surrogate(&ds, SurrogateKind::Tdp, (1, 4), 50, 1).unwrap();
        assert_eq!(model.stats, train_stats);
    }

    #[test]
    fn zero_weight_networks_predict_zero_heat() {
        let ds = small_dataset(1);
        let (x, _) = kind_matrices(&ds, SurrogateKind::Tdp).unwrap();
        let stats = NormStats::from_matrix(&x);
        let mut net = Mlp::new(&[3, 4, 1], Activation::Relu, Activation::Identity, 0).unwrap();
        for w in net.weights_mut() {
            w.fill(0.0);
        }
        let model = FittedModel { net, stats };
        let set = SurrogateSet {
            tdp: model.clone(),
            swts: model.clone(),
            tds: model,
            pump_coeffs: PlantParams::reference().pump_poly,
            c: 4.186e-3,
        };
        let p = predict_q(&set, 70.0, -10.0, 55.0, 35.0).unwrap();
        assert_eq!(p.q1, 0.0);
        assert_eq!(p.q2, 0.0);
    }

    #[test]
    fn q1_scales_linearly_in_predicted_tdp() {
        // Constant-output networks built by hand: doubling the TDP net's
        // bias doubles q1 at fixed flow1.
        let stats = NormStats {
            mean: vec![0.0; 3],
            std: vec![1.0; 3],
            min: vec![-1e3; 3],
            max: vec![1e3; 3],
        };
        let constant_net = |value: f64| {
            let mut net = Mlp::new(&[3, 2, 1], Activation::Relu, Activation::Identity, 0).unwrap();
            for w in net.weights_mut() {
                w.fill(0.0);
            }
            net.biases_mut()[1][0] = value;
            FittedModel {
                net,
                stats: stats.clone(),
            }
        };
        let mut set = SurrogateSet {
            tdp: constant_net(10.0),
            swts: constant_net(45.0),
            tds: constant_net(8.0),
            pump_coeffs: PlantParams::reference().pump_poly,
            c: 4.186e-3,
        };
        let q1_single = predict_q(&set, 70.0, -10.0, 55.0, 35.0).unwrap().q1;
        set.tdp = constant_net(20.0);
        let q1_double = predict_q(&set, 70.0, -10.0, 55.0, 35.0).unwrap().q1;
        assert!((q1_double - 2.0 * q1_single).abs() < 1e-12);
    }

    #[test]
    fn sweep_single_entry_and_tie_break() {
        let ds = small_dataset(9);
        let single = arch_sweep(&ds, SurrogateKind::Tds, &[(1, 4)], 40, 5).unwrap();
        assert_eq!(single.chosen, 0);

        // Two identical architectures: the rule lands on that architecture
        // regardless of which copy wins.
        let tie = arch_sweep(&ds, SurrogateKind::Tds, &[(1, 4), (1, 4)], 40, 5).unwrap();
        let e = &tie.entries[tie.chosen];
        assert_eq!((e.layers, e.nodes), (1, 4));
    }

    #[test]
    fn chained_prediction_is_deterministic_and_flags_extrapolation() {
        let ds = small_dataset(9);
        let (set, metrics) = fit_surrogate_set(&ds, (2, 16), 600, 11, 4.186e-3).unwrap();
        assert_eq!(metrics.len(), 3);
        let a = predict_q(&set, 70.0, -12.0, 55.0, 35.0).unwrap();
        let b = predict_q(&set, 70.0, -12.0, 55.0, 35.0).unwrap();
        assert_eq!(a, b);
        assert!(a.q1 > 0.0 && a.q2 > 0.0);

        // Far outside the recorded supply-temperature range.
        let far = predict_q(&set, 200.0, -12.0, 55.0, 35.0).unwrap();
        assert!(far.extrapolated);
    }

    #[test]
    fn surrogate_set_round_trips_through_disk() {
        let ds = small_dataset(9);
        let (set, _) = fit_surrogate_set(&ds, (1, 8), 200, 2, 4.186e-3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_surrogate_set(&set, dir.path()).unwrap();
        let back = load_surrogate_set(dir.path()).unwrap();
        assert_eq!(set.pump_coeffs, back.pump_coeffs);
        assert_eq!(set.c, back.c);
        for (a, b) in [(&set.tdp, &back.tdp), (&set.swts, &back.swts), (&set.tds, &back.tds)] {
            assert_eq!(a.net, b.net);
            assert_eq!(a.stats, b.stats);
        }
        let p1 = predict_q(&set, 70.0, -12.0, 55.0, 35.0).unwrap();
        let p2 = predict_q(&back, 70.0, -12.0, 55.0, 35.0).unwrap();
        assert_eq!(p1, p2);
    }
}
